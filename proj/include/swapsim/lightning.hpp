#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swapsim/engine.hpp"

namespace swapsim {

// One in-channel contract, HTLC-shaped: the payee claims with the preimage,
// the payer takes it back at expiry. A funding-layer contract forwards the
// premium on claim and rolls the principal into a successor option contract.
struct LnContract {
  std::string id;
  PartyId payer;
  PartyId payee;
  Amount amount = 0;
  Hash hash{};
  TimePoint expiry = 0;
  Amount forward_on_claim = 0;  // premium component paid out to the payee
  bool is_funding = false;
  Hash next_hash{};        // successor option contract parameters
  TimePoint next_expiry = 0;
  std::string next_id;

  Predicate onchain_predicate() const;  // htlc template, for channel closes
};

// Cooperatively updated two-party ledger. Balances plus locked contracts
// always add up to the funding amount.
struct Channel {
  std::string id;  // "<chain>:<a>-<b>"
  ChainId chain;
  PartyId a, b;
  Amount balance_a = 0, balance_b = 0;
  std::map<std::string, LnContract> contracts;
  OutPoint funding{};
  Amount capacity = 0;
  bool open = false;

  Amount balance_of(const PartyId& p) const;
  void credit(const PartyId& p, Amount v);
  bool debit(const PartyId& p, Amount v);
  Amount locked_total() const;
  bool conserves() const { return balance_a + balance_b + locked_total() == capacity; }
  bool has_party(const PartyId& p) const { return p == a || p == b; }
};

struct OnchainContract {
  LnContract meta;
  ChainId chain;
  OutPoint outpoint{};
};

struct LnState {
  std::map<std::string, Channel> channels;
  std::map<Hash, Secret> revealed;              // secrets revealed in-channel
  std::vector<OnchainContract> materialized;     // contracts carried out by closes

  static std::string channel_key(const ChainId& chain, const PartyId& x, const PartyId& y);
  Channel& channel(const std::string& id);
  const Channel& channel(const std::string& id) const;
  Channel* between(const ChainId& chain, const PartyId& x, const PartyId& y);

  /// Union of on-chain and in-channel revealed secrets.
  std::optional<Secret> secret(const World& world, const Hash& h) const;

  /// Wallet balance plus open-channel balances on one chain.
  Amount total_of(const World& world, const PartyId& party, const ChainId& chain) const;
};

struct ContractDelta {
  std::vector<LnContract> add;
  std::vector<std::string> remove;  // removed value is credited via new_balances
};

Channel& open_channel(World& world, LnState& ln, const ChainId& chain, const PartyId& a,
                      const PartyId& b, Amount fund_a, Amount fund_b);

/// Cooperative state update; returns false (state unchanged) if the new
/// balances plus contracts break conservation or a balance goes negative.
bool update_channel(Channel& ch, Amount new_balance_a, Amount new_balance_b,
                    const ContractDelta& delta);

/// Latest agreed state on-chain: one output per balance, one per contract
/// (carrying its template predicate). Returns contract outpoints and
/// registers them for on-chain continuation.
std::map<std::string, OutPoint> close_channel(World& world, LnState& ln, Channel& ch);

// A routed swaption: per-hop funding contracts along both paths, rolling
// into per-hop option contracts. Hop expiries rise by one toward the
// originator so every claim leaves time to claim upstream.
struct RoutedPosition {
  std::string id;
  ChainId a_chain, b_chain;
  std::vector<PartyId> path_a;  // holder ... writer (holder pays this asset)
  std::vector<PartyId> path_b;  // writer ... holder
  Amount premium = 0, p_a = 0, p_b = 0;
  Secret fund_secret{}, ex_secret{};
  Hash h_fund{}, h_ex{};
  PartyId holder, writer;
  TimePoint T = 10, E = 100;
  std::string mimic_upstream;  // exercise triggers when this position pays out

  std::vector<std::string> fc_a, fc_b;  // funding contract ids per edge
  std::vector<std::string> sc_a, sc_b;  // option contract ids per edge
  bool funded = false;

  TimePoint fc_expiry_b(std::size_t edge) const;
  TimePoint fc_expiry_a(std::size_t edge) const;
  TimePoint sc_expiry_b(std::size_t edge) const;
  TimePoint sc_expiry_a(std::size_t edge) const;
  bool bilateral() const { return path_a.size() == 2 && path_b.size() == 2; }
};

/// Per-position scripted keys: "<pos id>.install.{a|b}.<edge>",
/// "<pos id>.accept", "<pos id>.claim.{a|b}.<edge>", "<pos id>.exercise",
/// "<pos id>.exclaim.{a|b}.<edge>", "<pos id>.refund.{a|b}.<edge>".
struct RouteSpec {
  std::string id = "pos";
  std::vector<PartyId> path_a;
  std::vector<PartyId> path_b;
  SwaptionTerms terms;  // premium/p_a/p_b/T/E (margins unused in routing)
  std::string secret_ns;  // defaults to id
};

RoutedPosition make_position(const RouteSpec& spec);

/// Runs one session over a set of live positions: funding-phase rules for
/// unfunded positions, exercise/settlement rules for funded ones, and
/// claim/refund rules for contracts a channel close pushed on-chain.
RunResult run_positions(World& world, LnState& ln, std::vector<RoutedPosition*> positions,
                        const StrategyTable& strategies, TimePoint horizon);

/// Splits a funded position at `node` into (holder..node) and (node..writer).
/// The writer-side segment is re-keyed to `node_secret` (the node becomes its
/// holder) and every contract's expiry shrinks to its sub-path staircase.
/// Cooperative; requires node interior to both paths.
std::pair<RoutedPosition, RoutedPosition> decouple(World& world, LnState& ln,
                                                   const RoutedPosition& pos,
                                                   const PartyId& node,
                                                   const Secret& node_secret);

/// Cooperative re-key of a funded bilateral position: sets the exercise hash
/// and expiry base (contracts rewritten in place). `mimic_upstream` makes the
/// position fire when the named position pays out, which is how offsetting
/// positions share one secret.
void rekey_position(LnState& ln, RoutedPosition& pos, const Hash& h_ex, TimePoint new_E,
                    const std::string& mimic_upstream = "");

/// Cancels two identical opposite bilateral positions between the same two
/// parties (same secrets and amounts, outer expiry one step later): all four
/// contracts are removed and locked funds return to their payers.
Trace unwind(World& world, LnState& ln, RoutedPosition& inner, RoutedPosition& outer);

}  // namespace swapsim
