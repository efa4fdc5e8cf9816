#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "swapsim/contracts.hpp"
#include "swapsim/price.hpp"
#include "swapsim/strategy.hpp"
#include "swapsim/trace.hpp"
#include "swapsim/world.hpp"

namespace swapsim {

struct HtlcPaymentTerms {
  ChainId chain = "BCoin";
  PartyId payer = "bob";
  PartyId payee = "alice";
  Amount amount = kCoin;
  TimePoint T = 10;
};

struct SwapTerms {
  ChainId a_chain = "ACoin";
  ChainId b_chain = "BCoin";
  PartyId alice = "alice";  // funds a_chain, owns the swap secret
  PartyId bob = "bob";      // funds b_chain
  Amount a_amount = kCoin;
  Amount b_amount = kCoin;
  TimePoint T = 10;
  // Expiry overrides; defaults follow the protocol (ACoin T+1, BCoin T).
  // A scenario that sets expiry_b > expiry_a is the known-broken ordering.
  std::optional<TimePoint> expiry_a;
  std::optional<TimePoint> expiry_b;

  TimePoint htlc_a_expiry() const { return expiry_a.value_or(T + 1); }
  TimePoint htlc_b_expiry() const { return expiry_b.value_or(T); }
  void validate() const;
};

struct SwaptionTerms {
  ChainId a_chain = "ACoin";
  ChainId b_chain = "BCoin";
  PartyId alice = "alice";  // option holder; pays the premium
  PartyId bob = "bob";      // option writer
  Amount premium = kCoin / 10;  // in ACoin
  Amount p_a = kCoin;
  Amount p_b = kCoin;
  Amount m_a = 0;  // margins; used only when margined
  Amount m_b = 0;
  TimePoint T = 10;   // funding swap expiry
  TimePoint E = 100;  // swaption expiry
  TimePoint M = 98;   // margin expiry base (fixed margin: E-2)
  bool cancellable = false;
  bool margined = false;
  // Margin expiry overrides; defaults: holder M, writer M+1. Swapping them
  // is the known-broken ordering.
  std::optional<TimePoint> margin_expiry_a;
  std::optional<TimePoint> margin_expiry_b;

  TimePoint margin_a_expiry() const { return margin_expiry_a.value_or(M); }
  TimePoint margin_b_expiry() const { return margin_expiry_b.value_or(M + 1); }
  void validate() const;
};

struct RunResult {
  Trace trace;
  Outcome outcome;
};

// ---------------------------------------------------------------------------
// Session: a deterministic time-stepped run of one protocol over a world.
//
// Protocol installers register rules (decision points offered to parties) and
// hooks (automatic bookkeeping such as handing over pre-signatures). Each
// timestep runs to a fixpoint: due intents execute in (chain, party, seq)
// order, hooks run, newly enabled rules consult their party's strategy, and
// chosen moves are queued as intents. Same-step reaction is what gives the
// staggered timelocks their bite at the boundaries.
// ---------------------------------------------------------------------------
class Session {
 public:
  struct Rule {
    std::string key;
    PartyId party;
    ChainId chain;
    std::function<bool(Session&)> enabled;
    std::function<std::vector<MoveOption>(Session&)> options;
    std::function<void(Session&, const MoveOption&)> on_choose;
  };

  Session(World& world, const StrategyTable& strategies, std::vector<PartyId> parties,
          std::string key_prefix = "");

  void add_rule(Rule rule);
  void add_hook(std::function<bool(Session&)> hook);
  void set_horizon(TimePoint horizon) { horizon_ = horizon; }
  TimePoint horizon() const { return horizon_; }

  /// Processes the current timestep to fixpoint; true if anything happened.
  bool step();
  /// Steps and advances the clock until the horizon.
  void run_to_horizon();
  RunResult result() const;

  World& world() { return world_; }
  const World& world() const { return world_; }
  TimePoint now() const { return world_.now; }
  const std::vector<PartyId>& parties() const { return parties_; }
  const std::string& key_prefix() const { return key_prefix_; }

  void snapshot_initial();
  void set_disposition(const std::string& key, const std::string& value);
  bool has_disposition(const std::string& key) const;
  void note(const PartyId& party, const std::string& text);
  void channel_event(const ChainId& chain, const PartyId& party, const std::string& text,
                     std::vector<std::pair<std::string, Amount>> amounts = {});

  bool utxo_exists(const ChainId& chain, const OutPoint& op) const;
  std::optional<TimePoint> confirmed_time(const ChainId& chain, const OutPoint& op) const;
  bool secret_visible(const Hash& h) const;
  std::optional<Secret> scanned_secret(const Hash& h) const;

  /// Hands `to` a counterparty signature for later witness assembly.
  void grant(const PartyId& to, const SignatureRecord& rec);
  bool has_any_grant(const PartyId& holder, const PartyId& signer) const;

  /// Builds witnesses (publisher's own signature, every grant the publisher
  /// holds that verifies, plus `reveal` secrets) and publishes. MissingUtxo
  /// is silently skipped (the move lost a race); other failures are traced.
  bool publish_tx(const ChainId& chain, Transaction tx, const PartyId& publisher,
                  const std::string& label, const std::vector<Secret>& reveal = {});

  void schedule(TimePoint t, const ChainId& chain, const PartyId& party,
                std::function<void(Session&)> fire);

  /// Timing options for a move: honest time first, then boundary samples
  /// {X, X+1} for each relevant lock X (plus X-1 for hash-claim races), then
  /// the passive move (Renege/LetExpire/Default/Wait) when one is given.
  std::vector<MoveOption> timed_options(Action action, TimePoint honest_at,
                                        const std::vector<TimePoint>& locks,
                                        bool include_lock_minus_one,
                                        std::optional<Action> passive) const;

 private:
  struct Intent {
    TimePoint t;
    ChainId chain;
    PartyId party;
    std::uint64_t seq;
    std::function<void(Session&)> fire;

    bool operator<(const Intent& other) const {
      return std::tie(t, chain, party, seq) < std::tie(other.t, other.chain, other.party, other.seq);
    }
  };

  bool fire_due_intents();
  bool consult_rules();
  bool run_hooks();

  World& world_;
  const StrategyTable& strategies_;
  std::vector<PartyId> parties_;
  std::string key_prefix_;
  TimePoint horizon_ = 0;
  std::vector<Rule> rules_;
  std::set<std::string> decided_;
  std::vector<std::function<bool(Session&)>> hooks_;
  std::multiset<Intent> intents_;
  std::uint64_t next_seq_ = 0;
  std::map<PartyId, std::vector<SignatureRecord>> grants_;
  Trace trace_;
  std::map<std::pair<PartyId, ChainId>, Amount> initial_;
  std::map<std::string, std::string> dispositions_;
};

struct SwaptionInstallOpts {
  bool with_presignatures = true;
  // Used by the two-leg futures construction: share one funding secret and
  // let this leg's funding unlock from the published reveal.
  std::optional<Secret> funding_secret;
  bool funding_by_scan = false;
};

// Protocol installers: build all template transactions, exchange the
// pre-signatures the protocol requires up front, and register rules.
void install_htlc_payment(Session& s, const HtlcPaymentTerms& terms);
void install_atomic_swap(Session& s, const SwapTerms& terms);
void install_swaption(Session& s, const SwaptionTerms& terms);
void install_swaption_ex(Session& s, const SwaptionTerms& terms, const SwaptionInstallOpts& opts);

// Swaption variant selection follows the terms flags; these run a fresh
// session over `world` with wallets already seeded.
RunResult run_htlc_payment(World& world, const HtlcPaymentTerms& terms,
                           const StrategyTable& strategies);
RunResult run_atomic_swap(World& world, const SwapTerms& terms, const StrategyTable& strategies);
RunResult run_swaption(World& world, const SwaptionTerms& terms, const StrategyTable& strategies);
RunResult run_swaption_with_cancellation(World& world, const SwaptionTerms& terms,
                                         const StrategyTable& strategies);
RunResult run_margin_swaption(World& world, const SwaptionTerms& terms,
                              const StrategyTable& strategies, const PricePath& prices);

/// Seeds wallets with exactly the protocol needs.
void seed_for_swap(World& world, const SwapTerms& terms);
void seed_for_swaption(World& world, const SwaptionTerms& terms);

/// Rule keys a scenario may script for each protocol, for validation.
std::vector<std::string> rule_keys_htlc();
std::vector<std::string> rule_keys_swap();
std::vector<std::string> rule_keys_swaption(const SwaptionTerms& terms);

}  // namespace swapsim
