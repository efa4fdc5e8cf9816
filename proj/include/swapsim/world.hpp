#pragma once

#include <map>
#include <set>
#include <vector>

#include "swapsim/chain.hpp"
#include "swapsim/types.hpp"

namespace swapsim {

// All chains share one global discrete clock. A World is a plain value:
// copy it to fork an execution.
struct World {
  TimePoint now = 0;
  std::map<ChainId, ChainState> chains;
  // Outpoints earmarked by not-yet-published template transactions, so that
  // concurrent protocol installs never select the same wallet coin.
  std::set<OutPoint> reserved;

  ChainState& chain(const ChainId& id);
  const ChainState& chain(const ChainId& id) const;
  void add_chain(const ChainId& id);

  void advance_clock(TimeDelta delta) { now += delta; }

  PublishResult publish(const ChainId& id, const Transaction& tx) {
    return chain(id).publish(tx, now);
  }

  /// Secrets visible anywhere (union over chains). Parties watch all chains.
  std::map<Hash, Secret> visible_secrets() const;

  /// Wallet seeding plus bookkeeping of initial balances.
  OutPoint seed(const ChainId& id, const PartyId& party, Amount amount);

  Amount balance(const ChainId& id, const PartyId& party) const {
    return chain(id).balance_of(party);
  }

  /// Largest-first selection of unreserved bare wallet outpoints covering
  /// `amount`. Empty result means insufficient funds.
  std::vector<std::pair<OutPoint, Amount>> select_wallet(const ChainId& id, const PartyId& party,
                                                         Amount amount) const;
  void reserve(const OutPoint& op) { reserved.insert(op); }
};

}  // namespace swapsim
