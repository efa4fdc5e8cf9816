#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swapsim/transaction.hpp"
#include "swapsim/types.hpp"

namespace swapsim {

enum class PublishError : std::uint8_t {
  None = 0,
  Malformed,            // no inputs/outputs, duplicate inputs, nonpositive output
  LocktimeNotReached,   // tx.locktime > now
  MissingUtxo,          // unknown or already spent outpoint
  PredicateUnsatisfied,
  ValueCreated,         // outputs exceed inputs
};

const char* publish_error_name(PublishError e);

struct PublishResult {
  PublishError error = PublishError::None;
  Digest id{};

  bool ok() const { return error == PublishError::None; }
};

struct UtxoEntry {
  Output output;
  TimePoint confirmed_at = 0;
};

// One simulated UTXO chain. Publishes confirm instantly; the difference
// between input and output sums is burned as fee.
struct ChainState {
  ChainId chain;
  std::map<OutPoint, UtxoEntry> utxos;
  std::vector<Transaction> log;
  Amount burned = 0;

  /// Validates and applies `tx` at time `now`. Locktime is checked before
  /// predicates so an early refund reports LocktimeNotReached.
  PublishResult publish(const Transaction& tx, TimePoint now);

  /// All (hash, secret) pairs revealed by any published witness.
  std::map<Hash, Secret> scan_secrets() const;

  /// Genesis-style wallet seeding; the only path that may create value.
  OutPoint seed_output(const PartyId& party, Amount amount);

  std::optional<UtxoEntry> find_utxo(const OutPoint& op) const;
  Amount utxo_total() const;
  Amount balance_of(const PartyId& party) const;  // bare single-sig outputs only
};

}  // namespace swapsim
