#pragma once

#include <vector>

#include "swapsim/types.hpp"
#include "swapsim/wire.hpp"

namespace swapsim {

// Spending condition of an output: a boolean tree over signature, preimage
// and timelock leaves. Serialization tags are part of the fixture format.
enum class PredKind : std::uint8_t {
  SigLeaf = 0x01,
  PreimageLeaf = 0x02,
  AbsTimeLeaf = 0x03,
  RelTimeLeaf = 0x04,
  All = 0x05,
  Any = 0x06,
};

struct Predicate {
  PredKind kind = PredKind::All;
  PartyId party;                    // SigLeaf
  Hash hash{};                      // PreimageLeaf
  TimePoint abs_time = 0;           // AbsTimeLeaf
  TimeDelta rel_delta = 0;          // RelTimeLeaf
  std::vector<Predicate> children;  // All / Any

  bool operator==(const Predicate&) const = default;
};

Predicate p_sig(PartyId party);
Predicate p_preimage(Hash h);
Predicate p_after(TimePoint t);
Predicate p_after_rel(TimeDelta d);
Predicate p_all(std::vector<Predicate> children);
Predicate p_any(std::vector<Predicate> children);

void serialize_predicate(const Predicate& p, ByteWriter& w);
std::vector<std::uint8_t> serialize_predicate(const Predicate& p);
Predicate parse_predicate(ByteReader& r);
Predicate parse_predicate(const std::vector<std::uint8_t>& bytes);

/// True iff the predicate is the bare single-signature form used for wallet
/// and payout outputs; such outputs count toward the party's balance.
bool is_bare_wallet(const Predicate& p, const PartyId& party);

/// Every party named in SigLeaf nodes (deduplicated, sorted).
std::vector<PartyId> signers_mentioned(const Predicate& p);

}  // namespace swapsim
