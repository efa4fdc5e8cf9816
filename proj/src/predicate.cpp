#include "swapsim/predicate.hpp"

#include <algorithm>
#include <stdexcept>

namespace swapsim {

Predicate p_sig(PartyId party) {
  Predicate p;
  p.kind = PredKind::SigLeaf;
  p.party = std::move(party);
  return p;
}

Predicate p_preimage(Hash h) {
  Predicate p;
  p.kind = PredKind::PreimageLeaf;
  p.hash = h;
  return p;
}

Predicate p_after(TimePoint t) {
  Predicate p;
  p.kind = PredKind::AbsTimeLeaf;
  p.abs_time = t;
  return p;
}

Predicate p_after_rel(TimeDelta d) {
  Predicate p;
  p.kind = PredKind::RelTimeLeaf;
  p.rel_delta = d;
  return p;
}

Predicate p_all(std::vector<Predicate> children) {
  if (children.empty()) throw std::invalid_argument("All node needs children");
  Predicate p;
  p.kind = PredKind::All;
  p.children = std::move(children);
  return p;
}

Predicate p_any(std::vector<Predicate> children) {
  if (children.empty()) throw std::invalid_argument("Any node needs children");
  Predicate p;
  p.kind = PredKind::Any;
  p.children = std::move(children);
  return p;
}

void serialize_predicate(const Predicate& p, ByteWriter& w) {
  w.u8(static_cast<std::uint8_t>(p.kind));
  switch (p.kind) {
    case PredKind::SigLeaf:
      w.str(p.party);
      break;
    case PredKind::PreimageLeaf:
      w.bytes32(p.hash);
      break;
    case PredKind::AbsTimeLeaf:
      w.u64(p.abs_time);
      break;
    case PredKind::RelTimeLeaf:
      w.u64(p.rel_delta);
      break;
    case PredKind::All:
    case PredKind::Any:
      w.u32(static_cast<std::uint32_t>(p.children.size()));
      for (const auto& c : p.children) serialize_predicate(c, w);
      break;
  }
}

std::vector<std::uint8_t> serialize_predicate(const Predicate& p) {
  ByteWriter w;
  serialize_predicate(p, w);
  return w.data();
}

Predicate parse_predicate(ByteReader& r) {
  Predicate p;
  p.kind = static_cast<PredKind>(r.u8());
  switch (p.kind) {
    case PredKind::SigLeaf:
      p.party = r.str();
      break;
    case PredKind::PreimageLeaf:
      p.hash = r.bytes32();
      break;
    case PredKind::AbsTimeLeaf:
      p.abs_time = r.u64();
      break;
    case PredKind::RelTimeLeaf:
      p.rel_delta = r.u64();
      break;
    case PredKind::All:
    case PredKind::Any: {
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) p.children.push_back(parse_predicate(r));
      if (p.children.empty()) throw std::runtime_error("empty predicate node");
      break;
    }
    default:
      throw std::runtime_error("bad predicate tag");
  }
  return p;
}

Predicate parse_predicate(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  Predicate p = parse_predicate(r);
  if (!r.done()) throw std::runtime_error("trailing predicate bytes");
  return p;
}

bool is_bare_wallet(const Predicate& p, const PartyId& party) {
  return p.kind == PredKind::SigLeaf && p.party == party;
}

namespace {
void collect_signers(const Predicate& p, std::vector<PartyId>& out) {
  if (p.kind == PredKind::SigLeaf) out.push_back(p.party);
  for (const auto& c : p.children) collect_signers(c, out);
}
}  // namespace

std::vector<PartyId> signers_mentioned(const Predicate& p) {
  std::vector<PartyId> out;
  collect_signers(p, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace swapsim
