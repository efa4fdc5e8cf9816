#include "swapsim/transaction.hpp"

#include <algorithm>
#include <stdexcept>

#include "swapsim/sha256.hpp"
#include "swapsim/wire.hpp"

namespace swapsim {

void Witness::add_preimage(const Secret& s) {
  if (std::find(preimages.begin(), preimages.end(), s) == preimages.end()) {
    preimages.push_back(s);
  }
}

void Witness::add_signature(const SignatureRecord& r) {
  if (std::find(signatures.begin(), signatures.end(), r) == signatures.end()) {
    signatures.push_back(r);
  }
}

namespace {

void write_outpoint(ByteWriter& w, const OutPoint& op) {
  w.bytes32(op.txid);
  w.u32(op.index);
}

void write_outputs_and_locktime(ByteWriter& w, const Transaction& tx) {
  w.u32(static_cast<std::uint32_t>(tx.outputs.size()));
  for (const auto& out : tx.outputs) {
    w.u64(static_cast<std::uint64_t>(out.amount));
    w.blob(serialize_predicate(out.predicate));
  }
  w.u64(tx.locktime);
}

}  // namespace

Digest tx_digest(const Transaction& tx, SigMode mode, std::size_t own_input) {
  ByteWriter w;
  if (mode == SigMode::CommitAll) {
    w.u32(static_cast<std::uint32_t>(tx.inputs.size()));
    for (const auto& in : tx.inputs) write_outpoint(w, in.prevout);
  } else {
    if (own_input >= tx.inputs.size()) throw std::out_of_range("own_input out of range");
    write_outpoint(w, tx.inputs[own_input].prevout);
  }
  write_outputs_and_locktime(w, tx);
  return sha256(w.data());
}

Digest txid(const Transaction& tx) { return tx_digest(tx, SigMode::CommitAll, 0); }

SignatureRecord sign(const PartyId& party, const Transaction& tx, SigMode mode,
                     std::size_t own_input) {
  return SignatureRecord{party, tx_digest(tx, mode, own_input), mode};
}

bool signature_valid(const SignatureRecord& rec, const Transaction& tx, std::size_t input) {
  return rec.digest == tx_digest(tx, rec.mode, input);
}

bool eval_predicate(const Predicate& p, const Witness& w, TimePoint now,
                    TimePoint spent_confirmed_at, const Transaction& tx, std::size_t input) {
  switch (p.kind) {
    case PredKind::SigLeaf:
      for (const auto& rec : w.signatures) {
        if (rec.signer == p.party && signature_valid(rec, tx, input)) return true;
      }
      return false;
    case PredKind::PreimageLeaf:
      for (const auto& s : w.preimages) {
        if (hash_secret(s) == p.hash) return true;
      }
      return false;
    case PredKind::AbsTimeLeaf:
      return now >= p.abs_time && tx.locktime >= p.abs_time;
    case PredKind::RelTimeLeaf:
      return now >= spent_confirmed_at + p.rel_delta;
    case PredKind::All:
      for (const auto& c : p.children) {
        if (!eval_predicate(c, w, now, spent_confirmed_at, tx, input)) return false;
      }
      return true;
    case PredKind::Any:
      for (const auto& c : p.children) {
        if (eval_predicate(c, w, now, spent_confirmed_at, tx, input)) return true;
      }
      return false;
  }
  return false;
}

}  // namespace swapsim
