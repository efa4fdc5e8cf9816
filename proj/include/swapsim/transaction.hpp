#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "swapsim/predicate.hpp"
#include "swapsim/types.hpp"

namespace swapsim {

struct Output {
  Amount amount = 0;
  Predicate predicate;

  bool operator==(const Output&) const = default;
};

struct OutPoint {
  Digest txid{};
  std::uint32_t index = 0;

  auto operator<=>(const OutPoint&) const = default;
};

enum class SigMode : std::uint8_t {
  CommitAll = 0,     // covers all input outpoints, all outputs, locktime
  AnyoneCanPay = 1,  // covers the own input's outpoint, all outputs, locktime
};

// Simulated attestation: valid iff `digest` matches the spending
// transaction's digest recomputed under `mode` at the evaluated input.
struct SignatureRecord {
  PartyId signer;
  Digest digest{};
  SigMode mode = SigMode::CommitAll;

  bool operator==(const SignatureRecord&) const = default;
};

struct Witness {
  std::vector<Secret> preimages;
  std::vector<SignatureRecord> signatures;

  void add_preimage(const Secret& s);
  void add_signature(const SignatureRecord& r);
  bool operator==(const Witness&) const = default;
};

struct TxIn {
  OutPoint prevout;
  Witness witness;

  bool operator==(const TxIn&) const = default;
};

struct Transaction {
  std::vector<TxIn> inputs;
  std::vector<Output> outputs;
  TimePoint locktime = 0;

  bool operator==(const Transaction&) const = default;
};

/// Digest under a signature mode. Witnesses are never covered, so attaching
/// signatures or revealing secrets cannot change any digest.
Digest tx_digest(const Transaction& tx, SigMode mode, std::size_t own_input = 0);

/// Transaction id: the CommitAll digest. Depends on input outpoints, so
/// adding a funding input changes the id (the malleability the margin
/// construction has to live with).
Digest txid(const Transaction& tx);

SignatureRecord sign(const PartyId& party, const Transaction& tx, SigMode mode,
                     std::size_t own_input = 0);

bool signature_valid(const SignatureRecord& rec, const Transaction& tx, std::size_t input);

/// Evaluates a spending condition at one input of `tx`.
///   SigLeaf      — a valid matching signature is present in the witness
///   PreimageLeaf — a preimage hashing to the leaf value is present
///   AbsTimeLeaf  — now >= t and tx.locktime >= t
///   RelTimeLeaf  — now >= spent_confirmed_at + delta
bool eval_predicate(const Predicate& p, const Witness& w, TimePoint now,
                    TimePoint spent_confirmed_at, const Transaction& tx, std::size_t input);

}  // namespace swapsim
