#include "swapsim/chain.hpp"

#include <set>

#include "swapsim/sha256.hpp"

namespace swapsim {

const char* publish_error_name(PublishError e) {
  switch (e) {
    case PublishError::None: return "ok";
    case PublishError::Malformed: return "Malformed";
    case PublishError::LocktimeNotReached: return "LocktimeNotReached";
    case PublishError::MissingUtxo: return "MissingUtxo";
    case PublishError::PredicateUnsatisfied: return "PredicateUnsatisfied";
    case PublishError::ValueCreated: return "ValueCreated";
  }
  return "?";
}

PublishResult ChainState::publish(const Transaction& tx, TimePoint now) {
  if (tx.inputs.empty() || tx.outputs.empty()) return {PublishError::Malformed, {}};
  std::set<OutPoint> seen;
  for (const auto& in : tx.inputs) {
    if (!seen.insert(in.prevout).second) return {PublishError::Malformed, {}};
  }
  for (const auto& out : tx.outputs) {
    if (out.amount <= 0) return {PublishError::Malformed, {}};
  }
  if (tx.locktime > now) return {PublishError::LocktimeNotReached, {}};

  Amount in_total = 0;
  for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
    const auto it = utxos.find(tx.inputs[i].prevout);
    if (it == utxos.end()) return {PublishError::MissingUtxo, {}};
    in_total += it->second.output.amount;
  }
  for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
    const auto& entry = utxos.at(tx.inputs[i].prevout);
    if (!eval_predicate(entry.output.predicate, tx.inputs[i].witness, now, entry.confirmed_at,
                        tx, i)) {
      return {PublishError::PredicateUnsatisfied, {}};
    }
  }
  Amount out_total = 0;
  for (const auto& out : tx.outputs) out_total += out.amount;
  if (out_total > in_total) return {PublishError::ValueCreated, {}};

  for (const auto& in : tx.inputs) utxos.erase(in.prevout);
  const Digest id = txid(tx);
  for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
    utxos[OutPoint{id, static_cast<std::uint32_t>(i)}] = UtxoEntry{tx.outputs[i], now};
  }
  burned += in_total - out_total;
  log.push_back(tx);
  return {PublishError::None, id};
}

std::map<Hash, Secret> ChainState::scan_secrets() const {
  std::map<Hash, Secret> out;
  for (const auto& tx : log) {
    for (const auto& in : tx.inputs) {
      for (const auto& s : in.witness.preimages) out[hash_secret(s)] = s;
    }
  }
  return out;
}

OutPoint ChainState::seed_output(const PartyId& party, Amount amount) {
  Transaction tx;
  tx.outputs.push_back(Output{amount, p_sig(party)});
  // Distinguish seeds for the same (party, amount) pair by log position.
  tx.locktime = static_cast<TimePoint>(log.size());
  const Digest id = txid(tx);
  const OutPoint op{id, 0};
  utxos[op] = UtxoEntry{tx.outputs[0], 0};
  log.push_back(tx);
  return op;
}

std::optional<UtxoEntry> ChainState::find_utxo(const OutPoint& op) const {
  const auto it = utxos.find(op);
  if (it == utxos.end()) return std::nullopt;
  return it->second;
}

Amount ChainState::utxo_total() const {
  Amount total = 0;
  for (const auto& [op, entry] : utxos) total += entry.output.amount;
  return total;
}

Amount ChainState::balance_of(const PartyId& party) const {
  Amount total = 0;
  for (const auto& [op, entry] : utxos) {
    if (is_bare_wallet(entry.output.predicate, party)) total += entry.output.amount;
  }
  return total;
}

}  // namespace swapsim
