#include "swapsim/world.hpp"

#include <algorithm>
#include <stdexcept>

namespace swapsim {

ChainState& World::chain(const ChainId& id) {
  const auto it = chains.find(id);
  if (it == chains.end()) throw std::out_of_range("unknown chain: " + id);
  return it->second;
}

const ChainState& World::chain(const ChainId& id) const {
  const auto it = chains.find(id);
  if (it == chains.end()) throw std::out_of_range("unknown chain: " + id);
  return it->second;
}

void World::add_chain(const ChainId& id) {
  ChainState cs;
  cs.chain = id;
  chains.emplace(id, std::move(cs));
}

std::map<Hash, Secret> World::visible_secrets() const {
  std::map<Hash, Secret> out;
  for (const auto& [id, cs] : chains) {
    for (const auto& [h, s] : cs.scan_secrets()) out[h] = s;
  }
  return out;
}

OutPoint World::seed(const ChainId& id, const PartyId& party, Amount amount) {
  return chain(id).seed_output(party, amount);
}

std::vector<std::pair<OutPoint, Amount>> World::select_wallet(const ChainId& id,
                                                              const PartyId& party,
                                                              Amount amount) const {
  std::vector<std::pair<OutPoint, Amount>> candidates;
  for (const auto& [op, entry] : chain(id).utxos) {
    if (is_bare_wallet(entry.output.predicate, party) && !reserved.count(op)) {
      candidates.emplace_back(op, entry.output.amount);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::pair<OutPoint, Amount>> picked;
  Amount got = 0;
  for (const auto& c : candidates) {
    if (got >= amount) break;
    picked.push_back(c);
    got += c.second;
  }
  if (got < amount) return {};
  return picked;
}

}  // namespace swapsim
