#include "swapsim/trace.hpp"

#include <sstream>

namespace swapsim {

namespace {
std::string or_dash(const std::string& s) { return s.empty() ? "-" : s; }
}  // namespace

std::string TraceEvent::record_line() const {
  std::ostringstream os;
  os << t << ' ' << or_dash(chain) << ' ' << or_dash(party) << ' ' << or_dash(event) << ' '
     << or_dash(id);
  for (const auto& [label, value] : amounts) {
    os << ' ' << label << '=' << format_amount(value);
  }
  return os.str();
}

std::string TraceEvent::text_line() const {
  std::ostringstream os;
  os << "t=" << t;
  if (!chain.empty()) os << " [" << chain << "]";
  os << ' ' << or_dash(party) << ' ' << event;
  if (!id.empty()) os << " txid=" << id;
  for (const auto& [label, value] : amounts) {
    os << ' ' << label << '=' << format_amount(value);
  }
  return os.str();
}

std::string Trace::to_records() const {
  std::string out;
  for (const auto& e : events) {
    out += e.record_line();
    out += '\n';
  }
  return out;
}

std::string Trace::to_text() const {
  std::string out;
  for (const auto& e : events) {
    out += e.text_line();
    out += '\n';
  }
  return out;
}

Amount Outcome::delta(const PartyId& party, const ChainId& chain) const {
  const auto key = std::make_pair(party, chain);
  Amount fin = 0, init = 0;
  if (const auto it = balances.find(key); it != balances.end()) fin = it->second;
  if (const auto it = initial.find(key); it != initial.end()) init = it->second;
  return fin - init;
}

Amount Outcome::final_balance(const PartyId& party, const ChainId& chain) const {
  const auto it = balances.find(std::make_pair(party, chain));
  return it == balances.end() ? 0 : it->second;
}

std::string Outcome::summary() const {
  std::ostringstream os;
  for (const auto& [key, value] : balances) {
    os << key.first << '@' << key.second << '=' << format_amount(value) << ' ';
  }
  for (const auto& [k, v] : dispositions) os << k << ':' << v << ' ';
  std::string s = os.str();
  if (!s.empty()) s.pop_back();
  return s;
}

Outcome snapshot_outcome(const World& world, const std::vector<PartyId>& parties,
                         const std::map<std::pair<PartyId, ChainId>, Amount>& initial) {
  Outcome o;
  o.initial = initial;
  for (const auto& [chain_id, cs] : world.chains) {
    for (const auto& party : parties) {
      o.balances[{party, chain_id}] = cs.balance_of(party);
    }
  }
  return o;
}

}  // namespace swapsim
