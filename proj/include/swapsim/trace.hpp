#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "swapsim/types.hpp"
#include "swapsim/world.hpp"

namespace swapsim {

// One ordered event log per protocol run. Record format (| "-" when empty):
//   time chain party event txid amounts...
// where `amounts` lists each output as value@label for publishes and is the
// chosen move for decisions.
struct TraceEvent {
  TimePoint t = 0;
  std::string chain;  // "-" for chain-less events
  std::string party;
  std::string event;  // decide:<key> | publish:<label> | reject:<label> | note:<text>
  std::string id;     // 8-hex txid prefix, or "-"
  std::vector<std::pair<std::string, Amount>> amounts;

  std::string record_line() const;
  std::string text_line() const;
};

struct Trace {
  std::vector<TraceEvent> events;

  std::string to_records() const;
  std::string to_text() const;
  bool operator==(const Trace&) const = default;
};

// Final balances per (party, chain) plus contract disposition labels.
struct Outcome {
  std::map<std::pair<PartyId, ChainId>, Amount> balances;
  std::map<std::pair<PartyId, ChainId>, Amount> initial;
  std::map<std::string, std::string> dispositions;

  Amount delta(const PartyId& party, const ChainId& chain) const;
  Amount final_balance(const PartyId& party, const ChainId& chain) const;
  std::string summary() const;
  bool operator==(const Outcome&) const = default;
};

Outcome snapshot_outcome(const World& world, const std::vector<PartyId>& parties,
                         const std::map<std::pair<PartyId, ChainId>, Amount>& initial);

}  // namespace swapsim
