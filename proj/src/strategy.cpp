#include "swapsim/strategy.hpp"

#include <sstream>
#include <stdexcept>

namespace swapsim {

const char* action_name(Action a) {
  switch (a) {
    case Action::Wait: return "wait";
    case Action::Accept: return "accept";
    case Action::Renege: return "renege";
    case Action::DepositPrincipal: return "deposit";
    case Action::Default: return "default";
    case Action::Exercise: return "exercise";
    case Action::Cancel: return "cancel";
    case Action::LetExpire: return "let_expire";
    case Action::Cheat: return "cheat";
    case Action::PublishBreachRemedy: return "breach_remedy";
    case Action::PublishRefund: return "refund";
    case Action::Claim: return "claim";
  }
  return "?";
}

std::optional<Action> action_from_name(const std::string& name) {
  static const std::map<std::string, Action> table = {
      {"wait", Action::Wait},
      {"accept", Action::Accept},
      {"renege", Action::Renege},
      {"deposit", Action::DepositPrincipal},
      {"default", Action::Default},
      {"exercise", Action::Exercise},
      {"cancel", Action::Cancel},
      {"let_expire", Action::LetExpire},
      {"cheat", Action::Cheat},
      {"breach_remedy", Action::PublishBreachRemedy},
      {"refund", Action::PublishRefund},
      {"claim", Action::Claim},
  };
  const auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string MoveOption::to_string() const {
  if (action == Action::Wait) return "wait";
  std::ostringstream os;
  os << action_name(action) << '@' << at;
  return os.str();
}

MoveOption HonestStrategy::decide(const DecisionPoint& dp) {
  if (dp.legal.empty()) throw std::logic_error("decision point with no legal moves: " + dp.key);
  return dp.legal.front();
}

void ScriptedStrategy::script(const std::string& key, Action action,
                              std::optional<TimePoint> at) {
  entries_[key] = {action, at};
}

MoveOption ScriptedStrategy::decide(const DecisionPoint& dp) {
  const auto it = entries_.find(dp.key);
  if (it == entries_.end()) return dp.legal.front();
  const auto [action, at] = it->second;
  if (at.has_value()) {
    for (const auto& opt : dp.legal) {
      if (opt.action == action && opt.at == *at) return opt;
    }
    // Not one of the sampled boundary moves; still legal if the action
    // matches some option and the time is not in the past.
    for (const auto& opt : dp.legal) {
      if (opt.action == action && *at >= dp.at) return MoveOption{action, *at};
    }
    throw ScenarioError("strategy for '" + dp.key + "': action " +
                        std::string(action_name(action)) + "@" + std::to_string(*at) +
                        " is not legal here");
  }
  for (const auto& opt : dp.legal) {
    if (opt.action == action) return opt;
  }
  throw ScenarioError("strategy for '" + dp.key + "': action " +
                      std::string(action_name(action)) + " is not legal here");
}

MoveOption EnumeratingStrategy::decide(const DecisionPoint& dp) {
  const auto it = profile_->find(dp.key);
  if (it != profile_->end()) {
    ++used_;
    return it->second;
  }
  if (used_ >= depth_limit_) return MoveOption{Action::Wait, dp.at};  // passive beyond depth
  throw NeedChoice{dp};
}

Strategy& StrategyTable::get(const PartyId& party) const {
  const auto it = by_party.find(party);
  if (it == by_party.end()) throw std::out_of_range("no strategy for party: " + party);
  return *it->second;
}

StrategyTable StrategyTable::all_honest(const std::vector<PartyId>& parties) {
  StrategyTable t;
  for (const auto& p : parties) t.by_party[p] = std::make_shared<HonestStrategy>();
  return t;
}

std::string profile_to_string(const StrategyProfile& p) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, move] : p) {
    if (!first) os << ' ';
    first = false;
    os << key << '=' << move.to_string();
  }
  return os.str();
}

}  // namespace swapsim
