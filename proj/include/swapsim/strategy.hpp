#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swapsim/types.hpp"

namespace swapsim {

enum class Action : std::uint8_t {
  Wait = 0,  // never act at this decision point
  Accept,
  Renege,
  DepositPrincipal,
  Default,
  Exercise,
  Cancel,
  LetExpire,
  Cheat,
  PublishBreachRemedy,
  PublishRefund,
  Claim,  // complete a counterparty-initiated exchange (e.g. spend with a scanned secret)
};

const char* action_name(Action a);
std::optional<Action> action_from_name(const std::string& name);

struct MoveOption {
  Action action = Action::Wait;
  TimePoint at = 0;

  bool operator==(const MoveOption&) const = default;
  std::string to_string() const;
};

// One decision diamond (or claim/refund opportunity) offered to a party.
// `legal` is ordered with the protocol-following move first; honest
// strategies take index 0.
struct DecisionPoint {
  std::string key;
  PartyId party;
  TimePoint at = 0;
  std::vector<MoveOption> legal;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual MoveOption decide(const DecisionPoint& dp) = 0;
};

/// Always picks the protocol-following move.
class HonestStrategy : public Strategy {
 public:
  MoveOption decide(const DecisionPoint& dp) override;
};

/// Scenario scripts: key -> action (optionally with an explicit time).
/// Unscripted decision points fall back to the honest move. A scripted
/// action with no time takes the earliest legal occurrence of that action.
class ScriptedStrategy : public Strategy {
 public:
  void script(const std::string& key, Action action,
              std::optional<TimePoint> at = std::nullopt);
  MoveOption decide(const DecisionPoint& dp) override;

  const std::map<std::string, std::pair<Action, std::optional<TimePoint>>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::pair<Action, std::optional<TimePoint>>> entries_;
};

/// Thrown by EnumeratingStrategy when a decision point is not in the
/// profile; the enumerator catches it and forks one branch per legal move.
struct NeedChoice {
  DecisionPoint dp;
};

using StrategyProfile = std::map<std::string, MoveOption>;

class EnumeratingStrategy : public Strategy {
 public:
  explicit EnumeratingStrategy(const StrategyProfile* profile, int depth_limit = 1 << 20)
      : profile_(profile), depth_limit_(depth_limit) {}
  MoveOption decide(const DecisionPoint& dp) override;

 private:
  const StrategyProfile* profile_;
  int depth_limit_;
  int used_ = 0;
};

struct StrategyTable {
  std::map<PartyId, std::shared_ptr<Strategy>> by_party;

  Strategy& get(const PartyId& party) const;
  static StrategyTable all_honest(const std::vector<PartyId>& parties);
};

std::string profile_to_string(const StrategyProfile& p);

}  // namespace swapsim
