#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "swapsim/engine.hpp"
#include "swapsim/price.hpp"

namespace swapsim {

// A runnable protocol configuration: `execute` builds a fresh world, runs
// one deterministic session under the given strategies, and returns the
// result. Replaying with extended profiles is how the enumerator forks.
struct ProtocolRun {
  std::vector<PartyId> parties;
  std::function<RunResult(const StrategyTable&)> execute;
};

struct OutcomeRecord {
  StrategyProfile profile;
  Outcome outcome;
  Trace trace;
};

struct EnumerationResult {
  std::vector<OutcomeRecord> records;
  std::size_t decision_points_seen = 0;
};

/// Exhaustive search over the decision trees of every non-honest party.
/// Honest parties follow the protocol; adversaries range over all legal
/// moves including boundary timings. Adversary decisions beyond `depth`
/// resolve to the passive move, so depth 0 yields only the no-action run.
/// `pinned` forces specific actions at matching keys (taking the first legal
/// move with that action) without consuming depth.
EnumerationResult enumerate_strategies(const ProtocolRun& run, const std::set<PartyId>& honest,
                                       int depth, const std::map<std::string, Action>& pinned = {});

// Full decision tree with outcomes at the leaves, for backward induction.
struct GameNode {
  bool is_leaf = false;
  Outcome outcome;          // leaves
  StrategyProfile profile;  // leaves
  DecisionPoint dp;         // internal nodes
  std::vector<std::pair<MoveOption, std::unique_ptr<GameNode>>> children;
};

std::unique_ptr<GameNode> build_game_tree(const ProtocolRun& run, const std::set<PartyId>& honest,
                                          int depth,
                                          const std::map<std::string, Action>& pinned = {});

/// Party valuations of an outcome (exact, e.g. ACoin value at a price ratio).
using Valuation = std::function<Rational(const Outcome&, const PartyId&)>;

struct InducedValue {
  std::map<PartyId, Rational> value;
  const GameNode* leaf = nullptr;
};

/// Subgame-perfect values: at each node the deciding party maximizes its own
/// valuation; ties keep the earlier-listed (protocol-following) move.
InducedValue induce_values(const GameNode& node, const Valuation& value_of);

/// Best achievable value for `party` among subtrees reached via a specific
/// action at a named decision point, with everyone playing optimally below.
/// Returns nothing if the decision point or action never occurs.
std::optional<Rational> best_value_via(const GameNode& node, const Valuation& value_of,
                                       const PartyId& party, const std::string& dp_key,
                                       Action action);

struct Violation {
  std::string profile;
  std::string outcome_summary;
  std::string reason;
};

struct SafetyReport {
  std::size_t outcomes_checked = 0;
  std::vector<Violation> violations;

  bool pass() const { return violations.empty(); }
  std::string to_string() const;
};

/// Guarantee for one honest party: returns empty string when satisfied,
/// otherwise the reason text.
using Guarantee = std::function<std::string(const OutcomeRecord&)>;

SafetyReport check_safety(const EnumerationResult& outcomes, const Guarantee& guarantee);

// Baseline worst-case guarantees, written as all-outcomes predicates.
/// Honest swap party ends holding the full value of one of the two assets.
Guarantee swap_guarantee(const SwapTerms& terms, const PartyId& honest);
/// Swaption: the holder never nets worse than the premium unless the full
/// exchange happened; the writer never loses principal without receiving the
/// counter-asset, and loses at most margin otherwise.
Guarantee swaption_guarantee(const SwaptionTerms& terms, const PartyId& honest);
/// Punishment completeness: whenever both the exercise and cancel secrets
/// were revealed before expiry, the writer holds both principals.
Guarantee cheat_capture_guarantee(const SwaptionTerms& terms);

}  // namespace swapsim
