#include "swapsim/enumerate.hpp"

#include <sstream>

namespace swapsim {

namespace {

/// Enumerating strategy that first honors pinned actions, then the profile,
/// then throws NeedChoice (or goes passive beyond the depth budget).
class ForkStrategy : public Strategy {
 public:
  ForkStrategy(const StrategyProfile* profile, const std::map<std::string, Action>* pinned,
               int depth)
      : profile_(profile), pinned_(pinned), depth_(depth) {}

  MoveOption decide(const DecisionPoint& dp) override {
    if (pinned_) {
      const auto it = pinned_->find(dp.key);
      if (it != pinned_->end()) {
        for (const auto& mo : dp.legal) {
          if (mo.action == it->second) return mo;
        }
        throw ScenarioError("pinned action not legal at " + dp.key);
      }
    }
    const auto it = profile_->find(dp.key);
    if (it != profile_->end()) {
      ++used_;
      return it->second;
    }
    if (used_ >= depth_) {
      // Passive fallback: last listed move when it is a do-nothing move,
      // otherwise plain Wait.
      const auto& last = dp.legal.back();
      switch (last.action) {
        case Action::Wait:
        case Action::Renege:
        case Action::LetExpire:
        case Action::Default:
          return last;
        default:
          return MoveOption{Action::Wait, dp.at};
      }
    }
    throw NeedChoice{dp};
  }

 private:
  const StrategyProfile* profile_;
  const std::map<std::string, Action>* pinned_;
  int depth_;
  int used_ = 0;
};

StrategyTable make_table(const ProtocolRun& run, const std::set<PartyId>& honest,
                         const StrategyProfile& profile,
                         const std::map<std::string, Action>& pinned, int depth) {
  StrategyTable table;
  for (const auto& p : run.parties) {
    if (honest.count(p)) {
      table.by_party[p] = std::make_shared<HonestStrategy>();
    } else {
      table.by_party[p] = std::make_shared<ForkStrategy>(&profile, &pinned, depth);
    }
  }
  return table;
}

}  // namespace

EnumerationResult enumerate_strategies(const ProtocolRun& run, const std::set<PartyId>& honest,
                                       int depth, const std::map<std::string, Action>& pinned) {
  if (depth < 0) throw ScenarioError("enumeration depth must be non-negative");
  EnumerationResult result;
  std::set<std::string> seen_dps;

  std::function<void(StrategyProfile&)> explore = [&](StrategyProfile& profile) {
    const auto table = make_table(run, honest, profile, pinned, depth);
    try {
      RunResult rr = run.execute(table);
      result.records.push_back(OutcomeRecord{profile, std::move(rr.outcome), std::move(rr.trace)});
    } catch (const NeedChoice& nc) {
      if (seen_dps.insert(nc.dp.key).second) ++result.decision_points_seen;
      for (const auto& mo : nc.dp.legal) {
        profile[nc.dp.key] = mo;
        explore(profile);
      }
      profile.erase(nc.dp.key);
    }
  };

  StrategyProfile profile;
  explore(profile);
  return result;
}

std::unique_ptr<GameNode> build_game_tree(const ProtocolRun& run, const std::set<PartyId>& honest,
                                          int depth,
                                          const std::map<std::string, Action>& pinned) {
  std::function<std::unique_ptr<GameNode>(StrategyProfile&)> explore =
      [&](StrategyProfile& profile) -> std::unique_ptr<GameNode> {
    const auto table = make_table(run, honest, profile, pinned, depth);
    auto node = std::make_unique<GameNode>();
    try {
      RunResult rr = run.execute(table);
      node->is_leaf = true;
      node->outcome = std::move(rr.outcome);
      node->profile = profile;
    } catch (const NeedChoice& nc) {
      node->dp = nc.dp;
      for (const auto& mo : nc.dp.legal) {
        profile[nc.dp.key] = mo;
        node->children.emplace_back(mo, explore(profile));
      }
      profile.erase(nc.dp.key);
    }
    return node;
  };

  StrategyProfile profile;
  return explore(profile);
}

InducedValue induce_values(const GameNode& node, const Valuation& value_of) {
  if (node.is_leaf) {
    InducedValue v;
    v.leaf = &node;
    std::set<PartyId> parties;
    for (const auto& [key, amount] : node.outcome.balances) parties.insert(key.first);
    for (const auto& p : parties) v.value[p] = value_of(node.outcome, p);
    return v;
  }
  InducedValue best;
  bool have = false;
  for (const auto& [mo, child] : node.children) {
    InducedValue v = induce_values(*child, value_of);
    if (!have) {
      best = std::move(v);
      have = true;
      continue;
    }
    const auto it_new = v.value.find(node.dp.party);
    const auto it_old = best.value.find(node.dp.party);
    if (it_new != v.value.end() && it_old != best.value.end() &&
        it_new->second > it_old->second) {
      best = std::move(v);
    }
  }
  return best;
}

std::optional<Rational> best_value_via(const GameNode& node, const Valuation& value_of,
                                       const PartyId& party, const std::string& dp_key,
                                       Action action) {
  if (node.is_leaf) return std::nullopt;
  if (node.dp.key == dp_key) {
    std::optional<Rational> best;
    for (const auto& [mo, child] : node.children) {
      if (mo.action != action) continue;
      const auto v = induce_values(*child, value_of);
      const auto it = v.value.find(party);
      if (it == v.value.end()) continue;
      if (!best || it->second > *best) best = it->second;
    }
    return best;
  }
  for (const auto& [mo, child] : node.children) {
    const auto v = best_value_via(*child, value_of, party, dp_key, action);
    if (v) return v;  // the decision point occurs on one path prefix only
  }
  return std::nullopt;
}

std::string SafetyReport::to_string() const {
  std::ostringstream os;
  os << violations.size() << " violations over " << outcomes_checked << " outcomes";
  for (const auto& v : violations) {
    os << "\n  VIOLATION: " << v.reason << "\n    profile: " << v.profile
       << "\n    outcome: " << v.outcome_summary;
  }
  return os.str();
}

SafetyReport check_safety(const EnumerationResult& outcomes, const Guarantee& guarantee) {
  SafetyReport report;
  report.outcomes_checked = outcomes.records.size();
  for (const auto& rec : outcomes.records) {
    const std::string reason = guarantee(rec);
    if (!reason.empty()) {
      report.violations.push_back(
          Violation{profile_to_string(rec.profile), rec.outcome.summary(), reason});
    }
  }
  return report;
}

namespace {

bool holds(const Outcome& o, const PartyId& p, const ChainId& a_chain, const ChainId& b_chain,
           Amount min_da, Amount min_db) {
  return o.delta(p, a_chain) >= min_da && o.delta(p, b_chain) >= min_db;
}

std::string describe(const PartyId& p, const Outcome& o, const ChainId& a_chain,
                     const ChainId& b_chain) {
  return p + " delta " + format_amount(o.delta(p, a_chain)) + " " + a_chain + ", " +
         format_amount(o.delta(p, b_chain)) + " " + b_chain;
}

}  // namespace

Guarantee swap_guarantee(const SwapTerms& terms, const PartyId& honest) {
  return [terms, honest](const OutcomeRecord& rec) -> std::string {
    const auto& o = rec.outcome;
    const auto& A = terms.a_chain;
    const auto& B = terms.b_chain;
    if (honest == terms.alice) {
      if (holds(o, honest, A, B, 0, 0)) return "";
      if (holds(o, honest, A, B, -terms.a_amount, terms.b_amount)) return "";
    } else {
      if (holds(o, honest, A, B, 0, 0)) return "";
      if (holds(o, honest, A, B, terms.a_amount, -terms.b_amount)) return "";
    }
    return "honest " + describe(honest, o, A, B) + ": holds neither full asset";
  };
}

Guarantee swaption_guarantee(const SwaptionTerms& terms, const PartyId& honest) {
  return [terms, honest](const OutcomeRecord& rec) -> std::string {
    const auto& o = rec.outcome;
    const auto& A = terms.a_chain;
    const auto& B = terms.b_chain;
    if (honest == terms.alice) {
      // Out or cancelled: loses at most the premium. Exercised: paid the
      // principal and the premium, holds the counter-asset. Writer default:
      // premium out, margin in.
      if (holds(o, honest, A, B, -terms.premium, 0)) return "";
      if (holds(o, honest, A, B, -terms.premium - terms.p_a, terms.p_b)) return "";
      return "honest holder " + describe(honest, o, A, B) + ": worse than premium loss";
    }
    // Writer: never pays principal without receiving the counter-principal
    // plus premium; holder default costs him at most his own margin.
    if (holds(o, honest, A, B, 0, 0)) return "";
    if (holds(o, honest, A, B, terms.premium + terms.p_a, -terms.p_b)) return "";
    if (terms.margined && holds(o, honest, A, B, terms.m_a, -terms.m_b)) return "";
    return "honest writer " + describe(honest, o, A, B) + ": uncompensated loss";
  };
}

Guarantee cheat_capture_guarantee(const SwaptionTerms& terms) {
  return [terms](const OutcomeRecord& rec) -> std::string {
    bool exercised_pre_e = false, cancelled_pre_e = false;
    for (const auto& e : rec.trace.events) {
      if (e.t >= terms.E) continue;
      if (e.event.rfind("publish:exercise_b", 0) == 0) exercised_pre_e = true;
      if (e.event.rfind("publish:cancel_a", 0) == 0) cancelled_pre_e = true;
    }
    if (!(exercised_pre_e && cancelled_pre_e)) return "";
    const auto& o = rec.outcome;
    if (o.delta(terms.bob, terms.a_chain) >= terms.p_a &&
        o.delta(terms.bob, terms.b_chain) >= 0) {
      return "";
    }
    return "cheat path without full capture: " +
           describe(terms.bob, o, terms.a_chain, terms.b_chain);
  };
}

}  // namespace swapsim
