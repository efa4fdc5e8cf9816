#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "swapsim/econ.hpp"
#include "swapsim/enumerate.hpp"

using namespace swapsim;

namespace {

ProtocolRun swap_run(const SwapTerms& t) {
  return ProtocolRun{{t.alice, t.bob}, [t](const StrategyTable& table) {
                       World w;
                       w.add_chain(t.a_chain);
                       w.add_chain(t.b_chain);
                       seed_for_swap(w, t);
                       return run_atomic_swap(w, t, table);
                     }};
}

ProtocolRun swaption_run(const SwaptionTerms& t) {
  return ProtocolRun{{t.alice, t.bob}, [t](const StrategyTable& table) {
                       World w;
                       w.add_chain(t.a_chain);
                       w.add_chain(t.b_chain);
                       seed_for_swaption(w, t);
                       Session s(w, table, {t.alice, t.bob});
                       install_swaption(s, t);
                       s.snapshot_initial();
                       s.run_to_horizon();
                       return s.result();
                     }};
}

SwaptionTerms margined_terms() {
  SwaptionTerms t;
  t.margined = true;
  t.m_a = kCoin / 5;
  t.m_b = kCoin / 5;
  t.M = t.E - 2;
  return t;
}

constexpr int kDepth = 32;

}  // namespace

TEST_CASE("depth 0 yields only the passive outcome") {
  SwapTerms t;
  const auto result = enumerate_strategies(swap_run(t), {t.bob}, 0);
  REQUIRE(result.records.size() == 1);
  const auto& o = result.records[0].outcome;
  CHECK(o.delta(t.alice, t.a_chain) == 0);
  CHECK(o.delta(t.bob, t.b_chain) == 0);
  CHECK(result.records[0].profile.empty());
}

TEST_CASE("negative depth is an error") {
  SwapTerms t;
  CHECK_THROWS_AS(enumerate_strategies(swap_run(t), {t.bob}, -1), ScenarioError);
}

TEST_CASE("swap atomicity holds against each adversary in turn") {
  SwapTerms t;
  for (const PartyId honest : {t.alice, t.bob}) {
    const auto result = enumerate_strategies(swap_run(t), {honest}, kDepth);
    CAPTURE(honest);
    CHECK(result.records.size() > 4);  // the adversary really has choices
    const auto report = check_safety(result, swap_guarantee(t, honest));
    INFO(report.to_string());
    CHECK(report.pass());
  }
}

TEST_CASE("mis-ordered swap expiries are caught by the enumerator") {
  SwapTerms broken;
  broken.expiry_a = broken.T + 1;
  broken.expiry_b = broken.T + 2;  // BCoin side now outlives the ACoin side
  const auto result = enumerate_strategies(swap_run(broken), {broken.bob}, kDepth);
  const auto report = check_safety(result, swap_guarantee(broken, broken.bob));
  CHECK_FALSE(report.pass());
  // The winning deviation refunds ACoin first, then claims BCoin late.
  bool found_theft = false;
  for (const auto& v : report.violations) {
    if (v.reason.find("holds neither full asset") != std::string::npos) found_theft = true;
  }
  CHECK(found_theft);
}

TEST_CASE("plain swaption guarantees hold for each honest party") {
  SwaptionTerms t;
  for (const PartyId honest : {t.alice, t.bob}) {
    const auto result = enumerate_strategies(swaption_run(t), {honest}, kDepth);
    CAPTURE(honest);
    const auto report = check_safety(result, swaption_guarantee(t, honest));
    INFO(report.to_string());
    CHECK(report.pass());
  }
}

TEST_CASE("cancellable swaption: guarantees plus full cheat capture") {
  SwaptionTerms t;
  t.cancellable = true;
  for (const PartyId honest : {t.alice, t.bob}) {
    const auto result = enumerate_strategies(swaption_run(t), {honest}, kDepth);
    CAPTURE(honest);
    CHECK(check_safety(result, swaption_guarantee(t, honest)).pass());
    if (honest == t.bob) {
      const auto capture = check_safety(result, cheat_capture_guarantee(t));
      INFO(capture.to_string());
      CHECK(capture.pass());
      // At least one explored strategy actually cheats.
      bool cheat_seen = false;
      for (const auto& rec : result.records) {
        for (const auto& [key, mo] : rec.profile) {
          if (mo.action == Action::Cheat) cheat_seen = true;
        }
      }
      CHECK(cheat_seen);
    }
  }
}

TEST_CASE("margined swaption guarantees hold for each honest party") {
  const auto t = margined_terms();
  for (const PartyId honest : {t.alice, t.bob}) {
    const auto result = enumerate_strategies(swaption_run(t), {honest}, kDepth);
    CAPTURE(honest);
    CHECK(result.records.size() > 8);
    const auto report = check_safety(result, swaption_guarantee(t, honest));
    INFO(report.to_string());
    CHECK(report.pass());
  }
}

TEST_CASE("swapped margin expiries break the writer guarantee") {
  auto t = margined_terms();
  t.margin_expiry_a = t.M + 1;
  t.margin_expiry_b = t.M;  // writer must now deposit first
  const auto result = enumerate_strategies(swaption_run(t), {t.bob}, kDepth);
  const auto report = check_safety(result, swaption_guarantee(t, t.bob));
  CHECK_FALSE(report.pass());
}

TEST_CASE("default ordering: the writer never gains the holder margin for free") {
  // After the holder deposits, no outcome both forfeits her margin to the
  // writer and leaves the writer unexposed.
  const auto t = margined_terms();
  for (const PartyId honest : {t.alice, t.bob}) {
    const auto result = enumerate_strategies(swaption_run(t), {honest}, kDepth);
    for (const auto& rec : result.records) {
      if (rec.outcome.dispositions.count("margin.alice") &&
          rec.outcome.dispositions.at("margin.alice") == "deposited") {
        CHECK(rec.outcome.delta(t.bob, t.a_chain) != t.premium + t.m_a);
      }
    }
  }
}

TEST_CASE("game tree backward induction matches the rational run") {
  const auto t = margined_terms();
  const std::map<std::string, Action> pinned = {{"fund.alice", Action::DepositPrincipal},
                                                {"fund.bob", Action::DepositPrincipal},
                                                {"accept", Action::Accept},
                                                {"claim.premium", Action::Claim}};
  for (const Rational r : {Rational(4, 5), Rational(11, 10), Rational(3, 2)}) {
    const auto tree = build_game_tree(swaption_run(t), {}, kDepth, pinned);
    const Valuation value_at_r = [&](const Outcome& o, const PartyId& p) {
      return Rational(o.delta(p, t.a_chain)) + Rational(o.delta(p, t.b_chain)) * r;
    };
    const auto induced = induce_values(*tree, value_at_r);
    REQUIRE(induced.value.count(t.alice));
    // Option value gross of premium equals the closed-form intrinsic value.
    const Rational game_value = induced.value.at(t.alice) + t.premium;
    CHECK(game_value == intrinsic_value_exact(t, r, Numeraire::ACoin));
  }
}

TEST_CASE("equal-ratio margins: defaulting never strictly helps the holder") {
  const auto t = margined_terms();  // m_a/p_a == m_b/p_b == 1/5
  const std::map<std::string, Action> pinned = {{"fund.alice", Action::DepositPrincipal},
                                                {"fund.bob", Action::DepositPrincipal},
                                                {"accept", Action::Accept},
                                                {"claim.premium", Action::Claim}};
  const auto tree = build_game_tree(swaption_run(t), {}, kDepth, pinned);
  for (const Rational r : {Rational(1, 2), Rational(4, 5), Rational(1), Rational(5, 4),
                           Rational(2)}) {
    const Valuation value_at_r = [&](const Outcome& o, const PartyId& p) {
      return Rational(o.delta(p, t.a_chain)) + Rational(o.delta(p, t.b_chain)) * r;
    };
    const auto best_deposit =
        best_value_via(*tree, value_at_r, t.alice, "deposit.alice", Action::DepositPrincipal);
    const auto best_default =
        best_value_via(*tree, value_at_r, t.alice, "deposit.alice", Action::Default);
    REQUIRE(best_deposit.has_value());
    REQUIRE(best_default.has_value());
    CHECK(*best_default <= *best_deposit);
  }
}

TEST_CASE("unequal margin ratios create a holder default incentive") {
  auto t = margined_terms();
  t.m_a = kCoin / 100;  // token holder margin, fat writer margin
  const std::map<std::string, Action> pinned = {{"fund.alice", Action::DepositPrincipal},
                                                {"fund.bob", Action::DepositPrincipal},
                                                {"accept", Action::Accept},
                                                {"claim.premium", Action::Claim}};
  const auto tree = build_game_tree(swaption_run(t), {}, kDepth, pinned);
  const Rational r(1, 2);  // deep out of the money
  const Valuation value_at_r = [&](const Outcome& o, const PartyId& p) {
    return Rational(o.delta(p, t.a_chain)) + Rational(o.delta(p, t.b_chain)) * r;
  };
  const auto best_deposit =
      best_value_via(*tree, value_at_r, t.alice, "deposit.alice", Action::DepositPrincipal);
  const auto best_default =
      best_value_via(*tree, value_at_r, t.alice, "deposit.alice", Action::Default);
  REQUIRE(best_deposit.has_value());
  REQUIRE(best_default.has_value());
  CHECK(*best_default > *best_deposit);
}
