#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "swapsim/engine.hpp"
#include "swapsim/sha256.hpp"

using namespace swapsim;

namespace {

constexpr Amount kTenth = kCoin / 10;

World fresh_world(const SwaptionTerms& t) {
  World w;
  w.add_chain(t.a_chain);
  w.add_chain(t.b_chain);
  seed_for_swaption(w, t);
  return w;
}

StrategyTable with_script(const SwaptionTerms& t, const PartyId& party,
                          std::initializer_list<std::pair<std::string, Action>> entries) {
  StrategyTable table = StrategyTable::all_honest({t.alice, t.bob});
  auto s = std::make_shared<ScriptedStrategy>();
  for (const auto& [key, action] : entries) s->script(key, action);
  table.by_party[party] = s;
  return table;
}

SwaptionTerms plain_terms() {
  SwaptionTerms t;  // premium 0.1, principals 1/1, T=10, E=100
  return t;
}

SwaptionTerms cancellable_terms() {
  SwaptionTerms t = plain_terms();
  t.cancellable = true;
  return t;
}

SwaptionTerms margined_terms() {
  SwaptionTerms t = plain_terms();
  t.margined = true;
  t.m_a = 2 * kTenth;
  t.m_b = 2 * kTenth;
  t.M = t.E - 2;
  return t;
}

struct Balances {
  Amount alice_a, alice_b, bob_a, bob_b;
};

void check_balances(const RunResult& rr, const Balances& want) {
  CHECK(rr.outcome.final_balance("alice", "ACoin") == want.alice_a);
  CHECK(rr.outcome.final_balance("alice", "BCoin") == want.alice_b);
  CHECK(rr.outcome.final_balance("bob", "ACoin") == want.bob_a);
  CHECK(rr.outcome.final_balance("bob", "BCoin") == want.bob_b);
}

}  // namespace

TEST_CASE("plain swaption: accept then exercise") {
  const auto t = plain_terms();
  World w = fresh_world(t);
  const auto rr = run_swaption(w, t, StrategyTable::all_honest({t.alice, t.bob}));
  check_balances(rr, {0, kCoin, 11 * kTenth, 0});
  CHECK(rr.outcome.dispositions.at("swaption") == "exercised");
}

TEST_CASE("plain swaption: accept then let expire") {
  const auto t = plain_terms();
  World w = fresh_world(t);
  const auto rr =
      run_swaption(w, t, with_script(t, t.alice, {{"exercise", Action::LetExpire}}));
  check_balances(rr, {kCoin, 0, kTenth, kCoin});
  CHECK(rr.outcome.dispositions.at("swaption") == "let_expire");
  // Expirations land exactly at E and E+1.
  TimePoint exp_b = 0, exp_a = 0;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:expiration_b", 0) == 0) exp_b = e.t;
    if (e.event.rfind("publish:expiration_a", 0) == 0) exp_a = e.t;
  }
  CHECK(exp_b == t.E);
  CHECK(exp_a == t.E + 1);
}

TEST_CASE("plain swaption: renege leaves everyone whole") {
  const auto t = plain_terms();
  World w = fresh_world(t);
  const auto rr = run_swaption(w, t, with_script(t, t.alice, {{"accept", Action::Renege}}));
  check_balances(rr, {11 * kTenth, 0, 0, kCoin});
}

TEST_CASE("plain swaption: writer can withhold the premium claim only at his own cost") {
  const auto t = plain_terms();
  World w = fresh_world(t);
  const auto rr =
      run_swaption(w, t, with_script(t, t.bob, {{"claim.premium", Action::Wait}}));
  // Alice refunds her funding contract at T+1 and still exercises the BCoin
  // side she funded with her reveal.
  CHECK(rr.outcome.final_balance("alice", "ACoin") == 11 * kTenth);
  CHECK(rr.outcome.final_balance("alice", "BCoin") == kCoin);
  CHECK(rr.outcome.final_balance("bob", "ACoin") == 0);
  CHECK(rr.outcome.final_balance("bob", "BCoin") == 0);
}

TEST_CASE("swaption setup refuses to run without pre-signatures") {
  const auto t = plain_terms();
  World w = fresh_world(t);
  Session s(w, StrategyTable::all_honest({t.alice, t.bob}), {t.alice, t.bob});
  SwaptionInstallOpts opts;
  opts.with_presignatures = false;
  CHECK_THROWS_AS(install_swaption_ex(s, t, opts), ScenarioError);
}

TEST_CASE("cancellable swaption: honest exercise routes through the anti-cheat delay") {
  const auto t = cancellable_terms();
  World w = fresh_world(t);
  const auto rr =
      run_swaption_with_cancellation(w, t, StrategyTable::all_honest({t.alice, t.bob}));
  check_balances(rr, {0, kCoin, 11 * kTenth, 0});
  // Delivery is one timestep after the exercise confirmation.
  TimePoint exercise_t = 0, delivery_t = 0;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:exercise_b", 0) == 0) exercise_t = e.t;
    if (e.event.rfind("publish:delivery_b", 0) == 0) delivery_t = e.t;
  }
  CHECK(delivery_t == exercise_t + 1);
}

TEST_CASE("cancellable swaption: early cancel returns both principals") {
  const auto t = cancellable_terms();
  World w = fresh_world(t);
  const auto rr = run_swaption_with_cancellation(
      w, t, with_script(t, t.alice, {{"exercise", Action::Cancel}}));
  check_balances(rr, {kCoin, 0, kTenth, kCoin});
  CHECK(rr.outcome.dispositions.at("swaption") == "cancelled");
  // Bob reclaims with the cancel secret immediately, long before E.
  TimePoint reclaim_t = t.E;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:cancel_expiration_b", 0) == 0) reclaim_t = e.t;
  }
  CHECK(reclaim_t < t.T);
}

TEST_CASE("cancellable swaption: let expire, then recover by revealing the cancel secret") {
  const auto t = cancellable_terms();
  World w = fresh_world(t);
  const auto rr = run_swaption_with_cancellation(
      w, t, with_script(t, t.alice, {{"exercise", Action::LetExpire}}));
  check_balances(rr, {kCoin, 0, kTenth, kCoin});
  TimePoint reclaim_t = 0;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:cancel_expiration_b", 0) == 0) reclaim_t = e.t;
  }
  CHECK(reclaim_t == t.E);
}

TEST_CASE("cancellable swaption: cheating forfeits both principals to the writer") {
  const auto t = cancellable_terms();
  World w = fresh_world(t);
  const auto rr = run_swaption_with_cancellation(
      w, t, with_script(t, t.alice, {{"exercise", Action::Cheat}}));
  check_balances(rr, {0, 0, 11 * kTenth, kCoin});
  CHECK(rr.outcome.dispositions.at("acoin_principal") == "punished");
  CHECK(rr.outcome.dispositions.at("bcoin_principal") == "punished");
}

TEST_CASE("margined swaption: both deposit, exercise matches the unmargined terminal state") {
  const auto t = margined_terms();
  World w = fresh_world(t);
  const auto rr =
      run_margin_swaption(w, t, StrategyTable::all_honest({t.alice, t.bob}), PricePath::constant(1));
  check_balances(rr, {0, kCoin, 11 * kTenth, 0});
  CHECK(rr.outcome.dispositions.at("margin.alice") == "deposited");
  CHECK(rr.outcome.dispositions.at("margin.bob") == "deposited");
}

TEST_CASE("margined swaption: holder default forfeits the margin to the writer") {
  const auto t = margined_terms();
  World w = fresh_world(t);
  const auto rr = run_margin_swaption(
      w, t, with_script(t, t.alice, {{"deposit.alice", Action::Default}}),
      PricePath::constant(1));
  // Bob takes Alice's 0.2 ACoin at M; his own margin expires to Alice at M+1.
  check_balances(rr, {8 * kTenth, 2 * kTenth, 3 * kTenth, 8 * kTenth});
  CHECK(rr.outcome.dispositions.at("margin.alice") == "forfeited");
  TimePoint default_a_t = 0;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:default_a", 0) == 0) default_a_t = e.t;
  }
  CHECK(default_a_t == t.margin_a_expiry());
}

TEST_CASE("margined swaption: writer default pays the holder margin, principal recovered") {
  const auto t = margined_terms();
  World w = fresh_world(t);
  const auto rr = run_margin_swaption(
      w, t, with_script(t, t.bob, {{"deposit.bob", Action::Default}}), PricePath::constant(1));
  check_balances(rr, {kCoin, 2 * kTenth, kTenth, 8 * kTenth});
  CHECK(rr.outcome.dispositions.at("margin.bob") == "forfeited");
  TimePoint default_b_t = 0, expiration_a_t = 0;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:default_b", 0) == 0) default_b_t = e.t;
    if (e.event.rfind("publish:expiration_a", 0) == 0) expiration_a_t = e.t;
  }
  CHECK(default_b_t == t.margin_b_expiry());
  CHECK(expiration_a_t == t.E + 1);
}

TEST_CASE("margined swaption: deposit at the margin boundary still beats the default claim") {
  auto t = margined_terms();
  World w = fresh_world(t);
  StrategyTable table = StrategyTable::all_honest({t.alice, t.bob});
  auto s = std::make_shared<ScriptedStrategy>();
  s->script("deposit.alice", Action::DepositPrincipal, t.margin_a_expiry());
  table.by_party[t.alice] = s;
  const auto rr = run_margin_swaption(w, t, table, PricePath::constant(1));
  CHECK(rr.outcome.dispositions.at("margin.alice") == "deposited");
  check_balances(rr, {0, kCoin, 11 * kTenth, 0});
}

TEST_CASE("margined swaption requires valid margin bounds") {
  auto t = margined_terms();
  t.m_b = t.p_b;  // margin must be strictly inside (0, principal)
  World w;
  w.add_chain(t.a_chain);
  w.add_chain(t.b_chain);
  CHECK_THROWS_AS(run_margin_swaption(w, t, StrategyTable::all_honest({t.alice, t.bob}),
                                      PricePath::constant(1)),
                  ScenarioError);
}

TEST_CASE("terms validation rejects misordered expiries") {
  auto t = margined_terms();
  t.M = t.E;
  World w = fresh_world(margined_terms());
  CHECK_THROWS_WITH_AS(run_margin_swaption(w, t, StrategyTable::all_honest({t.alice, t.bob}),
                                           PricePath::constant(1)),
                       "margin expiry must precede swaption expiry", ScenarioError);
}
