#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "swapsim/engine.hpp"
#include "swapsim/sha256.hpp"

using namespace swapsim;

namespace {

World htlc_world(const HtlcPaymentTerms& t) {
  World w;
  w.add_chain(t.chain);
  w.seed(t.chain, t.payer, t.amount);
  return w;
}

StrategyTable scripted(const std::vector<PartyId>& parties,
                       const std::map<PartyId, std::map<std::string, std::pair<Action,
                           std::optional<TimePoint>>>>& scripts) {
  StrategyTable table = StrategyTable::all_honest(parties);
  for (const auto& [party, entries] : scripts) {
    auto s = std::make_shared<ScriptedStrategy>();
    for (const auto& [key, av] : entries) s->script(key, av.first, av.second);
    table.by_party[party] = s;
  }
  return table;
}

}  // namespace

TEST_CASE("htlc payment: accept path pays the payee and reveals the secret") {
  HtlcPaymentTerms t;
  World w = htlc_world(t);
  const auto table = StrategyTable::all_honest({t.payer, t.payee});
  const RunResult rr = run_htlc_payment(w, t, table);

  CHECK(rr.outcome.final_balance("alice", "BCoin") == t.amount);
  CHECK(rr.outcome.final_balance("bob", "BCoin") == 0);
  CHECK(rr.outcome.dispositions.at("htlc") == "paid");
  CHECK(w.visible_secrets().count(hash_secret(secret_from_label("A"))) == 1);
}

TEST_CASE("htlc payment: silent payee refunds the payer at T") {
  HtlcPaymentTerms t;
  World w = htlc_world(t);
  const auto table =
      scripted({t.payer, t.payee}, {{"alice", {{"accept", {Action::Renege, std::nullopt}}}}});
  const RunResult rr = run_htlc_payment(w, t, table);

  CHECK(rr.outcome.final_balance("bob", "BCoin") == t.amount);
  CHECK(rr.outcome.final_balance("alice", "BCoin") == 0);
  CHECK(rr.outcome.dispositions.at("htlc") == "refunded");
  // Refund confirmed exactly at T, never earlier.
  bool found = false;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:refund", 0) == 0) {
      CHECK(e.t == t.T);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("htlc payment: late accept at the boundary still wins over the refund") {
  HtlcPaymentTerms t;
  World w = htlc_world(t);
  // Payee reveals exactly at T; (time, chain, party) ordering puts alice's
  // swap before bob's refund on the same chain.
  const auto table =
      scripted({t.payer, t.payee}, {{"alice", {{"accept", {Action::Accept, t.T}}}}});
  const RunResult rr = run_htlc_payment(w, t, table);
  CHECK(rr.outcome.final_balance("alice", "BCoin") == t.amount);
  CHECK(rr.outcome.dispositions.at("htlc") == "paid");
}

TEST_CASE("htlc payment: accept after refund is a dead letter") {
  HtlcPaymentTerms t;
  World w = htlc_world(t);
  const auto table =
      scripted({t.payer, t.payee}, {{"alice", {{"accept", {Action::Accept, t.T + 1}}}}});
  const RunResult rr = run_htlc_payment(w, t, table);
  CHECK(rr.outcome.final_balance("bob", "BCoin") == t.amount);
  CHECK(rr.outcome.dispositions.at("htlc") == "refunded");
}

TEST_CASE("atomic swap: accept delivers both legs") {
  SwapTerms t;
  World w;
  w.add_chain(t.a_chain);
  w.add_chain(t.b_chain);
  seed_for_swap(w, t);
  const RunResult rr = run_atomic_swap(w, t, StrategyTable::all_honest({t.alice, t.bob}));

  CHECK(rr.outcome.final_balance("alice", "BCoin") == t.b_amount);
  CHECK(rr.outcome.final_balance("bob", "ACoin") == t.a_amount);
  CHECK(rr.outcome.final_balance("alice", "ACoin") == 0);
  CHECK(rr.outcome.final_balance("bob", "BCoin") == 0);
}

TEST_CASE("atomic swap: renege refunds both legs at T and T+1") {
  SwapTerms t;
  World w;
  w.add_chain(t.a_chain);
  w.add_chain(t.b_chain);
  seed_for_swap(w, t);
  const auto table =
      scripted({t.alice, t.bob}, {{"alice", {{"accept", {Action::Renege, std::nullopt}}}}});
  const RunResult rr = run_atomic_swap(w, t, table);

  CHECK(rr.outcome.final_balance("alice", "ACoin") == t.a_amount);
  CHECK(rr.outcome.final_balance("bob", "BCoin") == t.b_amount);
  TimePoint refund_b_time = 0, refund_a_time = 0;
  for (const auto& e : rr.trace.events) {
    if (e.event.rfind("publish:refund_b", 0) == 0) refund_b_time = e.t;
    if (e.event.rfind("publish:refund_a", 0) == 0) refund_a_time = e.t;
  }
  CHECK(refund_b_time == t.T);
  CHECK(refund_a_time == t.T + 1);
}

TEST_CASE("atomic swap: reveal at the BCoin boundary still completes atomically") {
  SwapTerms t;
  for (const TimePoint reveal_at : {t.T - 1, t.T}) {
    World w;
    w.add_chain(t.a_chain);
    w.add_chain(t.b_chain);
    seed_for_swap(w, t);
    const auto table =
        scripted({t.alice, t.bob}, {{"alice", {{"accept", {Action::Accept, reveal_at}}}}});
    const RunResult rr = run_atomic_swap(w, t, table);
    CAPTURE(reveal_at);
    CHECK(rr.outcome.final_balance("alice", "BCoin") == t.b_amount);
    CHECK(rr.outcome.final_balance("bob", "ACoin") == t.a_amount);
  }
}

TEST_CASE("atomic swap: reveal after the BCoin refund gets nothing") {
  SwapTerms t;
  World w;
  w.add_chain(t.a_chain);
  w.add_chain(t.b_chain);
  seed_for_swap(w, t);
  const auto table =
      scripted({t.alice, t.bob}, {{"alice", {{"accept", {Action::Accept, t.T + 1}}}}});
  const RunResult rr = run_atomic_swap(w, t, table);
  CHECK(rr.outcome.final_balance("alice", "ACoin") == t.a_amount);
  CHECK(rr.outcome.final_balance("bob", "BCoin") == t.b_amount);
}

TEST_CASE("trace determinism: identical runs produce identical traces") {
  SwapTerms t;
  auto run_once = [&]() {
    World w;
    w.add_chain(t.a_chain);
    w.add_chain(t.b_chain);
    seed_for_swap(w, t);
    return run_atomic_swap(w, t, StrategyTable::all_honest({t.alice, t.bob}));
  };
  const RunResult r1 = run_once();
  const RunResult r2 = run_once();
  CHECK(r1.trace.to_records() == r2.trace.to_records());
  CHECK(r1.outcome == r2.outcome);
  CHECK(!r1.trace.to_records().empty());
}

TEST_CASE("underfunded party cannot install the protocol") {
  SwapTerms t;
  World w;
  w.add_chain(t.a_chain);
  w.add_chain(t.b_chain);
  w.seed(t.a_chain, t.alice, t.a_amount / 2);  // alice short
  w.seed(t.b_chain, t.bob, t.b_amount);
  CHECK_THROWS_AS(run_atomic_swap(w, t, StrategyTable::all_honest({t.alice, t.bob})),
                  ScenarioError);
}
