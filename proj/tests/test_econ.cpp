#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "swapsim/econ.hpp"
#include "swapsim/enumerate.hpp"

using namespace swapsim;

namespace {

SwaptionTerms fixed_margin_terms() {
  SwaptionTerms t;
  t.margined = true;
  t.m_a = kCoin / 5;
  t.m_b = kCoin / 5;
  t.M = t.E - 2;
  return t;
}

// Independent oracle: the 2x2 terminal game at expiry, from first
// principles. The writer honors or defaults; honoring, the holder exercises
// only in the money. Values in a_chain units, premium excluded.
Rational game_matrix_value(const SwaptionTerms& t, const Rational& r) {
  const Rational gain = Rational(t.p_b) * r - Rational(t.p_a);
  const Rational exercise_or_not = gain > 0 ? gain : Rational(0);
  const Rational writer_honor_cost = exercise_or_not;
  const Rational writer_default_cost = Rational(t.m_b) * r;
  const bool honors = writer_honor_cost <= writer_default_cost;
  return honors ? exercise_or_not : Rational(t.m_b) * r;
}

}  // namespace

TEST_CASE("intrinsic value matches the independent game matrix at the anchor ratios") {
  const auto t = fixed_margin_terms();
  struct Row {
    Rational r;
    Amount want;
  };
  // Frozen from the game-matrix oracle: out of the money, honored exercise,
  // and margin-capped default.
  const std::vector<Row> rows = {
      {Rational(4, 5), 0},
      {Rational(11, 10), kCoin / 10},
      {Rational(3, 2), 3 * kCoin / 10},
  };
  for (const auto& row : rows) {
    CAPTURE(format_ratio(row.r));
    CHECK(intrinsic_value_exact(t, row.r, Numeraire::ACoin) == game_matrix_value(t, row.r));
    CHECK(intrinsic_value(t, row.r, Numeraire::ACoin) == row.want);
  }
}

TEST_CASE("intrinsic value agrees with the game matrix across a fine grid") {
  const auto t = fixed_margin_terms();
  for (const auto& r : make_grid(Rational(1, 2), Rational(2), Rational(3, 400))) {
    CHECK(intrinsic_value_exact(t, r, Numeraire::ACoin) == game_matrix_value(t, r));
  }
}

TEST_CASE("BCoin numeraire divides by the ratio") {
  const auto t = fixed_margin_terms();
  const Rational r(11, 10);
  CHECK(intrinsic_value_exact(t, r, Numeraire::BCoin) ==
        intrinsic_value_exact(t, r, Numeraire::ACoin) / r);
}

TEST_CASE("intrinsic value rejects nonpositive ratios") {
  const auto t = fixed_margin_terms();
  CHECK_THROWS(intrinsic_value_exact(t, Rational(0), Numeraire::ACoin));
  CHECK_THROWS(intrinsic_value_exact(t, Rational(-1), Numeraire::ACoin));
}

TEST_CASE("default decision boundaries") {
  const auto t = fixed_margin_terms();
  // Exact boundary p_b*r - p_a == m_b*r at r = p_a/(p_b - m_b) = 5/4: honor.
  CHECK(default_decision(t, Rational(5, 4), t.bob) == DefaultChoice::Honor);
  CHECK(default_decision(t, Rational(5, 4) + Rational(1, 1000000), t.bob) ==
        DefaultChoice::Default);
  CHECK(default_decision(t, Rational(2), t.bob) == DefaultChoice::Default);
  CHECK(default_decision(t, Rational(1), t.bob) == DefaultChoice::Honor);
  // Equal ratio: the holder honors everywhere on the grid.
  for (const auto& r : make_grid(Rational(1, 2), Rational(2), Rational(1, 100))) {
    CHECK(default_decision(t, r, t.alice) == DefaultChoice::Honor);
  }
}

TEST_CASE("payoff curve shape in the call numeraire") {
  const auto t = fixed_margin_terms();
  // Step 1/80 puts both kinks (1 and 5/4) exactly on grid points, so each
  // shows up as exactly one discrete slope change.
  const auto grid = make_grid(Rational(1, 2), Rational(2), Rational(1, 80));
  const auto curve = payoff_curve(t, grid, Numeraire::ACoin);
  REQUIRE(curve.size() == grid.size());

  const Rational k1 = Rational(t.p_a) / Rational(t.p_b);
  const Rational k2 = Rational(t.p_a) / Rational(t.p_b - t.m_b);

  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0) CHECK(curve[i].value >= curve[i - 1].value);     // nondecreasing
    CHECK(curve[i].value <= Rational(t.m_b) * curve[i].r);      // margin cap
    if (curve[i].r <= k1) CHECK(curve[i].value == 0);           // flat out of the money
  }

  std::vector<Rational> kink_locations;
  for (std::size_t i = 2; i < curve.size(); ++i) {
    const Rational s1 = (curve[i - 1].value - curve[i - 2].value) /
                        (curve[i - 1].r - curve[i - 2].r);
    const Rational s2 = (curve[i].value - curve[i - 1].value) / (curve[i].r - curve[i - 1].r);
    if (s1 != s2) kink_locations.push_back(curve[i - 1].r);
  }
  REQUIRE(kink_locations.size() == 2);
  CHECK(kink_locations[0] == k1);
  CHECK(kink_locations[1] == k2);
}

TEST_CASE("payoff curve is a put in the BCoin numeraire") {
  const auto t = fixed_margin_terms();
  const auto grid = make_grid(Rational(1, 2), Rational(2), Rational(1, 80));
  const auto curve = payoff_curve(t, grid, Numeraire::BCoin);
  // Put shape: as the price of ACoin in BCoin (s = 1/r) rises, the payoff
  // does not rise. Iterating r ascending is s descending.
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].value >= curve[i - 1].value);
  }
  // Piecewise linear in s with exactly the two expected kinks.
  const Rational sk1 = Rational(t.p_b) / Rational(t.p_a);
  const Rational sk2 = Rational(t.p_b - t.m_b) / Rational(t.p_a);
  std::vector<Rational> kink_locations;
  for (std::size_t i = 2; i < curve.size(); ++i) {
    const Rational s0 = 1 / curve[i - 2].r, s1 = 1 / curve[i - 1].r, s2 = 1 / curve[i].r;
    const Rational d1 = (curve[i - 1].value - curve[i - 2].value) / (s1 - s0);
    const Rational d2 = (curve[i].value - curve[i - 1].value) / (s2 - s1);
    if (d1 != d2) kink_locations.push_back(s1);
  }
  REQUIRE(kink_locations.size() == 2);
  CHECK(kink_locations[0] == sk1);  // r ascends, so s descends through sk1 first
  CHECK(kink_locations[1] == sk2);
}

TEST_CASE("margin equal to principal degenerates to a vanilla call") {
  auto t = fixed_margin_terms();
  t.m_b = t.p_b;
  const auto grid = make_grid(Rational(1, 2), Rational(2), Rational(1, 100));
  int kinks = 0;
  const auto curve = payoff_curve(t, grid, Numeraire::ACoin);
  for (std::size_t i = 2; i < curve.size(); ++i) {
    const Rational s1 = (curve[i - 1].value - curve[i - 2].value) /
                        (curve[i - 1].r - curve[i - 2].r);
    const Rational s2 = (curve[i].value - curve[i - 1].value) / (curve[i].r - curve[i - 1].r);
    if (s1 != s2) ++kinks;
  }
  CHECK(kinks == 1);
}

TEST_CASE("decomposition reproduces the payoff curve exactly") {
  const auto t = fixed_margin_terms();
  const auto spread = decompose(t);
  CHECK(spread.k1 == Rational(1));
  CHECK(spread.k2 == Rational(5, 4));
  CHECK(spread.q1 == t.p_b);
  CHECK(spread.q2 == t.p_b - t.m_b);

  // Pointwise over a 1000-point grid, zero deviation.
  const auto grid = make_grid(Rational(1, 2), Rational(2), Rational(3, 2000));
  REQUIRE(grid.size() >= 1000);
  for (const auto& r : grid) {
    CHECK(spread.payoff_acoin(r) == intrinsic_value_exact(t, r, Numeraire::ACoin));
  }
}

TEST_CASE("decomposition edge margins") {
  auto zero = fixed_margin_terms();
  zero.m_b = 0;
  const auto s0 = decompose(zero);
  for (const auto& r : make_grid(Rational(1, 2), Rational(2), Rational(1, 50))) {
    CHECK(s0.payoff_acoin(r) == 0);
  }
  auto full = fixed_margin_terms();
  full.m_b = full.p_b;
  const auto s1 = decompose(full);
  CHECK(s1.q2 == 0);
  for (const auto& r : make_grid(Rational(1, 2), Rational(2), Rational(1, 50))) {
    CHECK(s1.payoff_acoin(r) == intrinsic_value_exact(full, r, Numeraire::ACoin));
  }
}

TEST_CASE("required margin: anchors and minimality") {
  const auto t = fixed_margin_terms();
  MarginPolicy policy;  // threshold 0, headroom 0

  CHECK(required_margin(t, Rational(1), policy) == 0);
  CHECK(required_margin(t, Rational(3, 2), policy) == 333334);  // ceil of 1/3 coin

  MarginPolicy generous;
  generous.threshold = kCoin;  // larger than any gap on the grid
  CHECK(required_margin(t, Rational(3, 2), generous) == 0);

  // Minimality: one base unit less violates the threshold.
  for (const auto& r : make_grid(Rational(101, 100), Rational(2), Rational(7, 100))) {
    const Amount m = required_margin(t, r, policy);
    const auto gain = [&](Amount margin) {
      const Rational g = Rational(t.p_b) * r - Rational(t.p_a) - Rational(margin) * r;
      return g > 0 ? g : Rational(0);
    };
    CHECK(gain(m) <= Rational(policy.threshold));
    if (m > 0) CHECK(gain(m - 1) > Rational(policy.threshold));
  }

  MarginPolicy padded;
  padded.headroom = 1000;
  CHECK(required_margin(t, Rational(3, 2), padded) == 333334 + 1000);
}

TEST_CASE("remark resizes the margin contract atomically") {
  const auto t = fixed_margin_terms();
  MarginPolicy policy;
  policy.remark_interval = 7;

  auto setup = [&]() {
    World w;
    w.add_chain("BCoin");
    w.seed("BCoin", "bob", kCoin);
    MarginContractSpec spec{"bob", "alice", t.m_b, t.p_b, 50};
    Transaction tx;
    for (const auto& [op, amount] : w.select_wallet("BCoin", "bob", spec.margin)) {
      tx.inputs.push_back(TxIn{op, {}});
    }
    tx.outputs.push_back(Output{spec.margin, margin_contract_predicate(spec)});
    tx.outputs.push_back(Output{kCoin - spec.margin, p_sig("bob")});
    for (auto& in : tx.inputs) in.witness.add_signature(sign("bob", tx, SigMode::CommitAll));
    REQUIRE(w.publish("BCoin", tx).ok());
    return std::make_pair(w, MarginContractHandle{"BCoin", OutPoint{txid(tx), 0}, spec});
  };

  SUBCASE("increase tops up from the depositor wallet") {
    auto [w, handle] = setup();
    w.now = 10;
    // At r = 1.5 the writer-side margin must grow to 333334.
    const auto res = remark(w, handle, Rational(3, 2), policy, t, true);
    CHECK(res.changed);
    CHECK(res.contract.spec.margin == 333334);
    CHECK(res.contract.spec.margin_expiry == 17);
    CHECK(w.balance("BCoin", "bob") == kCoin - 333334);
    CHECK(w.chain("BCoin").find_utxo(res.contract.outpoint).has_value());
  }

  SUBCASE("decrease releases margin back to the wallet") {
    auto [w, handle] = setup();
    const auto res = remark(w, handle, Rational(6, 5), policy, t, true);
    CHECK(res.changed);
    CHECK(res.contract.spec.margin == 166667);  // ceil((1.2-1)/1.2 coin)
    CHECK(w.balance("BCoin", "bob") == kCoin - 166667);
  }

  SUBCASE("silent counterparty leaves the contract unchanged") {
    auto [w, handle] = setup();
    const auto res = remark(w, handle, Rational(3, 2), policy, t, false);
    CHECK_FALSE(res.changed);
    CHECK(res.contract.outpoint == handle.outpoint);
    CHECK(w.chain("BCoin").find_utxo(handle.outpoint).has_value());
  }

  SUBCASE("insufficient wallet flags impending default") {
    auto [w, handle] = setup();
    // Drain the wallet: bob sends his change away.
    const auto picked = w.select_wallet("BCoin", "bob", kCoin - t.m_b);
    Transaction drain;
    for (const auto& [op, amount] : picked) drain.inputs.push_back(TxIn{op, {}});
    drain.outputs.push_back(Output{kCoin - t.m_b, p_sig("carol")});
    for (auto& in : drain.inputs) {
      in.witness.add_signature(sign("bob", drain, SigMode::CommitAll));
    }
    REQUIRE(w.publish("BCoin", drain).ok());
    const auto res = remark(w, handle, Rational(3, 2), policy, t, true);
    CHECK_FALSE(res.changed);
    CHECK(res.impending_default);
  }
}

TEST_CASE("futures: two mirrored legs net to the forward payoff") {
  SwaptionTerms leg1;
  leg1.margined = true;
  leg1.premium = 0;
  leg1.m_a = kCoin / 5;
  leg1.m_b = kCoin / 5;
  leg1.M = leg1.E - 2;

  struct Row {
    Rational r;
    Amount alice_net_acoin;  // value of alice's delta at r, exact
  };
  const std::vector<Row> rows = {
      {Rational(1), 0},
      {Rational(11, 10), kCoin / 10},
      {Rational(9, 10), -kCoin / 10},
  };
  for (const auto& row : rows) {
    CAPTURE(format_ratio(row.r));
    World w;
    w.add_chain(leg1.a_chain);
    w.add_chain(leg1.b_chain);
    seed_for_future(w, leg1);
    const auto table = rational_future_strategies(leg1, PricePath::constant(row.r));
    const auto rr = open_future(w, leg1, table, PricePath::constant(row.r));
    const Rational net =
        Rational(rr.outcome.delta(leg1.alice, leg1.a_chain)) +
        Rational(rr.outcome.delta(leg1.alice, leg1.b_chain)) * row.r;
    CHECK(net == Rational(row.alice_net_acoin));
    // Zero sum against the writer side.
    const Rational bob_net =
        Rational(rr.outcome.delta(leg1.bob, leg1.a_chain)) +
        Rational(rr.outcome.delta(leg1.bob, leg1.b_chain)) * row.r;
    CHECK(net + bob_net == 0);
  }
}
