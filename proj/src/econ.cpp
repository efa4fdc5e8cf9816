#include "swapsim/econ.hpp"

#include <algorithm>
#include <sstream>

#include "swapsim/sha256.hpp"

namespace swapsim {

void MarginPolicy::validate() const {
  if (threshold < 0 || headroom < 0) throw ScenarioError("margin policy amounts must be >= 0");
  if (remark_interval < 2) throw ScenarioError("remark interval must be >= 2");
}

Rational intrinsic_value_exact(const SwaptionTerms& terms, const Rational& r, Numeraire num) {
  if (r <= 0) throw std::invalid_argument("price ratio must be positive");
  const Rational exercise_gain = Rational(terms.p_b) * r - Rational(terms.p_a);
  const Rational margin_cap = Rational(terms.m_b) * r;
  Rational v = exercise_gain < margin_cap ? exercise_gain : margin_cap;
  if (v < 0) v = 0;
  if (num == Numeraire::BCoin) v /= r;
  return v;
}

Amount intrinsic_value(const SwaptionTerms& terms, const Rational& r, Numeraire num) {
  return floor_amount(intrinsic_value_exact(terms, r, num));
}

Rational chain_value(Amount x, const ChainId& chain, const ChainId& canon_a, const Rational& r) {
  return chain == canon_a ? Rational(x) : Rational(x) * r;
}

namespace {

/// Holder's terminal value (in canonical a_chain terms, premium excluded) of
/// depositing vs declaring default, assuming rational play afterwards.
DefaultChoice holder_choice(const SwaptionTerms& t, const Rational& r, const ChainId& canon_a) {
  const Rational gain = chain_value(t.p_b, t.b_chain, canon_a, r) -
                        chain_value(t.p_a, t.a_chain, canon_a, r);
  const Rational margin_b = chain_value(t.m_b, t.b_chain, canon_a, r);
  const Rational margin_a = chain_value(t.m_a, t.a_chain, canon_a, r);
  const bool writer_defaults = gain > margin_b;
  Rational v_deposit = writer_defaults ? margin_b : (gain > 0 ? gain : Rational(0));
  // Declared default forfeits the holder margin; the writer's margin then
  // expires to the holder, since the writer has no reason to top up a dead
  // contract with principal.
  const Rational v_default = margin_b - margin_a;
  return v_default > v_deposit ? DefaultChoice::Default : DefaultChoice::Honor;
}

DefaultChoice writer_choice(const SwaptionTerms& t, const Rational& r, const ChainId& canon_a) {
  const Rational gain = chain_value(t.p_b, t.b_chain, canon_a, r) -
                        chain_value(t.p_a, t.a_chain, canon_a, r);
  const Rational margin_b = chain_value(t.m_b, t.b_chain, canon_a, r);
  return gain > margin_b ? DefaultChoice::Default : DefaultChoice::Honor;
}

}  // namespace

DefaultChoice default_decision(const SwaptionTerms& terms, const Rational& r,
                               const PartyId& party) {
  if (!terms.margined) return DefaultChoice::Honor;
  if (party == terms.bob) return writer_choice(terms, r, terms.a_chain);
  if (party == terms.alice) return holder_choice(terms, r, terms.a_chain);
  throw std::invalid_argument("unknown party: " + party);
}

std::vector<Rational> make_grid(const Rational& lo, const Rational& hi, const Rational& step) {
  if (step <= 0 || hi < lo) throw ScenarioError("bad grid");
  std::vector<Rational> grid;
  for (Rational r = lo; r <= hi; r += step) grid.push_back(r);
  return grid;
}

std::vector<PayoffPoint> payoff_curve(const SwaptionTerms& terms,
                                      const std::vector<Rational>& grid, Numeraire num) {
  if (grid.empty()) throw ScenarioError("empty price grid");
  std::vector<PayoffPoint> out;
  out.reserve(grid.size());
  for (const auto& r : grid) {
    const Rational v = intrinsic_value_exact(terms, r, num);
    out.push_back(PayoffPoint{r, v, floor_amount(v)});
  }
  return out;
}

std::string payoff_table_text(const std::vector<PayoffPoint>& curve) {
  std::ostringstream os;
  for (const auto& p : curve) {
    os << format_ratio(p.r) << ' ' << format_ratio(p.value / kCoin) << '\n';
  }
  return os.str();
}

Rational CallSpread::payoff_acoin(const Rational& r) const {
  auto call = [&](Amount q, const Rational& k) {
    if (q == 0) return Rational(0);
    const Rational gain = Rational(q) * (r - k);
    return gain > 0 ? gain : Rational(0);
  };
  return call(q1, k1) - call(q2, k2);
}

CallSpread decompose(const SwaptionTerms& terms) {
  CallSpread s;
  s.k1 = Rational(terms.p_a) / Rational(terms.p_b);
  s.q1 = terms.p_b;
  s.q2 = terms.p_b - terms.m_b;
  s.k2 = s.q2 > 0 ? Rational(terms.p_a) / Rational(s.q2) : Rational(0);
  return s;
}

Amount required_margin(const SwaptionTerms& terms, const Rational& r,
                       const MarginPolicy& policy) {
  policy.validate();
  if (r <= 0) throw std::invalid_argument("price ratio must be positive");
  // Smallest m with p_b*r - p_a - m*r <= threshold.
  const Rational gap = Rational(terms.p_b) * r - Rational(terms.p_a) - Rational(policy.threshold);
  if (gap <= 0) return policy.headroom > 0 ? policy.headroom : 0;
  return ceil_amount(gap / r) + policy.headroom;
}

RemarkResult remark(World& world, const MarginContractHandle& contract, const Rational& r,
                    const MarginPolicy& policy, const SwaptionTerms& terms,
                    bool counterparty_consents) {
  RemarkResult res;
  res.contract = contract;
  if (!counterparty_consents) return res;
  if (!world.chain(contract.chain).find_utxo(contract.outpoint)) {
    throw ScenarioError("margin contract outpoint is gone");
  }

  const Amount new_margin = required_margin(terms, r, policy);
  if (new_margin == contract.spec.margin ||
      new_margin <= 0 || new_margin >= contract.spec.principal) {
    return res;  // nothing to change, or the new size is not representable
  }

  MarginContractSpec new_spec = contract.spec;
  new_spec.margin = new_margin;
  new_spec.margin_expiry = world.now + policy.remark_interval;

  Transaction tx;
  tx.inputs.push_back(TxIn{contract.outpoint, {}});
  if (new_margin > contract.spec.margin) {
    const Amount topup = new_margin - contract.spec.margin;
    const auto picked = world.select_wallet(contract.chain, contract.spec.depositor, topup);
    if (picked.empty()) {
      res.impending_default = true;
      return res;
    }
    Amount total = 0;
    for (const auto& [op, amount] : picked) {
      tx.inputs.push_back(TxIn{op, {}});
      total += amount;
    }
    tx.outputs.push_back(Output{new_margin, margin_contract_predicate(new_spec)});
    if (total > topup) tx.outputs.push_back(Output{total - topup, p_sig(new_spec.depositor)});
  } else {
    tx.outputs.push_back(Output{new_margin, margin_contract_predicate(new_spec)});
    tx.outputs.push_back(
        Output{contract.spec.margin - new_margin, p_sig(new_spec.depositor)});
  }
  Witness w;
  w.add_signature(sign(new_spec.depositor, tx, SigMode::CommitAll));
  w.add_signature(sign(new_spec.beneficiary, tx, SigMode::CommitAll));
  for (auto& in : tx.inputs) in.witness = w;
  const auto pub = world.publish(contract.chain, tx);
  if (!pub.ok()) throw ScenarioError(std::string("remark publish failed: ") +
                                     publish_error_name(pub.error));
  res.changed = true;
  res.contract = MarginContractHandle{contract.chain, OutPoint{pub.id, 0}, new_spec};
  return res;
}

SwaptionTerms mirror_terms(const SwaptionTerms& t) {
  SwaptionTerms m = t;
  std::swap(m.a_chain, m.b_chain);
  std::swap(m.alice, m.bob);
  std::swap(m.p_a, m.p_b);
  std::swap(m.m_a, m.m_b);
  std::swap(m.margin_expiry_a, m.margin_expiry_b);
  return m;
}

RunResult open_future(World& world, const SwaptionTerms& leg1_terms,
                      const StrategyTable& strategies, const PricePath& prices) {
  if (!leg1_terms.margined) throw ScenarioError("futures legs must be margined");
  (void)prices;
  const SwaptionTerms leg2_terms = mirror_terms(leg1_terms);
  const std::vector<PartyId> parties = {leg1_terms.alice, leg1_terms.bob};

  Session s1(world, strategies, parties, "leg1.");
  Session s2(world, strategies, parties, "leg2.");
  install_swaption(s1, leg1_terms);
  SwaptionInstallOpts opts2;
  opts2.funding_secret = secret_from_label("leg1.A");
  opts2.funding_by_scan = true;
  install_swaption_ex(s2, leg2_terms, opts2);

  std::map<std::pair<PartyId, ChainId>, Amount> initial;
  for (const auto& [chain_id, cs] : world.chains) {
    for (const auto& p : parties) initial[{p, chain_id}] = cs.balance_of(p);
  }

  const TimePoint horizon = std::max(s1.horizon(), s2.horizon());
  while (true) {
    bool moved = true;
    while (moved) {
      moved = false;
      if (s1.step()) moved = true;
      if (s2.step()) moved = true;
    }
    if (world.now >= horizon) break;
    world.advance_clock(1);
  }

  RunResult r1 = s1.result();
  RunResult r2 = s2.result();
  RunResult combined;
  combined.trace.events = std::move(r1.trace.events);
  for (auto& e : r2.trace.events) combined.trace.events.push_back(std::move(e));
  std::stable_sort(combined.trace.events.begin(), combined.trace.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.t < b.t; });
  combined.outcome = snapshot_outcome(world, parties, initial);
  for (const auto& [k, v] : r1.outcome.dispositions) combined.outcome.dispositions[k] = v;
  for (const auto& [k, v] : r2.outcome.dispositions) combined.outcome.dispositions[k] = v;
  return combined;
}

RationalSwaptionStrategy::RationalSwaptionStrategy(PartyId self, SwaptionTerms leg1,
                                                   PricePath prices,
                                                   std::optional<SwaptionTerms> leg2)
    : self_(std::move(self)), leg1_(std::move(leg1)), leg2_(std::move(leg2)),
      prices_(std::move(prices)) {}

MoveOption RationalSwaptionStrategy::decide(const DecisionPoint& dp) {
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  const SwaptionTerms& t =
      (leg2_ && dp.key.rfind("leg2.", 0) == 0) ? *leg2_ : leg1_;
  const ChainId canon_a = leg1_.a_chain;
  const Rational r = prices_.at(dp.at);

  auto pick = [&](Action a) -> MoveOption {
    for (const auto& mo : dp.legal) {
      if (mo.action == a) return mo;
    }
    return dp.legal.front();
  };

  if (ends_with(dp.key, ".exercise") || dp.key == "exercise") {
    const Rational gain = chain_value(t.p_b, t.b_chain, canon_a, r) -
                          chain_value(t.p_a, t.a_chain, canon_a, r);
    return gain > 0 ? pick(Action::Exercise) : pick(Action::LetExpire);
  }
  if (ends_with(dp.key, "deposit.alice")) {
    return holder_choice(t, r, canon_a) == DefaultChoice::Honor ? pick(Action::DepositPrincipal)
                                                                : pick(Action::Default);
  }
  if (ends_with(dp.key, "deposit.bob")) {
    return writer_choice(t, r, canon_a) == DefaultChoice::Honor ? pick(Action::DepositPrincipal)
                                                                : pick(Action::Default);
  }
  return dp.legal.front();
}

StrategyTable rational_strategies(const SwaptionTerms& terms, const PricePath& prices) {
  StrategyTable table;
  table.by_party[terms.alice] =
      std::make_shared<RationalSwaptionStrategy>(terms.alice, terms, prices);
  table.by_party[terms.bob] =
      std::make_shared<RationalSwaptionStrategy>(terms.bob, terms, prices);
  return table;
}

StrategyTable rational_future_strategies(const SwaptionTerms& leg1, const PricePath& prices) {
  const SwaptionTerms leg2 = mirror_terms(leg1);
  StrategyTable table;
  table.by_party[leg1.alice] =
      std::make_shared<RationalSwaptionStrategy>(leg1.alice, leg1, prices, leg2);
  table.by_party[leg1.bob] =
      std::make_shared<RationalSwaptionStrategy>(leg1.bob, leg1, prices, leg2);
  return table;
}

void seed_for_future(World& world, const SwaptionTerms& leg1) {
  const SwaptionTerms leg2 = mirror_terms(leg1);
  world.seed(leg1.a_chain, leg1.alice, leg1.premium + leg1.p_a);
  world.seed(leg1.b_chain, leg1.bob, leg1.p_b);
  world.seed(leg2.a_chain, leg2.alice, leg2.premium + leg2.p_a);
  world.seed(leg2.b_chain, leg2.bob, leg2.p_b);
}

}  // namespace swapsim
