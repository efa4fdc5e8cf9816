#include <memory>

#include "swapsim/engine.hpp"
#include "swapsim/sha256.hpp"

namespace swapsim {

namespace {

Output bare(const PartyId& p, Amount a) { return Output{a, p_sig(p)}; }

Output locked(Predicate pred, Amount a) { return Output{a, std::move(pred)}; }

Transaction spend_one(const OutPoint& from, std::vector<Output> outs, TimePoint locktime = 0) {
  Transaction tx;
  tx.inputs.push_back(TxIn{from, {}});
  tx.outputs = std::move(outs);
  tx.locktime = locktime;
  return tx;
}

/// Wallet -> outputs, change back to the wallet. Throws on insufficient funds.
Transaction wallet_spend(World& w, const ChainId& chain, const PartyId& party,
                         std::vector<Output> outs) {
  Amount needed = 0;
  for (const auto& o : outs) needed += o.amount;
  const auto picked = w.select_wallet(chain, party, needed);
  if (picked.empty() && needed > 0) {
    throw ScenarioError(party + " lacks " + format_amount(needed) + " on " + chain);
  }
  Transaction tx;
  Amount total = 0;
  for (const auto& [op, amount] : picked) {
    tx.inputs.push_back(TxIn{op, {}});
    w.reserve(op);
    total += amount;
  }
  tx.outputs = std::move(outs);
  if (total > needed) tx.outputs.push_back(bare(party, total - needed));
  return tx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Figure 1: HTLC payment
// ---------------------------------------------------------------------------

std::vector<std::string> rule_keys_htlc() { return {"fund", "accept", "refund"}; }

void install_htlc_payment(Session& s, const HtlcPaymentTerms& terms) {
  if (terms.payer == terms.payee) throw ScenarioError("payer and payee must differ");

  struct St {
    Secret A;
    Hash hA;
    Transaction funding, swap_tx, refund_tx;
    OutPoint htlc;
  };
  auto st = std::make_shared<St>();
  st->A = secret_from_label("A");
  st->hA = hash_secret(st->A);

  st->funding = wallet_spend(s.world(), terms.chain, terms.payer,
                             {locked(htlc_predicate({terms.payee, terms.payer, st->hA, terms.T}),
                                     terms.amount)});
  st->htlc = OutPoint{txid(st->funding), 0};
  st->swap_tx = spend_one(st->htlc, {bare(terms.payee, terms.amount)});
  st->refund_tx = spend_one(st->htlc, {bare(terms.payer, terms.amount)}, terms.T);

  const auto chain = terms.chain;
  const auto payer = terms.payer;
  const auto payee = terms.payee;
  const auto T = terms.T;

  s.add_rule({"fund", payer, chain,
              [](Session&) { return true; },
              [](Session& ss) {
                return std::vector<MoveOption>{{Action::DepositPrincipal, ss.now()},
                                               {Action::Renege, ss.now()}};
              },
              [st, chain, payer](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Renege) {
                  ss.set_disposition("htlc", "unfunded");
                  return;
                }
                ss.schedule(mo.at, chain, payer, [st, chain, payer](Session& s2) {
                  s2.publish_tx(chain, st->funding, payer, "funding");
                });
              }});

  s.add_rule({"accept", payee, chain,
              [st, chain](Session& ss) { return ss.utxo_exists(chain, st->htlc); },
              [T](Session& ss) {
                return ss.timed_options(Action::Accept, ss.now(), {T}, true, Action::Renege);
              },
              [st, chain, payee](Session& ss, const MoveOption& mo) {
                if (mo.action != Action::Accept) {
                  ss.set_disposition("htlc", "silent");
                  return;
                }
                ss.schedule(mo.at, chain, payee, [st, chain, payee](Session& s2) {
                  if (s2.publish_tx(chain, st->swap_tx, payee, "swap", {st->A})) {
                    s2.set_disposition("htlc", "paid");
                  }
                });
              }});

  s.add_rule({"refund", payer, chain,
              [st, chain, T](Session& ss) {
                return ss.now() >= T && ss.utxo_exists(chain, st->htlc);
              },
              [T](Session& ss) {
                return ss.timed_options(Action::PublishRefund, ss.now(), {T}, false, Action::Wait);
              },
              [st, chain, payer](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, chain, payer, [st, chain, payer](Session& s2) {
                  if (s2.publish_tx(chain, st->refund_tx, payer, "refund")) {
                    s2.set_disposition("htlc", "refunded");
                  }
                });
              }});

  s.set_horizon(terms.T + 3);
}

RunResult run_htlc_payment(World& world, const HtlcPaymentTerms& terms,
                           const StrategyTable& strategies) {
  Session s(world, strategies, {terms.payer, terms.payee});
  install_htlc_payment(s, terms);
  s.snapshot_initial();
  s.run_to_horizon();
  return s.result();
}

// ---------------------------------------------------------------------------
// Figure 2: atomic swap
// ---------------------------------------------------------------------------

std::vector<std::string> rule_keys_swap() {
  return {"fund.alice", "fund.bob", "accept", "claim.bob", "refund.alice", "refund.bob"};
}

void install_atomic_swap(Session& s, const SwapTerms& terms) {
  terms.validate();

  struct St {
    Secret A;
    Hash hA;
    Transaction funding_a, funding_b, swap_a, swap_b, refund_a, refund_b;
    OutPoint htlc_a, htlc_b;
  };
  auto st = std::make_shared<St>();
  st->A = secret_from_label("A");
  st->hA = hash_secret(st->A);

  const auto& alice = terms.alice;
  const auto& bob = terms.bob;
  const TimePoint Ta = terms.htlc_a_expiry();
  const TimePoint Tb = terms.htlc_b_expiry();

  st->funding_a = wallet_spend(s.world(), terms.a_chain, alice,
                               {locked(htlc_predicate({bob, alice, st->hA, Ta}), terms.a_amount)});
  st->htlc_a = OutPoint{txid(st->funding_a), 0};
  st->funding_b = wallet_spend(s.world(), terms.b_chain, bob,
                               {locked(htlc_predicate({alice, bob, st->hA, Tb}), terms.b_amount)});
  st->htlc_b = OutPoint{txid(st->funding_b), 0};
  st->swap_b = spend_one(st->htlc_b, {bare(alice, terms.b_amount)});
  st->swap_a = spend_one(st->htlc_a, {bare(bob, terms.a_amount)});
  st->refund_a = spend_one(st->htlc_a, {bare(alice, terms.a_amount)}, Ta);
  st->refund_b = spend_one(st->htlc_b, {bare(bob, terms.b_amount)}, Tb);

  const auto a_chain = terms.a_chain;
  const auto b_chain = terms.b_chain;

  s.add_rule({"fund.alice", alice, a_chain,
              [](Session&) { return true; },
              [](Session& ss) {
                return std::vector<MoveOption>{{Action::DepositPrincipal, ss.now()},
                                               {Action::Renege, ss.now()}};
              },
              [st, a_chain, alice](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Renege) {
                  ss.set_disposition("swap", "reneged");
                  return;
                }
                ss.schedule(mo.at, a_chain, alice, [st, a_chain, alice](Session& s2) {
                  s2.publish_tx(a_chain, st->funding_a, alice, "funding_a");
                });
              }});

  s.add_rule({"fund.bob", bob, b_chain,
              [st, a_chain](Session& ss) { return ss.utxo_exists(a_chain, st->htlc_a); },
              [](Session& ss) {
                return std::vector<MoveOption>{{Action::DepositPrincipal, ss.now()},
                                               {Action::Renege, ss.now()}};
              },
              [st, b_chain, bob](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Renege) {
                  ss.set_disposition("swap", "reneged");
                  return;
                }
                ss.schedule(mo.at, b_chain, bob, [st, b_chain, bob](Session& s2) {
                  s2.publish_tx(b_chain, st->funding_b, bob, "funding_b");
                });
              }});

  s.add_rule({"accept", alice, b_chain,
              [st, b_chain](Session& ss) { return ss.utxo_exists(b_chain, st->htlc_b); },
              [Tb](Session& ss) {
                return ss.timed_options(Action::Accept, ss.now(), {Tb}, true, Action::Renege);
              },
              [st, b_chain, alice](Session& ss, const MoveOption& mo) {
                if (mo.action != Action::Accept) {
                  ss.set_disposition("swap", "reneged");
                  return;
                }
                ss.schedule(mo.at, b_chain, alice, [st, b_chain, alice](Session& s2) {
                  if (s2.publish_tx(b_chain, st->swap_b, alice, "swap_b", {st->A})) {
                    s2.set_disposition("swap", "accepted");
                  }
                });
              }});

  s.add_rule({"claim.bob", bob, a_chain,
              [st, a_chain](Session& ss) {
                return ss.utxo_exists(a_chain, st->htlc_a) && ss.secret_visible(st->hA);
              },
              [Ta](Session& ss) {
                return ss.timed_options(Action::Claim, ss.now(), {Ta}, true, Action::Wait);
              },
              [st, a_chain, bob](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, a_chain, bob, [st, a_chain, bob](Session& s2) {
                  const auto secret = s2.scanned_secret(st->hA);
                  if (secret) s2.publish_tx(a_chain, st->swap_a, bob, "swap_a", {*secret});
                });
              }});

  s.add_rule({"refund.alice", alice, a_chain,
              [st, a_chain, Ta](Session& ss) {
                return ss.now() >= Ta && ss.utxo_exists(a_chain, st->htlc_a);
              },
              [Ta](Session& ss) {
                return ss.timed_options(Action::PublishRefund, ss.now(), {Ta}, false, Action::Wait);
              },
              [st, a_chain, alice](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, a_chain, alice, [st, a_chain, alice](Session& s2) {
                  s2.publish_tx(a_chain, st->refund_a, alice, "refund_a");
                });
              }});

  s.add_rule({"refund.bob", bob, b_chain,
              [st, b_chain, Tb](Session& ss) {
                return ss.now() >= Tb && ss.utxo_exists(b_chain, st->htlc_b);
              },
              [Tb](Session& ss) {
                return ss.timed_options(Action::PublishRefund, ss.now(), {Tb}, false, Action::Wait);
              },
              [st, b_chain, bob](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, b_chain, bob, [st, b_chain, bob](Session& s2) {
                  s2.publish_tx(b_chain, st->refund_b, bob, "refund_b");
                });
              }});

  s.set_horizon(std::max(Ta, Tb) + 3);
}

RunResult run_atomic_swap(World& world, const SwapTerms& terms, const StrategyTable& strategies) {
  Session s(world, strategies, {terms.alice, terms.bob});
  install_atomic_swap(s, terms);
  s.snapshot_initial();
  s.run_to_horizon();
  return s.result();
}

void seed_for_swap(World& world, const SwapTerms& terms) {
  world.seed(terms.a_chain, terms.alice, terms.a_amount);
  world.seed(terms.b_chain, terms.bob, terms.b_amount);
}

}  // namespace swapsim
