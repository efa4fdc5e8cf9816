#include <algorithm>
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

std::optional<OutPoint> exact_piece(Session& s, const ChainId& chain, const PartyId& party,
                                    Amount amount) {
  for (const auto& [op, entry] : s.world().chain(chain).utxos) {
    if (entry.output.amount == amount && is_bare_wallet(entry.output.predicate, party)) {
      return op;
    }
  }
  const auto picked = s.world().select_wallet(chain, party, amount);
  if (picked.empty()) return std::nullopt;
  Transaction split;
  Amount total = 0;
  for (const auto& [op, value] : picked) {
    split.inputs.push_back(TxIn{op, {}});
    total += value;
  }
  split.outputs.push_back(bare(party, amount));
  if (total > amount) split.outputs.push_back(bare(party, total - amount));
  const Digest id = txid(split);
  if (!s.publish_tx(chain, split, party, "wallet_split")) return std::nullopt;
  return OutPoint{id, 0};
}

struct SwaptionState {
  SwaptionTerms t;
  Secret A{}, A2{}, A3{};
  Hash hA{}, hA2{}, hA3{};

  Transaction funding_a, funding_b;
  OutPoint fc_a{}, fc_b{};
  Transaction refund_a, refund_b;

  // Margined: dep_* are margin deposits creating mc_*, and principal deposits
  // are assembled at deposit time around the AnyoneCanPay cores. Unmargined:
  // dep_* are the principal deposits and sc_* are fixed at install.
  Transaction dep_a, dep_b;
  std::optional<OutPoint> mc_a, mc_b;
  Transaction pd_a_core, pd_b_core;

  Predicate sc_a_pred, sc_b_pred;
  std::optional<OutPoint> sc_a, sc_b;
  bool alice_deposited = false, bob_deposited = false;

  Predicate ac_a_pred, ac_b_pred;
  std::optional<OutPoint> ac_a, ac_b;

  std::optional<Transaction> exercise_a_tx, exercise_b_tx, cancel_a_tx;
};

using StPtr = std::shared_ptr<SwaptionState>;

Transaction make_exercise_b(const SwaptionState& st) {
  const auto& t = st.t;
  const Output out = t.cancellable ? locked(st.ac_b_pred, t.p_b) : bare(t.alice, t.p_b);
  return spend_one(*st.sc_b, {out});
}

Transaction make_exercise_a(const SwaptionState& st) {
  return spend_one(*st.sc_a, {bare(st.t.bob, st.t.p_a)});
}

Transaction make_cancel_a(const SwaptionState& st) {
  return spend_one(*st.sc_a, {locked(st.ac_a_pred, st.t.p_a)});
}

// Signature exchange for the children of a freshly confirmed swaption
// contract. Done per side the moment that side's principal lands, which is
// the earliest the outpoints are known (the deposit's id depends on where
// the depositor sourced the principal).
void grant_children_a(Session& s, const StPtr& st) {
  st->exercise_a_tx = make_exercise_a(*st);
  s.grant(st->t.bob, sign(st->t.alice, *st->exercise_a_tx, SigMode::CommitAll));
  if (st->t.cancellable) {
    st->cancel_a_tx = make_cancel_a(*st);
    s.grant(st->t.alice, sign(st->t.bob, *st->cancel_a_tx, SigMode::CommitAll));
  }
}

void grant_children_b(Session& s, const StPtr& st) {
  st->exercise_b_tx = make_exercise_b(*st);
  s.grant(st->t.alice, sign(st->t.bob, *st->exercise_b_tx, SigMode::CommitAll));
}

void install_margin_rules(Session& s, const StPtr& st) {
  const auto t = st->t;
  const TimePoint Ma = t.margin_a_expiry();
  const TimePoint Mb = t.margin_b_expiry();
  const bool alice_first = Ma <= Mb;

  // A deposit scheduled for the expiry step itself only lands when the
  // depositor's intent sorts before the beneficiary's default claim, i.e.
  // when the depositor's name orders first; later attempts are defaults in
  // disguise and are not offered.
  const TimePoint last_a = t.alice < t.bob ? Ma : Ma - 1;
  const TimePoint last_b = t.bob < t.alice ? Mb : Mb - 1;
  auto deposit_options = [](Session& ss, TimePoint last) {
    std::vector<MoveOption> out{{Action::DepositPrincipal, ss.now()}};
    for (const TimePoint x : {last - 1, last}) {
      const MoveOption mo{Action::DepositPrincipal, x};
      if (x >= ss.now() && std::find(out.begin(), out.end(), mo) == out.end()) {
        out.push_back(mo);
      }
    }
    out.push_back({Action::Default, ss.now()});
    return out;
  };

  s.add_rule({"deposit.alice", t.alice, t.a_chain,
              [st, alice_first](Session& ss) {
                return st->mc_a && ss.utxo_exists(st->t.a_chain, *st->mc_a) &&
                       (alice_first || st->bob_deposited);
              },
              [deposit_options, last_a](Session& ss) { return deposit_options(ss, last_a); },
              [st](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Default) {
                  ss.set_disposition("margin.alice", "default_declared");
                  return;
                }
                ss.schedule(mo.at, st->t.a_chain, st->t.alice, [st](Session& s2) {
                  if (!s2.utxo_exists(st->t.a_chain, *st->mc_a)) return;
                  const auto piece =
                      exact_piece(s2, st->t.a_chain, st->t.alice, st->t.p_a - st->t.m_a);
                  if (!piece) {
                    s2.note(st->t.alice, "insufficient wallet funds, forced default");
                    s2.set_disposition("margin.alice", "forced_default");
                    return;
                  }
                  Transaction pd = st->pd_a_core;
                  pd.inputs.push_back(TxIn{*piece, {}});
                  const Digest id = txid(pd);
                  if (s2.publish_tx(st->t.a_chain, pd, st->t.alice, "principal_deposit_a")) {
                    st->sc_a = OutPoint{id, 0};
                    st->alice_deposited = true;
                    s2.set_disposition("margin.alice", "deposited");
                    grant_children_a(s2, st);
                  }
                });
              }});

  s.add_rule({"deposit.bob", t.bob, t.b_chain,
              [st, alice_first](Session& ss) {
                return st->mc_b && ss.utxo_exists(st->t.b_chain, *st->mc_b) &&
                       (!alice_first || st->alice_deposited);
              },
              [deposit_options, last_b](Session& ss) { return deposit_options(ss, last_b); },
              [st](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Default) {
                  ss.set_disposition("margin.bob", "default_declared");
                  return;
                }
                ss.schedule(mo.at, st->t.b_chain, st->t.bob, [st](Session& s2) {
                  if (!s2.utxo_exists(st->t.b_chain, *st->mc_b)) return;
                  const auto piece =
                      exact_piece(s2, st->t.b_chain, st->t.bob, st->t.p_b - st->t.m_b);
                  if (!piece) {
                    s2.note(st->t.bob, "insufficient wallet funds, forced default");
                    s2.set_disposition("margin.bob", "forced_default");
                    return;
                  }
                  Transaction pd = st->pd_b_core;
                  pd.inputs.push_back(TxIn{*piece, {}});
                  const Digest id = txid(pd);
                  if (s2.publish_tx(st->t.b_chain, pd, st->t.bob, "principal_deposit_b")) {
                    st->sc_b = OutPoint{id, 0};
                    st->bob_deposited = true;
                    s2.set_disposition("margin.bob", "deposited");
                    grant_children_b(s2, st);
                  }
                });
              }});

  s.add_rule({"default.claim.bob", t.bob, t.a_chain,
              [st, Ma](Session& ss) {
                return ss.now() >= Ma && st->mc_a && ss.utxo_exists(st->t.a_chain, *st->mc_a);
              },
              [Ma](Session& ss) {
                return ss.timed_options(Action::Claim, ss.now(), {Ma}, false, Action::Wait);
              },
              [st, Ma](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, st->t.a_chain, st->t.bob, [st, Ma](Session& s2) {
                  Transaction tx = spend_one(*st->mc_a, {bare(st->t.bob, st->t.m_a)}, Ma);
                  if (s2.publish_tx(st->t.a_chain, tx, st->t.bob, "default_a")) {
                    s2.set_disposition("margin.alice", "forfeited");
                  }
                });
              }});

  s.add_rule({"default.claim.alice", t.alice, t.b_chain,
              [st, Mb](Session& ss) {
                return ss.now() >= Mb && st->mc_b && ss.utxo_exists(st->t.b_chain, *st->mc_b);
              },
              [Mb](Session& ss) {
                return ss.timed_options(Action::Claim, ss.now(), {Mb}, false, Action::Wait);
              },
              [st, Mb](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, st->t.b_chain, st->t.alice, [st, Mb](Session& s2) {
                  Transaction tx = spend_one(*st->mc_b, {bare(st->t.alice, st->t.m_b)}, Mb);
                  if (s2.publish_tx(st->t.b_chain, tx, st->t.alice, "default_b")) {
                    s2.set_disposition("margin.bob", "forfeited");
                  }
                });
              }});
}

void install_phase2_rules(Session& s, const StPtr& st) {
  const auto t = st->t;
  const TimePoint E = t.E;

  s.add_rule({"exercise", t.alice, t.b_chain,
              [st](Session& ss) {
                // Offered once the option leg is funded and the ACoin side
                // has resolved (deposited or refunded), so cancel and cheat
                // moves are on the table when they apply.
                return st->sc_b && ss.utxo_exists(st->t.b_chain, *st->sc_b) &&
                       st->exercise_b_tx.has_value() &&
                       !ss.utxo_exists(st->t.a_chain, st->fc_a);
              },
              [st, E](Session& ss) {
                auto opts = ss.timed_options(Action::Exercise, ss.now(), {E}, true, std::nullopt);
                if (st->t.cancellable && st->sc_a && ss.utxo_exists(st->t.a_chain, *st->sc_a) &&
                    st->cancel_a_tx) {
                  for (const auto& mo :
                       ss.timed_options(Action::Cancel, ss.now(), {E}, true, std::nullopt)) {
                    opts.push_back(mo);
                  }
                  for (const auto& mo :
                       ss.timed_options(Action::Cheat, ss.now(), {E}, true, std::nullopt)) {
                    opts.push_back(mo);
                  }
                }
                opts.push_back({Action::LetExpire, ss.now()});
                return opts;
              },
              [st](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::LetExpire) {
                  ss.set_disposition("swaption", "let_expire");
                  return;
                }
                if (mo.action == Action::Exercise) ss.set_disposition("swaption", "exercised");
                if (mo.action == Action::Cancel) ss.set_disposition("swaption", "cancelled");
                if (mo.action == Action::Cheat) ss.set_disposition("swaption", "cheat_attempted");
                const bool do_exercise =
                    mo.action == Action::Exercise || mo.action == Action::Cheat;
                const bool do_cancel = mo.action == Action::Cancel || mo.action == Action::Cheat;
                if (do_cancel) {
                  ss.schedule(mo.at, st->t.a_chain, st->t.alice, [st](Session& s2) {
                    if (s2.publish_tx(st->t.a_chain, *st->cancel_a_tx, st->t.alice, "cancel_a",
                                      {st->A3})) {
                      st->ac_a = OutPoint{txid(*st->cancel_a_tx), 0};
                    }
                  });
                }
                if (do_exercise) {
                  ss.schedule(mo.at, st->t.b_chain, st->t.alice, [st](Session& s2) {
                    if (s2.publish_tx(st->t.b_chain, *st->exercise_b_tx, st->t.alice, "exercise_b",
                                      {st->A2})) {
                      if (st->t.cancellable) st->ac_b = OutPoint{txid(*st->exercise_b_tx), 0};
                    }
                  });
                }
              }});

  s.add_rule({"claim.exercised", t.bob, t.a_chain,
              [st](Session& ss) {
                return st->sc_a && ss.utxo_exists(st->t.a_chain, *st->sc_a) &&
                       st->exercise_a_tx.has_value() && ss.secret_visible(st->hA2);
              },
              [st, E](Session& ss) {
                const std::vector<TimePoint> locks =
                    st->t.cancellable ? std::vector<TimePoint>{} : std::vector<TimePoint>{E + 1};
                return ss.timed_options(Action::Claim, ss.now(), locks, true, Action::Wait);
              },
              [st](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, st->t.a_chain, st->t.bob, [st](Session& s2) {
                  const auto a2 = s2.scanned_secret(st->hA2);
                  if (!a2) return;
                  if (s2.publish_tx(st->t.a_chain, *st->exercise_a_tx, st->t.bob, "exercise_a",
                                    {*a2})) {
                    s2.set_disposition("acoin_principal", "claimed_by_writer");
                  }
                });
              }});

  if (!t.cancellable) {
    s.add_rule({"expire.bob", t.bob, t.b_chain,
                [st, E](Session& ss) {
                  return ss.now() >= E && st->sc_b && ss.utxo_exists(st->t.b_chain, *st->sc_b);
                },
                [E](Session& ss) {
                  return ss.timed_options(Action::PublishRefund, ss.now(), {E}, false,
                                          Action::Wait);
                },
                [st, E](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.b_chain, st->t.bob, [st, E](Session& s2) {
                    Transaction tx = spend_one(*st->sc_b, {bare(st->t.bob, st->t.p_b)}, E);
                    if (s2.publish_tx(st->t.b_chain, tx, st->t.bob, "expiration_b")) {
                      s2.set_disposition("bcoin_principal", "expired_to_writer");
                    }
                  });
                }});

    s.add_rule({"expire.alice", t.alice, t.a_chain,
                [st, E](Session& ss) {
                  return ss.now() >= E + 1 && st->sc_a && ss.utxo_exists(st->t.a_chain, *st->sc_a);
                },
                [E](Session& ss) {
                  return ss.timed_options(Action::PublishRefund, ss.now(), {E + 1}, false,
                                          Action::Wait);
                },
                [st, E](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.a_chain, st->t.alice, [st, E](Session& s2) {
                    Transaction tx = spend_one(*st->sc_a, {bare(st->t.alice, st->t.p_a)}, E + 1);
                    if (s2.publish_tx(st->t.a_chain, tx, st->t.alice, "expiration_a")) {
                      s2.set_disposition("acoin_principal", "expired_to_holder");
                    }
                  });
                }});
  } else {
    s.add_rule({"reclaim.bob", t.bob, t.b_chain,
                [st, E](Session& ss) {
                  return st->sc_b && ss.utxo_exists(st->t.b_chain, *st->sc_b) &&
                         (ss.secret_visible(st->hA3) || ss.now() >= E);
                },
                [E](Session& ss) {
                  return ss.timed_options(Action::Claim, ss.now(), {E}, false, Action::Wait);
                },
                [st, E](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.b_chain, st->t.bob, [st, E](Session& s2) {
                    const auto a3 = s2.scanned_secret(st->hA3);
                    if (!a3 && s2.now() < E) return;
                    Transaction tx = spend_one(*st->sc_b, {bare(st->t.bob, st->t.p_b)},
                                               a3 ? 0 : E);
                    std::vector<Secret> reveal;
                    if (a3) reveal.push_back(*a3);
                    if (s2.publish_tx(st->t.b_chain, tx, st->t.bob, "cancel_expiration_b",
                                      reveal)) {
                      s2.set_disposition("bcoin_principal", "reclaimed_by_writer");
                    }
                  });
                }});

    s.add_rule({"cancel.late", t.alice, t.a_chain,
                [st, E](Session& ss) {
                  return st->sc_a && ss.utxo_exists(st->t.a_chain, *st->sc_a) && st->cancel_a_tx &&
                         ss.now() >= E + 1 && !ss.secret_visible(st->hA2);
                },
                [](Session& ss) {
                  return ss.timed_options(Action::Cancel, ss.now(), {}, false, Action::Wait);
                },
                [st](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.a_chain, st->t.alice, [st](Session& s2) {
                    if (s2.publish_tx(st->t.a_chain, *st->cancel_a_tx, st->t.alice, "cancel_a",
                                      {st->A3})) {
                      st->ac_a = OutPoint{txid(*st->cancel_a_tx), 0};
                    }
                  });
                }});

    s.add_rule({"deliver.b", t.alice, t.b_chain,
                [st](Session& ss) {
                  if (!st->ac_b) return false;
                  const auto ct = ss.confirmed_time(st->t.b_chain, *st->ac_b);
                  return ct && ss.now() >= *ct + 1;
                },
                [](Session& ss) {
                  return ss.timed_options(Action::Claim, ss.now(), {}, false, Action::Wait);
                },
                [st](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.b_chain, st->t.alice, [st](Session& s2) {
                    Transaction tx = spend_one(*st->ac_b, {bare(st->t.alice, st->t.p_b)});
                    if (s2.publish_tx(st->t.b_chain, tx, st->t.alice, "delivery_b")) {
                      s2.set_disposition("bcoin_principal", "delivered_to_holder");
                    }
                  });
                }});

    s.add_rule({"deliver.a", t.alice, t.a_chain,
                [st](Session& ss) {
                  if (!st->ac_a) return false;
                  const auto ct = ss.confirmed_time(st->t.a_chain, *st->ac_a);
                  return ct && ss.now() >= *ct + 1;
                },
                [](Session& ss) {
                  return ss.timed_options(Action::Claim, ss.now(), {}, false, Action::Wait);
                },
                [st](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.a_chain, st->t.alice, [st](Session& s2) {
                    Transaction tx = spend_one(*st->ac_a, {bare(st->t.alice, st->t.p_a)});
                    if (s2.publish_tx(st->t.a_chain, tx, st->t.alice, "delivery_a")) {
                      s2.set_disposition("acoin_principal", "recovered_by_holder");
                    }
                  });
                }});

    s.add_rule({"breach.b", t.bob, t.b_chain,
                [st](Session& ss) {
                  return st->ac_b && ss.utxo_exists(st->t.b_chain, *st->ac_b) &&
                         ss.secret_visible(st->hA3);
                },
                [](Session& ss) {
                  return ss.timed_options(Action::PublishBreachRemedy, ss.now(), {}, false,
                                          Action::Wait);
                },
                [st](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.b_chain, st->t.bob, [st](Session& s2) {
                    const auto a3 = s2.scanned_secret(st->hA3);
                    if (!a3) return;
                    Transaction tx = spend_one(*st->ac_b, {bare(st->t.bob, st->t.p_b)});
                    if (s2.publish_tx(st->t.b_chain, tx, st->t.bob, "breach_remedy_b", {*a3})) {
                      s2.set_disposition("bcoin_principal", "punished");
                    }
                  });
                }});

    s.add_rule({"breach.a", t.bob, t.a_chain,
                [st](Session& ss) {
                  return st->ac_a && ss.utxo_exists(st->t.a_chain, *st->ac_a) &&
                         ss.secret_visible(st->hA2);
                },
                [](Session& ss) {
                  return ss.timed_options(Action::PublishBreachRemedy, ss.now(), {}, false,
                                          Action::Wait);
                },
                [st](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, st->t.a_chain, st->t.bob, [st](Session& s2) {
                    const auto a2 = s2.scanned_secret(st->hA2);
                    if (!a2) return;
                    Transaction tx = spend_one(*st->ac_a, {bare(st->t.bob, st->t.p_a)});
                    if (s2.publish_tx(st->t.a_chain, tx, st->t.bob, "breach_remedy_a", {*a2})) {
                      s2.set_disposition("acoin_principal", "punished");
                    }
                  });
                }});
  }
}

}  // namespace

std::vector<std::string> rule_keys_swaption(const SwaptionTerms& terms) {
  std::vector<std::string> keys = {"fund.alice",    "fund.bob",     "accept",
                                   "claim.premium", "refund.alice", "refund.bob",
                                   "exercise",      "claim.exercised"};
  if (terms.margined) {
    keys.insert(keys.end(),
                {"deposit.alice", "deposit.bob", "default.claim.bob", "default.claim.alice"});
  }
  if (terms.cancellable) {
    keys.insert(keys.end(),
                {"reclaim.bob", "cancel.late", "deliver.a", "deliver.b", "breach.a", "breach.b"});
  } else {
    keys.insert(keys.end(), {"expire.bob", "expire.alice"});
  }
  return keys;
}

void install_swaption_ex(Session& s, const SwaptionTerms& terms, const SwaptionInstallOpts& opts) {
  terms.validate();
  if (!opts.with_presignatures) {
    throw ScenarioError("pre-signatures not exchanged; refusing to fund the swaption");
  }

  auto st = std::make_shared<SwaptionState>();
  st->t = terms;
  const std::string ns = s.key_prefix();
  st->A = opts.funding_secret.value_or(secret_from_label(ns + "A"));
  st->A2 = secret_from_label(ns + "A2");
  st->A3 = secret_from_label(ns + "A3");
  st->hA = hash_secret(st->A);
  st->hA2 = hash_secret(st->A2);
  st->hA3 = hash_secret(st->A3);

  const auto& alice = terms.alice;
  const auto& bob = terms.bob;
  const auto a_chain = terms.a_chain;
  const auto b_chain = terms.b_chain;
  const TimePoint T = terms.T;
  const TimePoint E = terms.E;

  st->sc_b_pred = terms.cancellable
                      ? p_any({p_all({p_sig(alice), p_sig(bob), p_preimage(st->hA2)}),
                               cancel_expiration_predicate(bob, st->hA3, E)})
                      : funding_contract_predicate(alice, bob, st->hA2, bob, E);
  st->sc_a_pred = terms.cancellable
                      ? p_any({p_all({p_sig(alice), p_sig(bob), p_preimage(st->hA2)}),
                               p_all({p_sig(alice), p_sig(bob), p_preimage(st->hA3)})})
                      : funding_contract_predicate(alice, bob, st->hA2, alice, E + 1);
  st->ac_b_pred = anticheat_predicate({alice, bob, st->hA3, 1});
  st->ac_a_pred = anticheat_predicate({alice, bob, st->hA2, 1});

  const Amount fund_a_amount = terms.premium + (terms.margined ? terms.m_a : terms.p_a);
  const Amount fund_b_amount = terms.margined ? terms.m_b : terms.p_b;
  st->funding_a = wallet_spend(
      s.world(), a_chain, alice,
      {locked(funding_contract_predicate(alice, bob, st->hA, alice, T + 1), fund_a_amount)});
  st->fc_a = OutPoint{txid(st->funding_a), 0};
  st->funding_b = wallet_spend(
      s.world(), b_chain, bob,
      {locked(funding_contract_predicate(alice, bob, st->hA, bob, T), fund_b_amount)});
  st->fc_b = OutPoint{txid(st->funding_b), 0};
  st->refund_a = spend_one(st->fc_a, {bare(alice, fund_a_amount)}, T + 1);
  st->refund_b = spend_one(st->fc_b, {bare(bob, fund_b_amount)}, T);

  if (terms.margined) {
    const MarginContractSpec mc_a_spec{alice, bob, terms.m_a, terms.p_a, terms.margin_a_expiry()};
    const MarginContractSpec mc_b_spec{bob, alice, terms.m_b, terms.p_b, terms.margin_b_expiry()};
    st->dep_b = spend_one(st->fc_b, {locked(margin_contract_predicate(mc_b_spec), terms.m_b)});
    st->mc_b = OutPoint{txid(st->dep_b), 0};
    std::vector<Output> md_a_outs;
    if (terms.premium > 0) md_a_outs.push_back(bare(bob, terms.premium));
    md_a_outs.push_back(locked(margin_contract_predicate(mc_a_spec), terms.m_a));
    st->dep_a = spend_one(st->fc_a, std::move(md_a_outs));
    st->mc_a = OutPoint{txid(st->dep_a), terms.premium > 0 ? 1u : 0u};
    st->pd_a_core = spend_one(*st->mc_a, {locked(st->sc_a_pred, terms.p_a)});
    st->pd_b_core = spend_one(*st->mc_b, {locked(st->sc_b_pred, terms.p_b)});
    s.grant(alice, sign(bob, st->pd_a_core, SigMode::AnyoneCanPay, 0));
    s.grant(bob, sign(alice, st->pd_b_core, SigMode::AnyoneCanPay, 0));
  } else {
    st->dep_b = spend_one(st->fc_b, {locked(st->sc_b_pred, terms.p_b)});
    st->sc_b = OutPoint{txid(st->dep_b), 0};
    std::vector<Output> pd_a_outs;
    if (terms.premium > 0) pd_a_outs.push_back(bare(bob, terms.premium));
    pd_a_outs.push_back(locked(st->sc_a_pred, terms.p_a));
    st->dep_a = spend_one(st->fc_a, std::move(pd_a_outs));
    st->sc_a = OutPoint{txid(st->dep_a), terms.premium > 0 ? 1u : 0u};
  }
  // Phase-1 deposits are pinned by both signatures before any funding lands.
  s.grant(alice, sign(bob, st->dep_b, SigMode::CommitAll));
  s.grant(bob, sign(alice, st->dep_a, SigMode::CommitAll));
  if (!terms.margined) {
    grant_children_a(s, st);
    grant_children_b(s, st);
  }

  const std::string dep_b_label = terms.margined ? "margin_deposit_b" : "principal_deposit_b";
  const std::string dep_a_label = terms.margined ? "margin_deposit_a" : "principal_deposit_a";

  s.add_rule({"fund.alice", alice, a_chain, [](Session&) { return true; },
              [](Session& ss) {
                return std::vector<MoveOption>{{Action::DepositPrincipal, ss.now()},
                                               {Action::Renege, ss.now()}};
              },
              [st, a_chain, alice](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Renege) {
                  ss.set_disposition("funding", "reneged");
                  return;
                }
                ss.schedule(mo.at, a_chain, alice, [st, a_chain, alice](Session& s2) {
                  s2.publish_tx(a_chain, st->funding_a, alice, "funding_a");
                });
              }});

  s.add_rule({"fund.bob", bob, b_chain,
              [st, a_chain](Session& ss) { return ss.utxo_exists(a_chain, st->fc_a); },
              [](Session& ss) {
                return std::vector<MoveOption>{{Action::DepositPrincipal, ss.now()},
                                               {Action::Renege, ss.now()}};
              },
              [st, b_chain, bob](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Renege) {
                  ss.set_disposition("funding", "reneged");
                  return;
                }
                ss.schedule(mo.at, b_chain, bob, [st, b_chain, bob](Session& s2) {
                  s2.publish_tx(b_chain, st->funding_b, bob, "funding_b");
                });
              }});

  const bool by_scan = opts.funding_by_scan;
  s.add_rule({"accept", alice, b_chain,
              [st, b_chain, by_scan](Session& ss) {
                return ss.utxo_exists(b_chain, st->fc_b) &&
                       (!by_scan || ss.secret_visible(st->hA));
              },
              [T, by_scan](Session& ss) {
                return ss.timed_options(by_scan ? Action::Claim : Action::Accept, ss.now(), {T},
                                        true, Action::Renege);
              },
              [st, b_chain, alice, dep_b_label](Session& ss, const MoveOption& mo) {
                if (mo.action == Action::Renege) {
                  ss.set_disposition("funding", "reneged");
                  return;
                }
                ss.schedule(mo.at, b_chain, alice, [st, b_chain, alice, dep_b_label](Session& s2) {
                  if (s2.publish_tx(b_chain, st->dep_b, alice, dep_b_label, {st->A})) {
                    s2.set_disposition("funding", "accepted");
                  }
                });
              }});

  s.add_rule({"claim.premium", bob, a_chain,
              [st, a_chain](Session& ss) {
                return ss.utxo_exists(a_chain, st->fc_a) && ss.secret_visible(st->hA);
              },
              [T](Session& ss) {
                return ss.timed_options(Action::Claim, ss.now(), {T + 1}, true, Action::Wait);
              },
              [st, a_chain, bob, dep_a_label](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, a_chain, bob, [st, a_chain, bob, dep_a_label](Session& s2) {
                  const auto secret = s2.scanned_secret(st->hA);
                  if (!secret) return;
                  s2.publish_tx(a_chain, st->dep_a, bob, dep_a_label, {*secret});
                });
              }});

  s.add_rule({"refund.alice", alice, a_chain,
              [st, a_chain, T](Session& ss) {
                return ss.now() >= T + 1 && ss.utxo_exists(a_chain, st->fc_a);
              },
              [T](Session& ss) {
                return ss.timed_options(Action::PublishRefund, ss.now(), {T + 1}, false,
                                        Action::Wait);
              },
              [st, a_chain, alice](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, a_chain, alice, [st, a_chain, alice](Session& s2) {
                  if (s2.publish_tx(a_chain, st->refund_a, alice, "refund_a")) {
                    s2.set_disposition("funding_a", "refunded");
                  }
                });
              }});

  s.add_rule({"refund.bob", bob, b_chain,
              [st, b_chain, T](Session& ss) {
                return ss.now() >= T && ss.utxo_exists(b_chain, st->fc_b);
              },
              [T](Session& ss) {
                return ss.timed_options(Action::PublishRefund, ss.now(), {T}, false, Action::Wait);
              },
              [st, b_chain, bob](Session& ss, const MoveOption& mo) {
                ss.schedule(mo.at, b_chain, bob, [st, b_chain, bob](Session& s2) {
                  if (s2.publish_tx(b_chain, st->refund_b, bob, "refund_b")) {
                    s2.set_disposition("funding_b", "refunded");
                  }
                });
              }});

  if (terms.margined) install_margin_rules(s, st);
  install_phase2_rules(s, st);
  s.set_horizon(E + 4);
}

void install_swaption(Session& s, const SwaptionTerms& terms) {
  install_swaption_ex(s, terms, SwaptionInstallOpts{});
}

void seed_for_swaption(World& world, const SwaptionTerms& terms) {
  world.seed(terms.a_chain, terms.alice, terms.premium + terms.p_a);
  world.seed(terms.b_chain, terms.bob, terms.p_b);
}

RunResult run_swaption(World& world, const SwaptionTerms& terms, const StrategyTable& strategies) {
  if (terms.margined || terms.cancellable) {
    throw ScenarioError("run_swaption expects plain terms");
  }
  Session s(world, strategies, {terms.alice, terms.bob});
  install_swaption(s, terms);
  s.snapshot_initial();
  s.run_to_horizon();
  return s.result();
}

RunResult run_swaption_with_cancellation(World& world, const SwaptionTerms& terms,
                                         const StrategyTable& strategies) {
  if (!terms.cancellable || terms.margined) {
    throw ScenarioError("run_swaption_with_cancellation expects cancellable, unmargined terms");
  }
  Session s(world, strategies, {terms.alice, terms.bob});
  install_swaption(s, terms);
  s.snapshot_initial();
  s.run_to_horizon();
  return s.result();
}

RunResult run_margin_swaption(World& world, const SwaptionTerms& terms,
                              const StrategyTable& strategies, const PricePath& prices) {
  if (!terms.margined) throw ScenarioError("run_margin_swaption expects margined terms");
  (void)prices;  // price-sensitive behavior lives in the strategies
  Session s(world, strategies, {terms.alice, terms.bob});
  install_swaption(s, terms);
  s.snapshot_initial();
  s.run_to_horizon();
  return s.result();
}

}  // namespace swapsim
