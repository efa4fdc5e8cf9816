#include "swapsim/lightning.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "swapsim/contracts.hpp"
#include "swapsim/sha256.hpp"

namespace swapsim {

Predicate LnContract::onchain_predicate() const {
  return htlc_predicate({payee, payer, hash, expiry});
}

Amount Channel::balance_of(const PartyId& p) const {
  if (p == a) return balance_a;
  if (p == b) return balance_b;
  return 0;
}

void Channel::credit(const PartyId& p, Amount v) {
  if (p == a) balance_a += v;
  else if (p == b) balance_b += v;
  else throw std::invalid_argument("party not in channel: " + p);
}

bool Channel::debit(const PartyId& p, Amount v) {
  Amount& bal = p == a ? balance_a : balance_b;
  if (!has_party(p) || bal < v) return false;
  bal -= v;
  return true;
}

Amount Channel::locked_total() const {
  Amount total = 0;
  for (const auto& [id, c] : contracts) total += c.amount;
  return total;
}

std::string LnState::channel_key(const ChainId& chain, const PartyId& x, const PartyId& y) {
  const auto& lo = x < y ? x : y;
  const auto& hi = x < y ? y : x;
  return chain + ":" + lo + "-" + hi;
}

Channel& LnState::channel(const std::string& id) {
  const auto it = channels.find(id);
  if (it == channels.end()) throw std::out_of_range("unknown channel: " + id);
  return it->second;
}

const Channel& LnState::channel(const std::string& id) const {
  const auto it = channels.find(id);
  if (it == channels.end()) throw std::out_of_range("unknown channel: " + id);
  return it->second;
}

Channel* LnState::between(const ChainId& chain, const PartyId& x, const PartyId& y) {
  const auto it = channels.find(channel_key(chain, x, y));
  return it == channels.end() ? nullptr : &it->second;
}

std::optional<Secret> LnState::secret(const World& world, const Hash& h) const {
  const auto it = revealed.find(h);
  if (it != revealed.end()) return it->second;
  const auto on_chain = world.visible_secrets();
  const auto jt = on_chain.find(h);
  if (jt == on_chain.end()) return std::nullopt;
  return jt->second;
}

Amount LnState::total_of(const World& world, const PartyId& party, const ChainId& chain) const {
  Amount total = world.balance(chain, party);
  for (const auto& [id, ch] : channels) {
    if (ch.open && ch.chain == chain) total += ch.balance_of(party);
  }
  return total;
}

Channel& open_channel(World& world, LnState& ln, const ChainId& chain, const PartyId& a,
                      const PartyId& b, Amount fund_a, Amount fund_b) {
  if (a == b) throw ScenarioError("channel parties must differ");
  if (fund_a < 0 || fund_b < 0 || fund_a + fund_b <= 0) {
    throw ScenarioError("channel funding must be positive");
  }
  const std::string id = LnState::channel_key(chain, a, b);
  if (ln.channels.count(id)) throw ScenarioError("channel already open: " + id);

  Transaction tx;
  Amount total = 0;
  for (const auto& [party, amount] : {std::pair{a, fund_a}, std::pair{b, fund_b}}) {
    if (amount == 0) continue;
    const auto picked = world.select_wallet(chain, party, amount);
    if (picked.empty()) throw ScenarioError(party + " cannot fund channel on " + chain);
    Amount got = 0;
    for (const auto& [op, value] : picked) {
      tx.inputs.push_back(TxIn{op, {}});
      got += value;
    }
    if (got > amount) tx.outputs.push_back(Output{got - amount, p_sig(party)});
    total += amount;
  }
  tx.outputs.insert(tx.outputs.begin(),
                    Output{total, p_all({p_sig(a < b ? a : b), p_sig(a < b ? b : a)})});
  Witness w;
  w.add_signature(sign(a, tx, SigMode::CommitAll));
  w.add_signature(sign(b, tx, SigMode::CommitAll));
  for (auto& in : tx.inputs) in.witness = w;
  const auto res = world.publish(chain, tx);
  if (!res.ok()) {
    throw ScenarioError(std::string("channel funding failed: ") + publish_error_name(res.error));
  }

  Channel ch;
  ch.id = id;
  ch.chain = chain;
  ch.a = a < b ? a : b;
  ch.b = a < b ? b : a;
  ch.balance_a = ch.a == a ? fund_a : fund_b;
  ch.balance_b = ch.b == b ? fund_b : fund_a;
  ch.funding = OutPoint{res.id, 0};
  ch.capacity = total;
  ch.open = true;
  return ln.channels.emplace(id, std::move(ch)).first->second;
}

bool update_channel(Channel& ch, Amount new_balance_a, Amount new_balance_b,
                    const ContractDelta& delta) {
  if (!ch.open || new_balance_a < 0 || new_balance_b < 0) return false;
  Channel next = ch;
  next.balance_a = new_balance_a;
  next.balance_b = new_balance_b;
  for (const auto& id : delta.remove) {
    if (!next.contracts.erase(id)) return false;
  }
  for (const auto& c : delta.add) {
    if (!c.id.size() || next.contracts.count(c.id)) return false;
    if (!ch.has_party(c.payer) || !ch.has_party(c.payee) || c.amount <= 0) return false;
    next.contracts.emplace(c.id, c);
  }
  if (!next.conserves()) return false;
  ch = std::move(next);
  return true;
}

std::map<std::string, OutPoint> close_channel(World& world, LnState& ln, Channel& ch) {
  if (!ch.open) throw ScenarioError("channel already closed: " + ch.id);
  Transaction tx;
  tx.inputs.push_back(TxIn{ch.funding, {}});
  if (ch.balance_a > 0) tx.outputs.push_back(Output{ch.balance_a, p_sig(ch.a)});
  if (ch.balance_b > 0) tx.outputs.push_back(Output{ch.balance_b, p_sig(ch.b)});
  std::vector<std::string> order;
  for (const auto& [id, c] : ch.contracts) {
    tx.outputs.push_back(Output{c.amount, c.onchain_predicate()});
    order.push_back(id);
  }
  Witness w;
  w.add_signature(sign(ch.a, tx, SigMode::CommitAll));
  w.add_signature(sign(ch.b, tx, SigMode::CommitAll));
  for (auto& in : tx.inputs) in.witness = w;
  const auto res = world.publish(ch.chain, tx);
  if (!res.ok()) {
    throw ScenarioError(std::string("channel close failed: ") + publish_error_name(res.error));
  }

  std::map<std::string, OutPoint> out;
  std::uint32_t index = (ch.balance_a > 0 ? 1 : 0) + (ch.balance_b > 0 ? 1 : 0);
  for (const auto& id : order) {
    const OutPoint op{res.id, index++};
    out[id] = op;
    ln.materialized.push_back(OnchainContract{ch.contracts.at(id), ch.chain, op});
  }
  ch.contracts.clear();
  ch.balance_a = ch.balance_b = 0;
  ch.open = false;
  return out;
}

// ---------------------------------------------------------------------------
// Routed positions
// ---------------------------------------------------------------------------

TimePoint RoutedPosition::fc_expiry_b(std::size_t edge) const {
  const std::size_t edges = path_b.size() - 1;
  return T + (edges - 1 - edge);
}

TimePoint RoutedPosition::fc_expiry_a(std::size_t edge) const {
  const std::size_t edges_a = path_a.size() - 1;
  const std::size_t edges_b = path_b.size() - 1;
  return T + edges_b + (edges_a - 1 - edge);
}

TimePoint RoutedPosition::sc_expiry_b(std::size_t edge) const {
  const std::size_t edges = path_b.size() - 1;
  return E + (edges - 1 - edge);
}

TimePoint RoutedPosition::sc_expiry_a(std::size_t edge) const {
  const std::size_t edges_a = path_a.size() - 1;
  const std::size_t edges_b = path_b.size() - 1;
  return E + edges_b + (edges_a - 1 - edge);
}

RoutedPosition make_position(const RouteSpec& spec) {
  if (spec.path_a.size() < 2 || spec.path_b.size() < 2) {
    throw ScenarioError("route needs at least two parties per path");
  }
  if (spec.path_a.front() != spec.path_b.back() || spec.path_a.back() != spec.path_b.front()) {
    throw ScenarioError("paths must run holder->writer and writer->holder");
  }
  for (const auto* path : {&spec.path_a, &spec.path_b}) {
    std::set<PartyId> seen(path->begin(), path->end());
    if (seen.size() != path->size()) throw ScenarioError("route repeats a party");
  }
  RoutedPosition pos;
  pos.id = spec.id;
  pos.a_chain = spec.terms.a_chain;
  pos.b_chain = spec.terms.b_chain;
  pos.path_a = spec.path_a;
  pos.path_b = spec.path_b;
  pos.premium = spec.terms.premium;
  pos.p_a = spec.terms.p_a;
  pos.p_b = spec.terms.p_b;
  pos.holder = spec.path_a.front();
  pos.writer = spec.path_a.back();
  pos.T = spec.terms.T;
  pos.E = spec.terms.E;
  const std::string ns = spec.secret_ns.empty() ? spec.id : spec.secret_ns;
  pos.fund_secret = secret_from_label(ns + ".A");
  pos.ex_secret = secret_from_label(ns + ".A2");
  pos.h_fund = hash_secret(pos.fund_secret);
  pos.h_ex = hash_secret(pos.ex_secret);
  for (std::size_t i = 0; i + 1 < spec.path_a.size(); ++i) {
    pos.fc_a.push_back(spec.id + ".fc.a." + std::to_string(i));
    pos.sc_a.push_back(spec.id + ".sc.a." + std::to_string(i));
  }
  for (std::size_t i = 0; i + 1 < spec.path_b.size(); ++i) {
    pos.fc_b.push_back(spec.id + ".fc.b." + std::to_string(i));
    pos.sc_b.push_back(spec.id + ".sc.b." + std::to_string(i));
  }
  return pos;
}

namespace {

struct LnRunCtx {
  World* world = nullptr;
  LnState* ln = nullptr;
  std::map<std::string, RoutedPosition*> positions;
  std::set<std::string> claimed;  // contract ids settled by a claim
};

using Ctx = std::shared_ptr<LnRunCtx>;

enum class Place { Channel, Onchain, Gone };

Place locate(const Ctx& ctx, const std::string& cid, Channel** ch_out,
             const OnchainContract** onchain_out) {
  for (auto& [id, ch] : ctx->ln->channels) {
    if (ch.open && ch.contracts.count(cid)) {
      if (ch_out) *ch_out = &ch;
      return Place::Channel;
    }
  }
  for (const auto& oc : ctx->ln->materialized) {
    if (oc.meta.id == cid && ctx->world->chain(oc.chain).find_utxo(oc.outpoint)) {
      if (onchain_out) *onchain_out = &oc;
      return Place::Onchain;
    }
  }
  return Place::Gone;
}

bool contract_live(const Ctx& ctx, const std::string& cid) {
  return locate(ctx, cid, nullptr, nullptr) != Place::Gone;
}

/// Applies a claim wherever the contract lives. Returns false if it is gone.
bool do_claim(Session& s, const Ctx& ctx, const std::string& cid, const Secret& secret) {
  Channel* ch = nullptr;
  const OnchainContract* oc = nullptr;
  switch (locate(ctx, cid, &ch, &oc)) {
    case Place::Gone:
      return false;
    case Place::Channel: {
      const LnContract c = ch->contracts.at(cid);
      if (hash_secret(secret) != c.hash) return false;
      ContractDelta delta;
      delta.remove.push_back(cid);
      Amount payee_credit = c.amount;
      if (c.is_funding) {
        payee_credit = c.forward_on_claim;
        LnContract sc;
        sc.id = c.next_id;
        sc.payer = c.payer;
        sc.payee = c.payee;
        sc.amount = c.amount - c.forward_on_claim;
        sc.hash = c.next_hash;
        sc.expiry = c.next_expiry;
        delta.add.push_back(sc);
      }
      const Amount new_a = ch->balance_a + (ch->a == c.payee ? payee_credit : 0);
      const Amount new_b = ch->balance_b + (ch->b == c.payee ? payee_credit : 0);
      if (!update_channel(*ch, new_a, new_b, delta)) return false;
      ctx->ln->revealed[hash_secret(secret)] = secret;
      ctx->claimed.insert(cid);
      s.channel_event(ch->chain, c.payee, "claim:" + cid, {{"amount", c.amount}});
      return true;
    }
    case Place::Onchain: {
      const LnContract c = oc->meta;
      if (hash_secret(secret) != c.hash) return false;
      Transaction tx;
      tx.inputs.push_back(TxIn{oc->outpoint, {}});
      if (c.is_funding) {
        if (c.forward_on_claim > 0) {
          tx.outputs.push_back(Output{c.forward_on_claim, p_sig(c.payee)});
        }
        LnContract sc;
        sc.id = c.next_id;
        sc.payer = c.payer;
        sc.payee = c.payee;
        sc.amount = c.amount - c.forward_on_claim;
        sc.hash = c.next_hash;
        sc.expiry = c.next_expiry;
        tx.outputs.push_back(Output{sc.amount, sc.onchain_predicate()});
        const OutPoint sc_op{txid(tx), static_cast<std::uint32_t>(tx.outputs.size() - 1)};
        if (!s.publish_tx(oc->chain, tx, c.payee, "claim_" + cid, {secret})) return false;
        ctx->ln->materialized.push_back(OnchainContract{sc, oc->chain, sc_op});
      } else {
        tx.outputs.push_back(Output{c.amount, p_sig(c.payee)});
        if (!s.publish_tx(oc->chain, tx, c.payee, "claim_" + cid, {secret})) return false;
      }
      ctx->claimed.insert(cid);
      return true;
    }
  }
  return false;
}

bool do_refund(Session& s, const Ctx& ctx, const std::string& cid) {
  Channel* ch = nullptr;
  const OnchainContract* oc = nullptr;
  switch (locate(ctx, cid, &ch, &oc)) {
    case Place::Gone:
      return false;
    case Place::Channel: {
      const LnContract c = ch->contracts.at(cid);
      if (s.now() < c.expiry) return false;
      ContractDelta delta;
      delta.remove.push_back(cid);
      const Amount new_a = ch->balance_a + (ch->a == c.payer ? c.amount : 0);
      const Amount new_b = ch->balance_b + (ch->b == c.payer ? c.amount : 0);
      if (!update_channel(*ch, new_a, new_b, delta)) return false;
      s.channel_event(ch->chain, c.payer, "refund:" + cid, {{"amount", c.amount}});
      return true;
    }
    case Place::Onchain: {
      const LnContract c = oc->meta;
      Transaction tx;
      tx.inputs.push_back(TxIn{oc->outpoint, {}});
      tx.outputs.push_back(Output{c.amount, p_sig(c.payer)});
      tx.locktime = c.expiry;
      return s.publish_tx(oc->chain, tx, c.payer, "refund_" + cid);
    }
  }
  return false;
}

/// The payer-side install of one funding hop: locks premium+principal (a
/// path) or principal (b path) out of the payer's channel balance.
bool do_install(Session& s, const Ctx& ctx, RoutedPosition& pos, bool a_side, std::size_t edge) {
  const auto& path = a_side ? pos.path_a : pos.path_b;
  const auto chain = a_side ? pos.a_chain : pos.b_chain;
  const PartyId payer = path[edge];
  const PartyId payee = path[edge + 1];
  Channel* ch = ctx->ln->between(chain, payer, payee);
  if (!ch || !ch->open) return false;

  LnContract c;
  c.id = a_side ? pos.fc_a[edge] : pos.fc_b[edge];
  c.payer = payer;
  c.payee = payee;
  c.amount = a_side ? pos.premium + pos.p_a : pos.p_b;
  c.hash = pos.h_fund;
  c.expiry = a_side ? pos.fc_expiry_a(edge) : pos.fc_expiry_b(edge);
  c.forward_on_claim = a_side ? pos.premium : 0;
  c.is_funding = true;
  c.next_hash = pos.h_ex;
  c.next_expiry = a_side ? pos.sc_expiry_a(edge) : pos.sc_expiry_b(edge);
  c.next_id = a_side ? pos.sc_a[edge] : pos.sc_b[edge];

  const Amount new_a = ch->balance_a - (ch->a == payer ? c.amount : 0);
  const Amount new_b = ch->balance_b - (ch->b == payer ? c.amount : 0);
  if (new_a < 0 || new_b < 0) {
    s.note(payer, "insufficient channel capacity for " + c.id);
    return false;
  }
  ContractDelta delta;
  delta.add.push_back(c);
  if (!update_channel(*ch, new_a, new_b, delta)) return false;
  s.channel_event(chain, payer, "install:" + c.id, {{"amount", c.amount}});
  return true;
}

void refresh_funded(const Ctx& ctx, RoutedPosition& pos) {
  if (pos.funded) return;
  for (const auto& id : pos.sc_a) {
    if (!contract_live(ctx, id) && !ctx->claimed.count(id)) return;
  }
  for (const auto& id : pos.sc_b) {
    if (!contract_live(ctx, id) && !ctx->claimed.count(id)) return;
  }
  pos.funded = true;
}

void install_position_rules(Session& s, const Ctx& ctx, RoutedPosition& pos) {
  RoutedPosition* p = &pos;
  const std::size_t edges_a = pos.path_a.size() - 1;
  const std::size_t edges_b = pos.path_b.size() - 1;

  // Funding installs cascade from each payer end; the b path waits for the
  // a path so the writer only commits once the holder has.
  if (!pos.funded) {
    for (std::size_t i = 0; i < edges_a; ++i) {
      s.add_rule({p->id + ".install.a." + std::to_string(i), p->path_a[i], p->a_chain,
                  [ctx, p, i](Session&) {
                    return !p->funded && !contract_live(ctx, p->fc_a[i]) &&
                           !ctx->claimed.count(p->fc_a[i]) &&
                           (i == 0 || contract_live(ctx, p->fc_a[i - 1]));
                  },
                  [](Session& ss) {
                    return std::vector<MoveOption>{{Action::DepositPrincipal, ss.now()},
                                                   {Action::Renege, ss.now()}};
                  },
                  [ctx, p, i](Session& ss, const MoveOption& mo) {
                    if (mo.action != Action::DepositPrincipal) return;
                    ss.schedule(mo.at, p->a_chain, p->path_a[i], [ctx, p, i](Session& s2) {
                      do_install(s2, ctx, *p, true, i);
                    });
                  }});
    }
    for (std::size_t i = 0; i < edges_b; ++i) {
      s.add_rule({p->id + ".install.b." + std::to_string(i), p->path_b[i], p->b_chain,
                  [ctx, p, i, edges_a](Session&) {
                    if (p->funded || contract_live(ctx, p->fc_b[i]) ||
                        ctx->claimed.count(p->fc_b[i])) {
                      return false;
                    }
                    if (i > 0) return contract_live(ctx, p->fc_b[i - 1]);
                    return contract_live(ctx, p->fc_a[edges_a - 1]);
                  },
                  [](Session& ss) {
                    return std::vector<MoveOption>{{Action::DepositPrincipal, ss.now()},
                                                   {Action::Renege, ss.now()}};
                  },
                  [ctx, p, i](Session& ss, const MoveOption& mo) {
                    if (mo.action != Action::DepositPrincipal) return;
                    ss.schedule(mo.at, p->b_chain, p->path_b[i], [ctx, p, i](Session& s2) {
                      do_install(s2, ctx, *p, false, i);
                    });
                  }});
    }

    // Funding acceptance: the holder claims the adjacent b-path contract,
    // revealing the funding secret; every other hop mimics.
    s.add_rule({p->id + ".accept", p->holder, p->b_chain,
                [ctx, p, edges_b](Session&) {
                  return contract_live(ctx, p->fc_b[edges_b - 1]);
                },
                [p](Session& ss) {
                  return ss.timed_options(Action::Accept, ss.now(), {p->fc_expiry_b(
                                              p->path_b.size() - 2)},
                                          true, Action::Renege);
                },
                [ctx, p, edges_b](Session& ss, const MoveOption& mo) {
                  if (mo.action != Action::Accept) return;
                  ss.schedule(mo.at, p->b_chain, p->holder, [ctx, p, edges_b](Session& s2) {
                    if (do_claim(s2, ctx, p->fc_b[edges_b - 1], p->fund_secret)) {
                      refresh_funded(ctx, *p);
                    }
                  });
                }});

    for (std::size_t i = 0; i + 1 < edges_b; ++i) {
      s.add_rule({p->id + ".claim.b." + std::to_string(i), p->path_b[i + 1], p->b_chain,
                  [ctx, p, i](Session&) {
                    return contract_live(ctx, p->fc_b[i]) && ctx->claimed.count(p->fc_b[i + 1]);
                  },
                  [p, i](Session& ss) {
                    return ss.timed_options(Action::Claim, ss.now(), {p->fc_expiry_b(i)}, true,
                                            Action::Wait);
                  },
                  [ctx, p, i](Session& ss, const MoveOption& mo) {
                    ss.schedule(mo.at, p->b_chain, p->path_b[i + 1], [ctx, p, i](Session& s2) {
                      const auto secret = ctx->ln->secret(s2.world(), p->h_fund);
                      if (secret && do_claim(s2, ctx, p->fc_b[i], *secret)) {
                        refresh_funded(ctx, *p);
                      }
                    });
                  }});
    }
    for (std::size_t i = 0; i < edges_a; ++i) {
      s.add_rule({p->id + ".claim.a." + std::to_string(i), p->path_a[i + 1], p->a_chain,
                  [ctx, p, i, edges_a](Session& ss) {
                    if (!contract_live(ctx, p->fc_a[i])) return false;
                    if (i + 1 < edges_a) return ctx->claimed.count(p->fc_a[i + 1]) > 0;
                    return ctx->ln->secret(ss.world(), p->h_fund).has_value();
                  },
                  [p, i](Session& ss) {
                    return ss.timed_options(Action::Claim, ss.now(), {p->fc_expiry_a(i)}, true,
                                            Action::Wait);
                  },
                  [ctx, p, i](Session& ss, const MoveOption& mo) {
                    ss.schedule(mo.at, p->a_chain, p->path_a[i + 1], [ctx, p, i](Session& s2) {
                      const auto secret = ctx->ln->secret(s2.world(), p->h_fund);
                      if (secret && do_claim(s2, ctx, p->fc_a[i], *secret)) {
                        refresh_funded(ctx, *p);
                      }
                    });
                  }});
    }
    for (std::size_t i = 0; i < edges_a; ++i) {
      s.add_rule({p->id + ".refund.fa." + std::to_string(i), p->path_a[i], p->a_chain,
                  [ctx, p, i](Session& ss) {
                    return ss.now() >= p->fc_expiry_a(i) && contract_live(ctx, p->fc_a[i]);
                  },
                  [p, i](Session& ss) {
                    return ss.timed_options(Action::PublishRefund, ss.now(), {p->fc_expiry_a(i)},
                                            false, Action::Wait);
                  },
                  [ctx, p, i](Session& ss, const MoveOption& mo) {
                    ss.schedule(mo.at, p->a_chain, p->path_a[i],
                                [ctx, p, i](Session& s2) { do_refund(s2, ctx, p->fc_a[i]); });
                  }});
    }
    for (std::size_t i = 0; i < edges_b; ++i) {
      s.add_rule({p->id + ".refund.fb." + std::to_string(i), p->path_b[i], p->b_chain,
                  [ctx, p, i](Session& ss) {
                    return ss.now() >= p->fc_expiry_b(i) && contract_live(ctx, p->fc_b[i]);
                  },
                  [p, i](Session& ss) {
                    return ss.timed_options(Action::PublishRefund, ss.now(), {p->fc_expiry_b(i)},
                                            false, Action::Wait);
                  },
                  [ctx, p, i](Session& ss, const MoveOption& mo) {
                    ss.schedule(mo.at, p->b_chain, p->path_b[i],
                                [ctx, p, i](Session& s2) { do_refund(s2, ctx, p->fc_b[i]); });
                  }});
    }
  }

  // Option phase: holder exercises (or a decoupled node mimics upstream),
  // claims cascade, leftovers refund on the staircase.
  s.add_rule({p->id + ".exercise", p->holder, p->b_chain,
              [ctx, p, edges_b](Session&) {
                refresh_funded(ctx, *p);
                if (!contract_live(ctx, p->sc_b[edges_b - 1])) return false;
                if (p->mimic_upstream.empty()) return true;
                const auto it = ctx->positions.find(p->mimic_upstream);
                // An upstream that is no longer live (unwound or settled in a
                // previous session) leaves this position free-standing.
                if (it == ctx->positions.end()) return true;
                const auto& up = *it->second;
                return !up.sc_b.empty() && ctx->claimed.count(up.sc_b.back()) > 0;
              },
              [p](Session& ss) {
                return ss.timed_options(Action::Exercise, ss.now(),
                                        {p->sc_expiry_b(p->path_b.size() - 2)}, true,
                                        Action::LetExpire);
              },
              [ctx, p, edges_b](Session& ss, const MoveOption& mo) {
                if (mo.action != Action::Exercise) return;
                ss.schedule(mo.at, p->b_chain, p->holder, [ctx, p, edges_b](Session& s2) {
                  auto reveal = ctx->ln->secret(s2.world(), p->h_ex);
                  if (!reveal && hash_secret(p->ex_secret) == p->h_ex) reveal = p->ex_secret;
                  if (reveal) do_claim(s2, ctx, p->sc_b[edges_b - 1], *reveal);
                });
              }});

  for (std::size_t i = 0; i + 1 < edges_b; ++i) {
    s.add_rule({p->id + ".exclaim.b." + std::to_string(i), p->path_b[i + 1], p->b_chain,
                [ctx, p, i](Session&) {
                  return contract_live(ctx, p->sc_b[i]) && ctx->claimed.count(p->sc_b[i + 1]);
                },
                [p, i](Session& ss) {
                  return ss.timed_options(Action::Claim, ss.now(), {p->sc_expiry_b(i)}, true,
                                          Action::Wait);
                },
                [ctx, p, i](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, p->b_chain, p->path_b[i + 1], [ctx, p, i](Session& s2) {
                    const auto secret = ctx->ln->secret(s2.world(), p->h_ex);
                    if (secret) do_claim(s2, ctx, p->sc_b[i], *secret);
                  });
                }});
  }
  for (std::size_t i = 0; i < edges_a; ++i) {
    s.add_rule({p->id + ".exclaim.a." + std::to_string(i), p->path_a[i + 1], p->a_chain,
                [ctx, p, i, edges_a](Session& ss) {
                  if (!contract_live(ctx, p->sc_a[i])) return false;
                  if (!ctx->ln->secret(ss.world(), p->h_ex).has_value()) return false;
                  if (i + 1 < edges_a) {
                    return ctx->claimed.count(p->sc_a[i + 1]) > 0 ||
                           !contract_live(ctx, p->sc_a[i + 1]);
                  }
                  return true;
                },
                [p, i](Session& ss) {
                  return ss.timed_options(Action::Claim, ss.now(), {p->sc_expiry_a(i)}, true,
                                          Action::Wait);
                },
                [ctx, p, i](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, p->a_chain, p->path_a[i + 1], [ctx, p, i](Session& s2) {
                    const auto secret = ctx->ln->secret(s2.world(), p->h_ex);
                    if (secret) do_claim(s2, ctx, p->sc_a[i], *secret);
                  });
                }});
  }
  for (std::size_t i = 0; i < edges_a; ++i) {
    s.add_rule({p->id + ".refund.sa." + std::to_string(i), p->path_a[i], p->a_chain,
                [ctx, p, i](Session& ss) {
                  return ss.now() >= p->sc_expiry_a(i) && contract_live(ctx, p->sc_a[i]);
                },
                [p, i](Session& ss) {
                  return ss.timed_options(Action::PublishRefund, ss.now(), {p->sc_expiry_a(i)},
                                          false, Action::Wait);
                },
                [ctx, p, i](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, p->a_chain, p->path_a[i],
                              [ctx, p, i](Session& s2) { do_refund(s2, ctx, p->sc_a[i]); });
                }});
  }
  for (std::size_t i = 0; i < edges_b; ++i) {
    s.add_rule({p->id + ".refund.sb." + std::to_string(i), p->path_b[i], p->b_chain,
                [ctx, p, i](Session& ss) {
                  return ss.now() >= p->sc_expiry_b(i) && contract_live(ctx, p->sc_b[i]);
                },
                [p, i](Session& ss) {
                  return ss.timed_options(Action::PublishRefund, ss.now(), {p->sc_expiry_b(i)},
                                          false, Action::Wait);
                },
                [ctx, p, i](Session& ss, const MoveOption& mo) {
                  ss.schedule(mo.at, p->b_chain, p->path_b[i],
                              [ctx, p, i](Session& s2) { do_refund(s2, ctx, p->sc_b[i]); });
                }});
  }
}

}  // namespace

RunResult run_positions(World& world, LnState& ln, std::vector<RoutedPosition*> positions,
                        const StrategyTable& strategies, TimePoint horizon) {
  std::set<PartyId> party_set;
  for (const auto* pos : positions) {
    for (const auto& p : pos->path_a) party_set.insert(p);
    for (const auto& p : pos->path_b) party_set.insert(p);
  }
  const std::vector<PartyId> parties(party_set.begin(), party_set.end());

  auto ctx = std::make_shared<LnRunCtx>();
  ctx->world = &world;
  ctx->ln = &ln;
  for (auto* pos : positions) ctx->positions[pos->id] = pos;

  std::map<std::pair<PartyId, ChainId>, Amount> initial;
  for (const auto& [chain_id, cs] : world.chains) {
    for (const auto& party : parties) {
      initial[{party, chain_id}] = ln.total_of(world, party, chain_id);
    }
  }

  Session s(world, strategies, parties);
  s.set_horizon(horizon);
  for (auto* pos : positions) install_position_rules(s, ctx, *pos);
  s.snapshot_initial();
  s.run_to_horizon();
  RunResult rr = s.result();
  rr.outcome.initial = initial;
  for (auto& [key, amount] : rr.outcome.balances) {
    amount = ln.total_of(world, key.first, key.second);
  }
  return rr;
}

std::pair<RoutedPosition, RoutedPosition> decouple(World& world, LnState& ln,
                                                   const RoutedPosition& pos,
                                                   const PartyId& node,
                                                   const Secret& node_secret) {
  (void)world;
  if (!pos.funded) throw ScenarioError("decouple expects a funded position");
  const auto a_it = std::find(pos.path_a.begin(), pos.path_a.end(), node);
  const auto b_it = std::find(pos.path_b.begin(), pos.path_b.end(), node);
  if (a_it == pos.path_a.end() || b_it == pos.path_b.end() || node == pos.holder ||
      node == pos.writer) {
    throw ScenarioError("decoupling node must be interior to both paths");
  }
  const std::size_t ai = static_cast<std::size_t>(a_it - pos.path_a.begin());
  const std::size_t bi = static_cast<std::size_t>(b_it - pos.path_b.begin());

  RoutedPosition near;  // holder .. node, keeps the original secrets
  near.id = pos.id + ".near";
  near.a_chain = pos.a_chain;
  near.b_chain = pos.b_chain;
  near.path_a.assign(pos.path_a.begin(), a_it + 1);
  near.path_b.assign(b_it, pos.path_b.end());
  near.premium = pos.premium;
  near.p_a = pos.p_a;
  near.p_b = pos.p_b;
  near.fund_secret = pos.fund_secret;
  near.ex_secret = pos.ex_secret;
  near.h_fund = pos.h_fund;
  near.h_ex = pos.h_ex;
  near.holder = pos.holder;
  near.writer = node;
  near.T = pos.T;
  near.E = pos.E;
  near.mimic_upstream = pos.mimic_upstream;
  near.sc_a.assign(pos.sc_a.begin(), pos.sc_a.begin() + ai);
  near.sc_b.assign(pos.sc_b.begin() + bi, pos.sc_b.end());
  near.fc_a.resize(near.sc_a.size());
  near.fc_b.resize(near.sc_b.size());
  near.funded = true;

  RoutedPosition far;  // node .. writer, re-keyed to the node's own secrets
  far.id = pos.id + ".far";
  far.a_chain = pos.a_chain;
  far.b_chain = pos.b_chain;
  far.path_a.assign(a_it, pos.path_a.end());
  far.path_b.assign(pos.path_b.begin(), b_it + 1);
  far.premium = pos.premium;
  far.p_a = pos.p_a;
  far.p_b = pos.p_b;
  far.fund_secret = pos.fund_secret;
  far.ex_secret = node_secret;
  far.h_fund = pos.h_fund;
  far.h_ex = hash_secret(far.ex_secret);
  far.holder = node;
  far.writer = pos.writer;
  far.T = pos.T;
  far.E = pos.E;
  far.mimic_upstream = near.id;
  far.sc_a.assign(pos.sc_a.begin() + ai, pos.sc_a.end());
  far.sc_b.assign(pos.sc_b.begin(), pos.sc_b.begin() + bi);
  far.fc_a.resize(far.sc_a.size());
  far.fc_b.resize(far.sc_b.size());
  far.funded = true;

  // Cooperative re-key: the far-side contracts move to the node's exercise
  // secret, and every contract's expiry shrinks to its sub-path staircase.
  auto rewrite = [&](RoutedPosition& np, bool a_side) {
    auto& ids = a_side ? np.sc_a : np.sc_b;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (auto& [chid, ch] : ln.channels) {
        const auto it = ch.contracts.find(ids[i]);
        if (it == ch.contracts.end()) continue;
        it->second.hash = np.h_ex;
        it->second.expiry = a_side ? np.sc_expiry_a(i) : np.sc_expiry_b(i);
      }
    }
  };
  rewrite(near, true);
  rewrite(near, false);
  rewrite(far, true);
  rewrite(far, false);
  return {near, far};
}

void rekey_position(LnState& ln, RoutedPosition& pos, const Hash& h_ex, TimePoint new_E,
                    const std::string& mimic_upstream) {
  if (!pos.funded) throw ScenarioError("rekey expects a funded position");
  pos.h_ex = h_ex;
  pos.E = new_E;
  if (!mimic_upstream.empty()) pos.mimic_upstream = mimic_upstream;
  auto rewrite = [&](const std::vector<std::string>& ids, bool a_side) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (auto& [chid, ch] : ln.channels) {
        const auto it = ch.contracts.find(ids[i]);
        if (it == ch.contracts.end()) continue;
        it->second.hash = h_ex;
        it->second.expiry = a_side ? pos.sc_expiry_a(i) : pos.sc_expiry_b(i);
      }
    }
  };
  rewrite(pos.sc_a, true);
  rewrite(pos.sc_b, false);
}

Trace unwind(World& world, LnState& ln, RoutedPosition& inner, RoutedPosition& outer) {
  if (!inner.bilateral() || !outer.bilateral()) {
    throw ScenarioError("unwind expects bilateral positions");
  }
  if (!(inner.holder == outer.writer && inner.writer == outer.holder)) {
    throw ScenarioError("unwind expects opposite positions between the same parties");
  }
  if (inner.p_a != outer.p_a || inner.p_b != outer.p_b) {
    throw ScenarioError("unwind refused: strikes differ");
  }
  if (inner.h_ex != outer.h_ex) {
    throw ScenarioError("unwind refused: positions use different secrets");
  }
  if (outer.E != inner.E + 1) {
    throw ScenarioError("unwind refused: outer position must expire one step later");
  }
  if (!inner.funded || !outer.funded) throw ScenarioError("unwind expects funded positions");

  Trace trace;
  auto remove_contract = [&](const std::string& cid) {
    for (auto& [chid, ch] : ln.channels) {
      const auto it = ch.contracts.find(cid);
      if (it == ch.contracts.end()) continue;
      const LnContract c = it->second;
      ContractDelta delta;
      delta.remove.push_back(cid);
      const Amount new_a = ch.balance_a + (ch.a == c.payer ? c.amount : 0);
      const Amount new_b = ch.balance_b + (ch.b == c.payer ? c.amount : 0);
      if (!update_channel(ch, new_a, new_b, delta)) {
        throw ScenarioError("unwind update failed for " + cid);
      }
      trace.events.push_back(TraceEvent{world.now, ch.chain, c.payer, "unwind:" + cid, "",
                                        {{"returned", c.amount}}});
      return true;
    }
    throw ScenarioError("unwind: contract not live in any channel: " + cid);
  };
  for (const auto& id : inner.sc_a) remove_contract(id);
  for (const auto& id : inner.sc_b) remove_contract(id);
  for (const auto& id : outer.sc_a) remove_contract(id);
  for (const auto& id : outer.sc_b) remove_contract(id);
  inner.funded = false;
  outer.funded = false;
  return trace;
}

}  // namespace swapsim
