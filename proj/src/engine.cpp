#include "swapsim/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace swapsim {

void SwapTerms::validate() const {
  if (a_amount <= 0 || b_amount <= 0) throw ScenarioError("swap amounts must be positive");
  if (T < 2) throw ScenarioError("swap needs T >= 2 for execution room");
  if (alice == bob) throw ScenarioError("swap parties must be distinct");
}

void SwaptionTerms::validate() const {
  if (premium < 0) throw ScenarioError("premium must be non-negative");
  if (p_a <= 0 || p_b <= 0) throw ScenarioError("principals must be positive");
  if (alice == bob) throw ScenarioError("swaption parties must be distinct");
  if (T < 2) throw ScenarioError("funding swap needs T >= 2");
  if (E <= T) throw ScenarioError("swaption expiry must follow the funding swap expiry");
  if (margined) {
    if (!(m_a > 0 && m_a < p_a && m_b > 0 && m_b < p_b)) {
      throw ScenarioError("margined swaption needs 0 < margin < principal on both sides");
    }
    if (!(T < M)) throw ScenarioError("margin expiry must follow the funding swap expiry");
    if (!(M < E)) throw ScenarioError("margin expiry must precede swaption expiry");
    if (M + 1 >= E) throw ScenarioError("margin expiry must precede swaption expiry (M <= E-2)");
  }
}

Session::Session(World& world, const StrategyTable& strategies, std::vector<PartyId> parties,
                 std::string key_prefix)
    : world_(world),
      strategies_(strategies),
      parties_(std::move(parties)),
      key_prefix_(std::move(key_prefix)) {}

void Session::add_rule(Rule rule) { rules_.push_back(std::move(rule)); }

void Session::add_hook(std::function<bool(Session&)> hook) { hooks_.push_back(std::move(hook)); }

void Session::snapshot_initial() {
  for (const auto& [chain_id, cs] : world_.chains) {
    for (const auto& p : parties_) initial_[{p, chain_id}] = cs.balance_of(p);
  }
}

void Session::set_disposition(const std::string& key, const std::string& value) {
  dispositions_[key_prefix_ + key] = value;
}

bool Session::has_disposition(const std::string& key) const {
  return dispositions_.count(key_prefix_ + key) > 0;
}

void Session::note(const PartyId& party, const std::string& text) {
  trace_.events.push_back(TraceEvent{world_.now, "", party, "note:" + text, "", {}});
}

void Session::channel_event(const ChainId& chain, const PartyId& party, const std::string& text,
                            std::vector<std::pair<std::string, Amount>> amounts) {
  trace_.events.push_back(TraceEvent{world_.now, chain, party, text, "", std::move(amounts)});
}

bool Session::utxo_exists(const ChainId& chain, const OutPoint& op) const {
  return world_.chain(chain).find_utxo(op).has_value();
}

std::optional<TimePoint> Session::confirmed_time(const ChainId& chain, const OutPoint& op) const {
  const auto entry = world_.chain(chain).find_utxo(op);
  if (!entry) return std::nullopt;
  return entry->confirmed_at;
}

bool Session::secret_visible(const Hash& h) const {
  return scanned_secret(h).has_value();
}

std::optional<Secret> Session::scanned_secret(const Hash& h) const {
  const auto secrets = world_.visible_secrets();
  const auto it = secrets.find(h);
  if (it == secrets.end()) return std::nullopt;
  return it->second;
}

void Session::grant(const PartyId& to, const SignatureRecord& rec) {
  auto& held = grants_[to];
  if (std::find(held.begin(), held.end(), rec) == held.end()) held.push_back(rec);
}

bool Session::has_any_grant(const PartyId& holder, const PartyId& signer) const {
  const auto it = grants_.find(holder);
  if (it == grants_.end()) return false;
  for (const auto& rec : it->second) {
    if (rec.signer == signer) return true;
  }
  return false;
}

bool Session::publish_tx(const ChainId& chain, Transaction tx, const PartyId& publisher,
                         const std::string& label, const std::vector<Secret>& reveal) {
  Witness w;
  w.add_signature(sign(publisher, tx, SigMode::CommitAll));
  if (const auto it = grants_.find(publisher); it != grants_.end()) {
    for (const auto& rec : it->second) {
      for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
        if (signature_valid(rec, tx, i)) {
          w.add_signature(rec);
          break;
        }
      }
    }
  }
  for (const auto& s : reveal) w.add_preimage(s);
  for (auto& in : tx.inputs) in.witness = w;

  // A move that lost its race is skipped silently.
  for (const auto& in : tx.inputs) {
    if (!utxo_exists(chain, in.prevout)) return false;
  }
  const auto res = world_.publish(chain, tx);
  if (!res.ok()) {
    trace_.events.push_back(TraceEvent{world_.now, chain, publisher,
                                       "reject:" + label + ":" + publish_error_name(res.error),
                                       "", {}});
    return false;
  }
  TraceEvent ev{world_.now, chain, publisher, "publish:" + label, hex8(res.id), {}};
  for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
    std::string who = "contract";
    const auto& pred = tx.outputs[i].predicate;
    if (pred.kind == PredKind::SigLeaf) who = pred.party;
    ev.amounts.emplace_back("out" + std::to_string(i) + ":" + who, tx.outputs[i].amount);
  }
  trace_.events.push_back(std::move(ev));
  return true;
}

void Session::schedule(TimePoint t, const ChainId& chain, const PartyId& party,
                       std::function<void(Session&)> fire) {
  if (t < world_.now) throw std::logic_error("scheduling into the past");
  intents_.insert(Intent{t, chain, party, next_seq_++, std::move(fire)});
}

std::vector<MoveOption> Session::timed_options(Action action, TimePoint honest_at,
                                               const std::vector<TimePoint>& locks,
                                               bool include_lock_minus_one,
                                               std::optional<Action> passive) const {
  std::vector<MoveOption> out;
  auto push = [&](TimePoint t) {
    if (t < world_.now || t > horizon_) return;
    const MoveOption mo{action, t};
    if (std::find(out.begin(), out.end(), mo) == out.end()) out.push_back(mo);
  };
  push(honest_at);
  for (const auto X : locks) {
    if (include_lock_minus_one && X > 0) push(X - 1);
    push(X);
    push(X + 1);
  }
  if (passive || out.empty()) {
    out.push_back(MoveOption{passive.value_or(Action::Wait), world_.now});
  }
  return out;
}

bool Session::fire_due_intents() {
  bool any = false;
  while (!intents_.empty()) {
    const auto it = intents_.begin();
    if (it->t > world_.now) break;
    auto fire = it->fire;
    intents_.erase(it);
    fire(*this);
    any = true;
  }
  return any;
}

bool Session::run_hooks() {
  bool any = false;
  for (auto& hook : hooks_) {
    if (hook(*this)) any = true;
  }
  return any;
}

bool Session::consult_rules() {
  // Deterministic consult order: (chain, party, key).
  std::vector<const Rule*> pending;
  for (const auto& r : rules_) {
    if (!decided_.count(r.key)) pending.push_back(&r);
  }
  std::sort(pending.begin(), pending.end(), [](const Rule* a, const Rule* b) {
    return std::tie(a->chain, a->party, a->key) < std::tie(b->chain, b->party, b->key);
  });
  bool any = false;
  for (const Rule* r : pending) {
    if (!r->enabled(*this)) continue;
    decided_.insert(r->key);
    DecisionPoint dp;
    dp.key = key_prefix_ + r->key;
    dp.party = r->party;
    dp.at = world_.now;
    dp.legal = r->options(*this);
    if (dp.legal.empty()) continue;
    const MoveOption chosen = strategies_.get(r->party).decide(dp);
    trace_.events.push_back(TraceEvent{world_.now, r->chain, r->party, "decide:" + dp.key + "=" +
                                       chosen.to_string(), "", {}});
    any = true;
    if (chosen.action != Action::Wait) r->on_choose(*this, chosen);
  }
  return any;
}

bool Session::step() {
  bool any = false;
  for (;;) {
    bool fired = false;
    if (fire_due_intents()) fired = true;
    if (run_hooks()) fired = true;
    if (consult_rules()) fired = true;
    if (!fired) break;
    any = true;
  }
  return any;
}

void Session::run_to_horizon() {
  // Intents may have been scheduled during installation (none currently),
  // so process from the current time.
  while (true) {
    step();
    if (world_.now >= horizon_) break;
    world_.advance_clock(1);
  }
}

RunResult Session::result() const {
  RunResult rr;
  rr.trace = trace_;
  rr.outcome = snapshot_outcome(world_, parties_, initial_);
  rr.outcome.dispositions = dispositions_;
  return rr;
}

}  // namespace swapsim
