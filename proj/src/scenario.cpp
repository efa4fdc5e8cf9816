#include "swapsim/scenario.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "swapsim/enumerate.hpp"
#include "swapsim/sha256.hpp"

namespace swapsim {

std::vector<PartyId> Scenario::parties() const {
  std::set<PartyId> set;
  for (const auto& [p, w] : wallets) set.insert(p);
  switch (kind) {
    case ProtocolKind::Htlc:
      set.insert(htlc.payer);
      set.insert(htlc.payee);
      break;
    case ProtocolKind::Swap:
      set.insert(swap.alice);
      set.insert(swap.bob);
      break;
    default:
      set.insert(swaption.alice);
      set.insert(swaption.bob);
      break;
  }
  for (const auto& p : path_a) set.insert(p);
  for (const auto& p : path_b) set.insert(p);
  return {set.begin(), set.end()};
}

namespace {

struct Parser {
  std::vector<ParseIssue> errors;
  Scenario sc;
  int line_no = 0;

  void fail(const std::string& msg) { errors.push_back(ParseIssue{line_no, msg}); }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
      if (c == sep) {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    out.push_back(trim(cur));
    return out;
  }

  Amount amount_or_fail(const std::string& s) {
    try {
      return parse_amount(s);
    } catch (const std::exception& e) {
      fail(e.what());
      return 0;
    }
  }

  TimePoint time_or_fail(const std::string& s) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail("bad time value: " + s);
      return 0;
    }
  }

  Rational ratio_or_fail(const std::string& s) {
    try {
      return parse_ratio(s);
    } catch (const std::exception& e) {
      fail(e.what());
      return Rational(1);
    }
  }

  void protocol_kv(const std::string& key, const std::string& value) {
    auto& t = sc.swaption;
    if (key == "kind") {
      static const std::map<std::string, ProtocolKind> kinds = {
          {"htlc", ProtocolKind::Htlc},
          {"swap", ProtocolKind::Swap},
          {"swaption", ProtocolKind::Swaption},
          {"swaption_cancel", ProtocolKind::SwaptionCancel},
          {"margin_swaption", ProtocolKind::MarginSwaption},
          {"future", ProtocolKind::Future},
          {"payoff_table", ProtocolKind::PayoffTable},
          {"routed_swaption", ProtocolKind::RoutedSwaption},
          {"fig7_unwind", ProtocolKind::Fig7Unwind},
      };
      const auto it = kinds.find(value);
      if (it == kinds.end()) {
        fail("unknown protocol: " + value);
        return;
      }
      sc.kind = it->second;
      if (sc.kind == ProtocolKind::SwaptionCancel) t.cancellable = true;
      if (sc.kind == ProtocolKind::MarginSwaption || sc.kind == ProtocolKind::Future) {
        t.margined = true;
      }
    } else if (key == "amount") {
      sc.htlc.amount = amount_or_fail(value);
    } else if (key == "payer") {
      sc.htlc.payer = value;
    } else if (key == "payee") {
      sc.htlc.payee = value;
    } else if (key == "chain") {
      sc.htlc.chain = value;
    } else if (key == "a_amount") {
      sc.swap.a_amount = amount_or_fail(value);
    } else if (key == "b_amount") {
      sc.swap.b_amount = amount_or_fail(value);
    } else if (key == "premium") {
      t.premium = amount_or_fail(value);
    } else if (key == "p_a") {
      t.p_a = amount_or_fail(value);
    } else if (key == "p_b") {
      t.p_b = amount_or_fail(value);
    } else if (key == "m_a") {
      t.m_a = amount_or_fail(value);
    } else if (key == "m_b") {
      t.m_b = amount_or_fail(value);
    } else if (key == "T") {
      t.T = sc.swap.T = sc.htlc.T = time_or_fail(value);
    } else if (key == "E") {
      t.E = time_or_fail(value);
    } else if (key == "M") {
      t.M = time_or_fail(value);
    } else if (key == "expiry_a") {
      sc.swap.expiry_a = time_or_fail(value);
    } else if (key == "expiry_b") {
      sc.swap.expiry_b = time_or_fail(value);
    } else if (key == "margin_expiry_a") {
      t.margin_expiry_a = time_or_fail(value);
    } else if (key == "margin_expiry_b") {
      t.margin_expiry_b = time_or_fail(value);
    } else if (key == "cancellable") {
      t.cancellable = value == "true";
    } else if (key == "margined") {
      t.margined = value == "true";
    } else if (key == "rational") {
      sc.rational = value == "true";
    } else if (key == "grid") {
      const auto parts = split(value, ':');
      if (parts.size() != 3) {
        fail("grid must be LO:HI:STEP");
        return;
      }
      sc.grid_lo = ratio_or_fail(parts[0]);
      sc.grid_hi = ratio_or_fail(parts[1]);
      sc.grid_step = ratio_or_fail(parts[2]);
    } else if (key == "numeraire") {
      if (value == "acoin") sc.numeraire = Numeraire::ACoin;
      else if (value == "bcoin") sc.numeraire = Numeraire::BCoin;
      else fail("numeraire must be acoin or bcoin");
    } else {
      fail("unknown protocol key: " + key);
    }
  }

  void parse(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    bool any = false;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = trim(raw);
      const auto hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line = trim(line.substr(0, hash_pos));
      if (line.empty()) continue;
      any = true;
      if (line.front() == '[') {
        if (line.back() != ']') {
          fail("unterminated section header");
          continue;
        }
        section = line.substr(1, line.size() - 2);
        continue;
      }
      if (section == "chains") {
        sc.chains.push_back(line);
      } else if (section == "parties") {
        std::istringstream ls(line);
        std::string name;
        ls >> name;
        if (name.empty()) {
          fail("party line needs a name");
          continue;
        }
        auto& wallet = sc.wallets[name];
        std::string assign;
        while (ls >> assign) {
          const auto eq = assign.find('=');
          if (eq == std::string::npos) {
            fail("wallet entries look like CHAIN=AMOUNT");
            break;
          }
          wallet[assign.substr(0, eq)] = amount_or_fail(assign.substr(eq + 1));
        }
      } else if (section == "protocol") {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
          fail("protocol entries look like key = value");
          continue;
        }
        protocol_kv(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
      } else if (section.rfind("strategy.", 0) == 0) {
        const PartyId party = section.substr(9);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
          fail("strategy entries look like rule = action[@time]");
          continue;
        }
        ScriptEntry entry;
        entry.key = trim(line.substr(0, eq));
        std::string action_text = trim(line.substr(eq + 1));
        const auto at_pos = action_text.find('@');
        if (at_pos != std::string::npos) {
          entry.at = time_or_fail(trim(action_text.substr(at_pos + 1)));
          action_text = trim(action_text.substr(0, at_pos));
        }
        const auto action = action_from_name(action_text);
        if (!action) {
          fail("unknown action: " + action_text);
          continue;
        }
        entry.action = *action;
        sc.scripts[party].push_back(entry);
      } else if (section == "price") {
        std::istringstream ls(line);
        std::string t_text, r_text;
        ls >> t_text >> r_text;
        if (r_text.empty()) {
          fail("price lines look like TIME RATIO");
          continue;
        }
        try {
          sc.prices.add(time_or_fail(t_text), ratio_or_fail(r_text));
        } catch (const std::exception& e) {
          fail(e.what());
        }
      } else if (section == "channels") {
        std::istringstream ls(line);
        ChannelSpec ch;
        std::string fa, fb;
        ls >> ch.a >> ch.b >> ch.chain >> fa >> fb;
        if (fb.empty()) {
          fail("channel lines look like A B CHAIN FUND_A FUND_B");
          continue;
        }
        ch.fund_a = amount_or_fail(fa);
        ch.fund_b = amount_or_fail(fb);
        sc.channels.push_back(ch);
      } else if (section == "route") {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
          fail("route entries look like path_a = a,b,c");
          continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const auto names = split(line.substr(eq + 1), ',');
        if (key == "path_a") sc.path_a = {names.begin(), names.end()};
        else if (key == "path_b") sc.path_b = {names.begin(), names.end()};
        else fail("unknown route key: " + key);
      } else if (section == "enumerate") {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
          fail("enumerate entries look like key = value");
          continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "honest") {
          for (const auto& name : split(value, ',')) sc.honest.insert(name);
        } else if (key == "depth") {
          sc.depth = static_cast<int>(time_or_fail(value));
        } else {
          fail("unknown enumerate key: " + key);
        }
      } else if (section.empty()) {
        fail("content before any [section]");
      } else {
        fail("unknown section: " + section);
      }
    }
    if (!any) {
      line_no = 1;
      fail("empty scenario");
    }
  }

  void validate() {
    if (sc.chains.empty()) {
      sc.chains = {"ACoin", "BCoin"};
    }
    std::set<ChainId> chain_set(sc.chains.begin(), sc.chains.end());
    if (chain_set.size() != sc.chains.size()) fail("duplicate chain names");
    for (const auto& [party, wallet] : sc.wallets) {
      for (const auto& [chain, amount] : wallet) {
        if (!chain_set.count(chain)) fail("wallet references unknown chain: " + chain);
      }
    }
    for (const auto& ch : sc.channels) {
      if (!chain_set.count(ch.chain)) fail("channel references unknown chain: " + ch.chain);
    }
    try {
      switch (sc.kind) {
        case ProtocolKind::Htlc:
          if (sc.htlc.payer == sc.htlc.payee) throw ScenarioError("payer and payee must differ");
          break;
        case ProtocolKind::Swap:
          sc.swap.validate();
          break;
        case ProtocolKind::PayoffTable:
          break;
        default:
          sc.swaption.validate();
          break;
      }
    } catch (const std::exception& e) {
      fail(e.what());
    }
    // Strategy keys must exist for the selected protocol.
    std::set<std::string> known;
    switch (sc.kind) {
      case ProtocolKind::Htlc:
        for (const auto& k : rule_keys_htlc()) known.insert(k);
        break;
      case ProtocolKind::Swap:
        for (const auto& k : rule_keys_swap()) known.insert(k);
        break;
      case ProtocolKind::Swaption:
      case ProtocolKind::SwaptionCancel:
      case ProtocolKind::MarginSwaption:
        for (const auto& k : rule_keys_swaption(sc.swaption)) known.insert(k);
        break;
      default:
        break;  // routed/future keys are position-scoped; checked at run time
    }
    if (!known.empty()) {
      for (const auto& [party, entries] : sc.scripts) {
        for (const auto& e : entries) {
          if (!known.count(e.key)) fail("unknown strategy rule for " + party + ": " + e.key);
        }
      }
    }
  }
};

}  // namespace

ParseResult parse_scenario(const std::string& text, const std::string& name) {
  Parser p;
  p.sc.name = name;
  p.parse(text);
  p.validate();
  ParseResult result;
  result.errors = p.errors;
  if (result.errors.empty()) result.scenario = std::move(p.sc);
  return result;
}

ParseResult parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.errors.push_back(ParseIssue{0, "cannot open scenario file: " + path});
    return r;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  const auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return parse_scenario(buf.str(), name);
}

StrategyTable strategies_for(const Scenario& sc) {
  if (sc.rational) {
    if (sc.prices.empty()) throw ScenarioError("rational strategies need a [price] section");
    if (sc.kind == ProtocolKind::Future) {
      return rational_future_strategies(sc.swaption, sc.prices);
    }
    return rational_strategies(sc.swaption, sc.prices);
  }
  StrategyTable table = StrategyTable::all_honest(sc.parties());
  for (const auto& [party, entries] : sc.scripts) {
    auto strat = std::make_shared<ScriptedStrategy>();
    for (const auto& e : entries) strat->script(e.key, e.action, e.at);
    table.by_party[party] = strat;
  }
  return table;
}

namespace {

World world_for(const Scenario& sc) {
  World w;
  for (const auto& chain : sc.chains) w.add_chain(chain);
  for (const auto& [party, wallet] : sc.wallets) {
    for (const auto& [chain, amount] : wallet) {
      if (amount > 0) w.seed(chain, party, amount);
    }
  }
  return w;
}

void seed_default_wallets(const Scenario& sc, World& w) {
  if (!sc.wallets.empty()) return;
  switch (sc.kind) {
    case ProtocolKind::Htlc:
      w.seed(sc.htlc.chain, sc.htlc.payer, sc.htlc.amount);
      break;
    case ProtocolKind::Swap:
      seed_for_swap(w, sc.swap);
      break;
    case ProtocolKind::Future:
      seed_for_future(w, sc.swaption);
      break;
    default:
      seed_for_swaption(w, sc.swaption);
      break;
  }
}

RunResult execute_routed(const Scenario& sc, const StrategyTable& strategies) {
  World w = world_for(sc);
  LnState ln;
  for (const auto& chspec : sc.channels) {
    open_channel(w, ln, chspec.chain, chspec.a, chspec.b, chspec.fund_a, chspec.fund_b);
  }
  RouteSpec spec;
  spec.id = "pos1";
  spec.path_a = sc.path_a;
  spec.path_b = sc.path_b;
  spec.terms = sc.swaption;
  auto pos = make_position(spec);
  return run_positions(w, ln, {&pos}, strategies, pos.E + 2 * (sc.path_a.size() + 2));
}

/// The routed figure: sell through an intermediary, decouple both trades,
/// cancel the offsetting pair, then settle what remains.
RunResult execute_fig7(const Scenario& sc, const StrategyTable& strategies) {
  if (sc.path_a.size() != 3 || sc.path_b.size() != 3) {
    throw ScenarioError("fig7_unwind expects three-party routes");
  }
  World w = world_for(sc);
  LnState ln;
  for (const auto& chspec : sc.channels) {
    open_channel(w, ln, chspec.chain, chspec.a, chspec.b, chspec.fund_a, chspec.fund_b);
  }
  const PartyId holder = sc.path_a.front();   // alice
  const PartyId node = sc.path_a[1];          // carol
  const PartyId writer = sc.path_a.back();    // bob
  const PartyId dave = "dave";

  std::map<std::pair<PartyId, ChainId>, Amount> initial;
  for (const auto& p : sc.parties()) {
    for (const auto& c : sc.chains) initial[{p, c}] = ln.total_of(w, p, c);
  }
  Trace all;

  RouteSpec r1;
  r1.id = "pos1";
  r1.path_a = sc.path_a;
  r1.path_b = sc.path_b;
  r1.terms = sc.swaption;
  auto pos1 = make_position(r1);
  StrategyTable fund1 = strategies;
  auto s1 = std::make_shared<ScriptedStrategy>();
  s1->script("pos1.exercise", Action::LetExpire);
  fund1.by_party[holder] = s1;
  auto rr1 = run_positions(w, ln, {&pos1}, fund1, pos1.T + 4);
  for (auto& e : rr1.trace.events) all.events.push_back(std::move(e));
  if (!pos1.funded) throw ScenarioError("fig7: first route failed to fund");
  auto [p1_near, p1_far] = decouple(w, ln, pos1, node, secret_from_label("fig7." + node));

  RouteSpec r2;
  r2.id = "pos2";
  r2.path_a = {node, holder, dave};
  r2.path_b = {dave, holder, node};
  r2.terms = sc.swaption;
  r2.terms.T = w.now + sc.swaption.T;
  r2.terms.E = sc.swaption.E + 1;
  auto pos2 = make_position(r2);
  StrategyTable fund2 = strategies;
  auto s2 = std::make_shared<ScriptedStrategy>();
  s2->script("pos2.exercise", Action::LetExpire);
  fund2.by_party[node] = s2;
  auto rr2 = run_positions(w, ln, {&pos2}, fund2, r2.terms.T + 4);
  for (auto& e : rr2.trace.events) all.events.push_back(std::move(e));
  if (!pos2.funded) throw ScenarioError("fig7: second route failed to fund");
  auto [p2_near, p2_far] = decouple(w, ln, pos2, holder, secret_from_label("fig7." + holder));

  rekey_position(ln, p2_near, p1_near.h_ex, p1_near.E + 1, p1_near.id);
  Trace unwound = unwind(w, ln, p1_near, p2_near);
  for (auto& e : unwound.events) all.events.push_back(std::move(e));

  auto rr3 = run_positions(w, ln, {&p1_far, &p2_far}, strategies,
                           std::max(p1_far.E, p2_far.E) + 6);
  for (auto& e : rr3.trace.events) all.events.push_back(std::move(e));

  RunResult combined;
  combined.trace = std::move(all);
  combined.outcome.initial = initial;
  for (const auto& p : sc.parties()) {
    for (const auto& c : sc.chains) combined.outcome.balances[{p, c}] = ln.total_of(w, p, c);
  }
  combined.outcome.dispositions["fig7"] = "unwound";
  return combined;
}

}  // namespace

RunResult execute_protocol(const Scenario& sc, const StrategyTable& strategies) {
  switch (sc.kind) {
    case ProtocolKind::Htlc: {
      World w = world_for(sc);
      seed_default_wallets(sc, w);
      return run_htlc_payment(w, sc.htlc, strategies);
    }
    case ProtocolKind::Swap: {
      World w = world_for(sc);
      seed_default_wallets(sc, w);
      return run_atomic_swap(w, sc.swap, strategies);
    }
    case ProtocolKind::Swaption: {
      World w = world_for(sc);
      seed_default_wallets(sc, w);
      return run_swaption(w, sc.swaption, strategies);
    }
    case ProtocolKind::SwaptionCancel: {
      World w = world_for(sc);
      seed_default_wallets(sc, w);
      return run_swaption_with_cancellation(w, sc.swaption, strategies);
    }
    case ProtocolKind::MarginSwaption: {
      World w = world_for(sc);
      seed_default_wallets(sc, w);
      return run_margin_swaption(w, sc.swaption, strategies,
                                 sc.prices.empty() ? PricePath::constant(1) : sc.prices);
    }
    case ProtocolKind::Future: {
      World w = world_for(sc);
      seed_default_wallets(sc, w);
      return open_future(w, sc.swaption, strategies,
                         sc.prices.empty() ? PricePath::constant(1) : sc.prices);
    }
    case ProtocolKind::RoutedSwaption:
      return execute_routed(sc, strategies);
    case ProtocolKind::Fig7Unwind:
      return execute_fig7(sc, strategies);
    case ProtocolKind::PayoffTable:
      throw ScenarioError("payoff_table scenarios produce a table, not a run");
  }
  throw ScenarioError("unhandled protocol kind");
}

ProtocolRun protocol_run_for(const Scenario& sc) {
  return ProtocolRun{sc.parties(), [sc](const StrategyTable& table) {
                       return execute_protocol(sc, table);
                     }};
}

Guarantee guarantee_for(const Scenario& sc, const PartyId& honest) {
  switch (sc.kind) {
    case ProtocolKind::Swap:
      return swap_guarantee(sc.swap, honest);
    case ProtocolKind::Swaption:
    case ProtocolKind::MarginSwaption:
      return swaption_guarantee(sc.swaption, honest);
    case ProtocolKind::SwaptionCancel: {
      const Guarantee base = swaption_guarantee(sc.swaption, honest);
      const Guarantee capture = cheat_capture_guarantee(sc.swaption);
      const bool check_capture = honest == sc.swaption.bob;
      return [base, capture, check_capture](const OutcomeRecord& rec) -> std::string {
        const std::string b = base(rec);
        if (!b.empty()) return b;
        return check_capture ? capture(rec) : "";
      };
    }
    case ProtocolKind::Htlc:
      return [sc, honest](const OutcomeRecord& rec) -> std::string {
        const auto& o = rec.outcome;
        const auto& chain = sc.htlc.chain;
        if (honest == sc.htlc.payer) {
          if (o.delta(honest, chain) >= 0) return "";
          return "payer lost funds without payment completing";
        }
        if (o.delta(honest, chain) >= 0) return "";
        return "payee balance decreased";
      };
    default:
      throw ScenarioError("no enumeration guarantee for this protocol kind");
  }
}

namespace {

void write_or_print(const RunFlags& flags, const std::string& scenario_name,
                    const std::string& suffix, const std::string& content, std::ostream& out) {
  if (flags.out_dir.empty()) {
    out << content;
    return;
  }
  const std::string path = flags.out_dir + "/" + scenario_name + suffix;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ScenarioError("cannot write: " + path);
  f << content;
}

}  // namespace

int run_scenario(const Scenario& sc, const RunFlags& flags, std::ostream& out) {
  if (sc.kind == ProtocolKind::PayoffTable) {
    const auto grid = make_grid(flags.grid_lo.value_or(sc.grid_lo),
                                flags.grid_hi.value_or(sc.grid_hi),
                                flags.grid_step.value_or(sc.grid_step));
    const auto curve = payoff_curve(sc.swaption, grid, flags.numeraire.value_or(sc.numeraire));
    write_or_print(flags, sc.name, ".payoff.txt", payoff_table_text(curve), out);
    return 0;
  }

  const StrategyTable table = strategies_for(sc);
  const RunResult rr = execute_protocol(sc, table);
  std::ostringstream report;
  report << (flags.records_format ? rr.trace.to_records() : rr.trace.to_text());
  report << "balances:";
  for (const auto& [key, amount] : rr.outcome.balances) {
    report << ' ' << key.first << '@' << key.second << '=' << format_amount(amount);
  }
  report << '\n';
  for (const auto& [k, v] : rr.outcome.dispositions) {
    report << "disposition: " << k << " = " << v << '\n';
  }
  write_or_print(flags, sc.name, flags.records_format ? ".trace.records" : ".trace.txt",
                 report.str(), out);

  int exit_code = 0;
  if (flags.enumerate) {
    const auto honest_set = flags.honest.value_or(sc.honest);
    if (honest_set.empty()) {
      throw ScenarioError("--enumerate needs an honest party (flag or [enumerate] section)");
    }
    const int depth = flags.depth.value_or(sc.depth);
    std::ostringstream safety;
    for (const auto& honest : honest_set) {
      const auto result = enumerate_strategies(protocol_run_for(sc), {honest}, depth);
      const auto rep = check_safety(result, guarantee_for(sc, honest));
      safety << "honest=" << honest << ": " << rep.to_string() << '\n';
      if (!rep.pass()) exit_code = 1;
    }
    write_or_print(flags, sc.name, ".safety.txt", safety.str(), out);
  }
  return exit_code;
}

}  // namespace swapsim
