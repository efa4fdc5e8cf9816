#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swapsim/econ.hpp"
#include "swapsim/engine.hpp"
#include "swapsim/enumerate.hpp"
#include "swapsim/lightning.hpp"

namespace swapsim {

enum class ProtocolKind {
  Htlc,
  Swap,
  Swaption,
  SwaptionCancel,
  MarginSwaption,
  Future,
  PayoffTable,
  RoutedSwaption,
  Fig7Unwind,
};

struct ChannelSpec {
  PartyId a, b;
  ChainId chain;
  Amount fund_a = 0, fund_b = 0;
};

struct ScriptEntry {
  std::string key;
  Action action = Action::Wait;
  std::optional<TimePoint> at;
};

struct Scenario {
  std::string name;
  ProtocolKind kind = ProtocolKind::Swap;
  std::vector<ChainId> chains;
  std::map<PartyId, std::map<ChainId, Amount>> wallets;

  HtlcPaymentTerms htlc;
  SwapTerms swap;
  SwaptionTerms swaption;
  bool rational = false;  // price-driven strategies instead of scripts

  std::map<PartyId, std::vector<ScriptEntry>> scripts;
  PricePath prices;

  std::vector<ChannelSpec> channels;
  std::vector<PartyId> path_a, path_b;

  // payoff_table defaults; CLI flags override
  Rational grid_lo = Rational(1, 2), grid_hi = Rational(2), grid_step = Rational(3, 400);
  Numeraire numeraire = Numeraire::ACoin;

  std::set<PartyId> honest;  // enumeration targets
  int depth = 24;

  std::vector<PartyId> parties() const;
};

struct ParseIssue {
  int line = 0;
  std::string message;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<ParseIssue> errors;

  bool ok() const { return scenario.has_value() && errors.empty(); }
};

ParseResult parse_scenario(const std::string& text, const std::string& name = "scenario");
ParseResult parse_scenario_file(const std::string& path);

struct RunFlags {
  bool enumerate = false;
  std::optional<std::set<PartyId>> honest;
  std::optional<int> depth;
  std::optional<Rational> grid_lo, grid_hi, grid_step;
  std::optional<Numeraire> numeraire;
  bool records_format = false;
  std::string out_dir;  // empty: stdout only
};

/// Executes one scenario. Exit code 0: run complete and all checks passed;
/// 1: a safety violation was found; 2: configuration error.
int run_scenario(const Scenario& scenario, const RunFlags& flags, std::ostream& out);

/// The enumeration harness a scenario configures (used by run_scenario and
/// the acceptance suite).
ProtocolRun protocol_run_for(const Scenario& scenario);
Guarantee guarantee_for(const Scenario& scenario, const PartyId& honest);

StrategyTable strategies_for(const Scenario& scenario);
RunResult execute_protocol(const Scenario& scenario, const StrategyTable& strategies);

}  // namespace swapsim
