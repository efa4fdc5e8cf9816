// Scenario runner for the cross-chain derivatives simulator.
//
//   swapsim run scenarios/fig2_swap_accept.scn
//   swapsim run fig2_swap_accept --enumerate --honest bob
//   swapsim run fig6_payoff --grid 0.5:2.0:0.01 --numeraire acoin
//
// Exit codes: 0 all checks passed, 1 safety violation found, 2 usage or
// parse error.

#include "CLI11.hpp"

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "swapsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace swapsim;

namespace {

std::string resolve_scenario(const std::string& arg, const std::string& dir) {
  if (fs::exists(arg)) return arg;
  for (const auto& candidate : {dir + "/" + arg, dir + "/" + arg + ".scn", arg + ".scn"}) {
    if (fs::exists(candidate)) return candidate;
  }
  return arg;  // parse_scenario_file reports the miss
}

struct JobResult {
  std::string name;
  int exit_code = 2;
  std::string output;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic cross-chain swap/swaption simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one or more scenario files");
  std::vector<std::string> scenario_args;
  std::string scenario_flag;
  std::string scenario_dir = "scenarios";
  bool enumerate = false;
  std::string honest_csv;
  int depth = -1;
  std::string grid_text;
  std::string numeraire_text;
  std::string format = "text";
  std::string out_dir;
  unsigned jobs = 1;

  run->add_option("scenarios", scenario_args, "scenario paths or bundled names");
  run->add_option("--scenario", scenario_flag, "scenario path (same as a positional)");
  run->add_option("--scenario-dir", scenario_dir, "where bundled names are looked up");
  run->add_flag("--enumerate", enumerate, "exhaustive adversary enumeration + safety report");
  run->add_option("--honest", honest_csv, "comma-separated honest parties for --enumerate");
  run->add_option("--depth", depth, "decision-point budget per adversary");
  run->add_option("--grid", grid_text, "price grid LO:HI:STEP (payoff tables)");
  run->add_option("--numeraire", numeraire_text, "acoin | bcoin");
  run->add_option("--format", format, "trace format: text | records")
      ->check(CLI::IsMember({"text", "records"}));
  run->add_option("--out", out_dir, "write per-scenario outputs into this directory");
  run->add_option("--jobs", jobs, "run independent scenarios in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!scenario_flag.empty()) scenario_args.push_back(scenario_flag);
  if (scenario_args.empty()) {
    std::cerr << "no scenario given\n";
    return 2;
  }

  RunFlags flags;
  flags.enumerate = enumerate;
  flags.records_format = format == "records";
  flags.out_dir = out_dir;
  if (depth >= 0) flags.depth = depth;
  if (!honest_csv.empty()) {
    std::set<PartyId> honest;
    std::stringstream ss(honest_csv);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) honest.insert(name);
    }
    flags.honest = honest;
  }
  try {
    if (!grid_text.empty()) {
      std::stringstream ss(grid_text);
      std::string lo, hi, step;
      if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') ||
          !std::getline(ss, step, ':')) {
        std::cerr << "--grid must be LO:HI:STEP\n";
        return 2;
      }
      flags.grid_lo = parse_ratio(lo);
      flags.grid_hi = parse_ratio(hi);
      flags.grid_step = parse_ratio(step);
    }
    if (!numeraire_text.empty()) {
      if (numeraire_text == "acoin") flags.numeraire = Numeraire::ACoin;
      else if (numeraire_text == "bcoin") flags.numeraire = Numeraire::BCoin;
      else {
        std::cerr << "--numeraire must be acoin or bcoin\n";
        return 2;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
  }

  std::vector<JobResult> results(scenario_args.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= scenario_args.size()) return;
      JobResult& jr = results[i];
      jr.name = scenario_args[i];
      std::ostringstream out;
      const auto parsed = parse_scenario_file(resolve_scenario(scenario_args[i], scenario_dir));
      if (!parsed.ok()) {
        for (const auto& e : parsed.errors) {
          out << scenario_args[i] << ":" << e.line << ": " << e.message << '\n';
        }
        jr.exit_code = 2;
        jr.output = out.str();
        continue;
      }
      try {
        jr.exit_code = run_scenario(*parsed.scenario, flags, out);
      } catch (const std::exception& e) {
        out << scenario_args[i] << ": " << e.what() << '\n';
        jr.exit_code = 2;
      }
      jr.output = out.str();
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, scenario_args.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int exit_code = 0;
  for (const auto& jr : results) {
    if (results.size() > 1) std::cout << "== " << jr.name << " ==\n";
    std::cout << jr.output;
    exit_code = std::max(exit_code, jr.exit_code);
  }
  return exit_code;
}
