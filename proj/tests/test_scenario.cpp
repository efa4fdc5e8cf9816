#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "swapsim/scenario.hpp"

using namespace swapsim;

TEST_CASE("the bundled swaption scenario parses to the documented terms") {
  const auto parsed = parse_scenario_file("../scenarios/fig3_swaption_exercise.scn");
  REQUIRE(parsed.ok());
  const auto& sc = *parsed.scenario;
  CHECK(sc.kind == ProtocolKind::Swaption);
  CHECK(sc.swaption.premium == kCoin / 10);
  CHECK(sc.swaption.p_a == kCoin);
  CHECK(sc.swaption.p_b == kCoin);
  CHECK(sc.swaption.E == 100);
  CHECK(sc.swaption.T == 10);
  CHECK(sc.wallets.at("alice").at("ACoin") == kCoin + kCoin / 10);
  CHECK(sc.honest == std::set<PartyId>{"bob"});
}

TEST_CASE("margin expiry at or past the swaption expiry is rejected") {
  const std::string text = R"(
[parties]
alice ACoin=1.1
bob BCoin=1.0
[protocol]
kind = margin_swaption
premium = 0.1
p_a = 1.0
p_b = 1.0
m_a = 0.2
m_b = 0.2
T = 10
M = 100
E = 100
)";
  const auto parsed = parse_scenario(text);
  REQUIRE_FALSE(parsed.ok());
  bool found = false;
  for (const auto& e : parsed.errors) {
    if (e.message.find("margin expiry must precede swaption expiry") != std::string::npos) {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("empty input is a syntax error") {
  const auto parsed = parse_scenario("");
  REQUIRE_FALSE(parsed.ok());
  CHECK(parsed.errors.size() == 1);
  CHECK(parsed.errors[0].message == "empty scenario");
}

TEST_CASE("unknown protocol and bad keys are reported with line numbers") {
  const std::string text = R"([protocol]
kind = teleport
premum = 0.1
)";
  const auto parsed = parse_scenario(text);
  REQUIRE_FALSE(parsed.ok());
  REQUIRE(parsed.errors.size() >= 2);
  CHECK(parsed.errors[0].line == 2);
  CHECK(parsed.errors[0].message == "unknown protocol: teleport");
  CHECK(parsed.errors[1].line == 3);
  CHECK(parsed.errors[1].message == "unknown protocol key: premum");
}

TEST_CASE("strategy keys are validated against the protocol's rule set") {
  const std::string text = R"(
[parties]
alice ACoin=1.0
bob BCoin=1.0
[protocol]
kind = swap
[strategy.alice]
acccept = renege
)";
  const auto parsed = parse_scenario(text);
  REQUIRE_FALSE(parsed.ok());
  CHECK(parsed.errors[0].message.find("unknown strategy rule") != std::string::npos);
}

TEST_CASE("wallets must reference declared chains") {
  const std::string text = R"(
[chains]
ACoin
[parties]
alice DCoin=1.0
[protocol]
kind = swap
)";
  const auto parsed = parse_scenario(text);
  REQUIRE_FALSE(parsed.ok());
}

TEST_CASE("scenario runs are deterministic byte for byte") {
  const auto parsed = parse_scenario_file("../scenarios/fig4_cancel_cheat.scn");
  REQUIRE(parsed.ok());
  RunFlags flags;
  flags.records_format = true;
  std::ostringstream a, b;
  CHECK(run_scenario(*parsed.scenario, flags, a) == 0);
  CHECK(run_scenario(*parsed.scenario, flags, b) == 0);
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());
}

TEST_CASE("records format carries the documented field layout") {
  const auto parsed = parse_scenario_file("../scenarios/fig1_htlc_accept.scn");
  REQUIRE(parsed.ok());
  RunFlags flags;
  flags.records_format = true;
  std::ostringstream out;
  REQUIRE(run_scenario(*parsed.scenario, flags, out) == 0);
  std::istringstream lines(out.str());
  std::string line;
  bool saw_publish = false;
  while (std::getline(lines, line)) {
    if (line.rfind("balances:", 0) == 0 || line.rfind("disposition:", 0) == 0) continue;
    std::istringstream ls(line);
    std::string time, chain, party, event, id;
    REQUIRE((ls >> time >> chain >> party >> event >> id));
    if (event.rfind("publish:", 0) == 0) {
      saw_publish = true;
      CHECK(id.size() == 8);  // txid prefix
    } else {
      CHECK(id == "-");
    }
  }
  CHECK(saw_publish);
}

TEST_CASE("enumeration through the scenario surface finds the planted violation") {
  const auto good = parse_scenario_file("../scenarios/fig2_swap_accept.scn");
  const auto broken = parse_scenario_file("../scenarios/fig2_swap_misordered.scn");
  REQUIRE(good.ok());
  REQUIRE(broken.ok());
  RunFlags flags;
  flags.enumerate = true;
  std::ostringstream out_good, out_broken;
  CHECK(run_scenario(*good.scenario, flags, out_good) == 0);
  CHECK(run_scenario(*broken.scenario, flags, out_broken) == 1);
  CHECK(out_good.str().find("0 violations") != std::string::npos);
  CHECK(out_broken.str().find("VIOLATION") != std::string::npos);
}
