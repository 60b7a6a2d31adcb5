#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dera/errors.hpp"
#include "dera/runner.hpp"

using namespace dera;
namespace fs = std::filesystem;

namespace {

Scenario small_cases() {
  return parse_scenario_text(R"({
    "name": "small",
    "population": {"n": 20, "devices": [{"family": "quadratic", "alpha_usd_per_kwh": 0.24, "beta_usd_per_kwh2": 0.24}]},
    "tariff": {"mode": "ramsey", "spread_usd_per_kwh": 0.03},
    "lmp_usd_per_kwh": 0.03,
    "cases": {"ids": [1, 5], "gamma": {"start": 0, "stop": 1, "step": 0.5}, "g_kwh": {"start": 1, "stop": 2, "step": 1}}
  })");
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("case grid rows are ordered by grid index and independent of threads") {
  const auto s = small_cases();
  const auto one = run_case_grid(s, 1);
  const auto many = run_case_grid(s, 4);
  REQUIRE(one.size() == 3 * 2 * 2);
  CHECK(ledger_csv(one) == ledger_csv(many));
  CHECK(one[0].gamma == 0.0);
  CHECK(one[0].g == 1.0);
  CHECK(one[1].case_id == CaseId::DeraVsNem);
  CHECK(one[2].g == 2.0);
  CHECK(one.back().gamma == 1.0);
  const auto csv = ledger_csv(one);
  CHECK(csv.rfind("case_id,gamma,g,dera_surplus,consumer_surplus,producer_surplus,utility_surplus\r\n", 0) == 0);
}

TEST_CASE("sweep population puts producers first") {
  const auto s = small_cases();
  const auto pop = sweep_population(s, 0.25, 3.0);
  CHECK(pop.prosumers.size() == 20);
  CHECK(pop.prosumers[4].g == 3.0);
  CHECK(pop.prosumers[5].g == 0.0);
}

TEST_CASE("missing sections name the stage") {
  const auto s = small_cases();
  try {
    sfe_artifacts(s);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "sfe");
  }
  CHECK_THROWS_AS(bidcurve_artifacts(s), StageError);
}

TEST_CASE("manifest lists every file with its hash") {
  const auto s = small_cases();
  const Artifacts files{{"a.csv", "x"}, {"b.json", "{}"}};
  const auto m = manifest_json(s, "run", "input", files);
  CHECK(m.find("\"a.csv\"") != std::string::npos);
  CHECK(m.find("\"b.json\"") != std::string::npos);
  CHECK(m.find("af63dc4c8601ec8c") == std::string::npos);  // hash of "a", not "x"
  CHECK(m == manifest_json(s, "run", "input", files));
}

TEST_CASE("output directory collisions need --force") {
  const fs::path dir = fs::temp_directory_path() / "dera_runner_test";
  fs::remove_all(dir);
  const Artifacts files{{"f.txt", "hello"}};
  write_artifacts(dir.string(), files, false);
  CHECK_THROWS_AS(write_artifacts(dir.string(), files, false), StageError);
  const Artifacts changed{{"f.txt", "bye"}};
  write_artifacts(dir.string(), changed, true);
  std::ifstream in(dir / "f.txt");
  std::string content;
  std::getline(in, content);
  CHECK(content == "bye");
  fs::remove_all(dir);
}

TEST_CASE("sfe and nash artifacts for the toy scenario") {
  const auto s = parse_scenario(std::string(DERA_SCENARIO_DIR) + "/sfe_toy.json");
  const auto sfe = sfe_artifacts(s);
  REQUIRE(sfe.count("sfe.json"));
  CHECK(sfe.at("sfe.json").find("\"demand_kwh\": 2.5") != std::string::npos);
  const auto nash = nashcheck_artifacts(s);
  CHECK(nash.at("nash.json").find("\"equilibrium\": true") != std::string::npos);
}
