#include <string>

#include "doctest.h"
#include "dera/errors.hpp"
#include "dera/scenario.hpp"

using namespace dera;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text, "s.json");
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped scenarios parse") {
  const auto cases = parse_scenario(std::string(DERA_SCENARIO_DIR) + "/case_studies.json");
  REQUIRE(cases.population);
  CHECK(cases.population->n == 100);
  CHECK(cases.cases->ids.size() == 6);
  CHECK(cases.cases->gamma.values().size() == 11);
  CHECK(cases.cases->g.values().size() == 10);
  CHECK(cases.tariff.mode == TariffSpec::Mode::Ramsey);
  CHECK(cases.tariff.spread == 0.03);

  const auto toy = parse_scenario(std::string(DERA_SCENARIO_DIR) + "/sfe_toy.json");
  REQUIRE(toy.sfe);
  CHECK(toy.sfe->problem.participants.size() == 3);
  CHECK(toy.sfe->problem.demand == 2.5);

  const auto eff = parse_scenario(std::string(DERA_SCENARIO_DIR) + "/efficiency_check.json");
  CHECK(eff.population->kind == PopulationSpec::Kind::Random);
  CHECK(build_population(*eff.population).size() == 40);
}

TEST_CASE("empty and malformed documents") {
  CHECK(error_of("").find("s.json:1") == 0);
  const auto e = error_of("{\n  \"name\": \"x\",\n  \"lmp_usd_per_kwh\": ,\n}");
  CHECK(e.find("s.json:3") == 0);
  CHECK_THROWS_AS(parse_scenario("/nonexistent/scenario.json"), ScenarioError);
}

TEST_CASE("unknown keys are rejected with their line") {
  const auto e = error_of("{\n  \"name\": \"x\", \"seed\": 1,\n  \"population\": {\"n\": 2, \"kind\": \"random\", \"colour\": 1}\n}");
  CHECK(e.find("s.json:3") == 0);
  CHECK(e.find("population.colour: unknown key") != std::string::npos);
  CHECK(error_of("{\"name\": \"x\", \"extra\": 1}").find("extra: unknown key") != std::string::npos);
}

TEST_CASE("schema errors name the field") {
  CHECK(error_of("{}").find("name: missing required field") != std::string::npos);
  CHECK(error_of("{\"name\": 3}").find("name: expected a string") != std::string::npos);
  CHECK(error_of("{\"name\": \"x\", \"seed\": 1, \"population\": {\"n\": 0, \"kind\": \"random\"}}").find("population.n") !=
        std::string::npos);
  CHECK(error_of("{\"name\": \"x\", \"population\": {\"n\": 3, \"kind\": \"random\"}}").find("seed is mandatory") !=
        std::string::npos);
  const std::string bad_case =
      "{\"name\": \"x\", \"population\": {\"n\": 1, \"devices\": [{\"family\": \"quadratic\", \"alpha_usd_per_kwh\": 0.2, "
      "\"beta_usd_per_kwh2\": 0.2}]}, \"tariff\": {\"mode\": \"ramsey\"}, \"cases\": {\"ids\": [9], \"gamma\": "
      "{\"start\": 0, \"stop\": 1, \"step\": 0.5}, \"g_kwh\": {\"start\": 1, \"stop\": 1, \"step\": 1}}}";
  CHECK(error_of(bad_case).find("unknown case id 9") != std::string::npos);
  CHECK(error_of("{\"name\": \"x\", \"sfe\": {\"family\": \"power\", \"eta\": 1, \"demand_kwh\": 1, \"participants\": []}}")
            .find("sfe.eta") != std::string::npos);
  CHECK(error_of("{\"name\": \"x\", \"clearing\": {\"demand_kwh\": 1}}").find("a population is required") !=
        std::string::npos);
}

TEST_CASE("ranges include their end point") {
  const Range r{0.5, 5.0, 0.5};
  const auto v = r.values();
  CHECK(v.size() == 10);
  CHECK(v.back() == 5.0);
  CHECK(Range{0.0, 1.0, 0.1}.values().size() == 11);
}

TEST_CASE("seeded populations are reproducible") {
  const auto a = random_population(10, 42), b = random_population(10, 42), c = random_population(10, 43);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].g == b[i].g);
    CHECK(a[i].devices.size() == b[i].devices.size());
  }
  CHECK(a[0].g != c[0].g);
  PopulationSpec spec;
  spec.n = 4;
  spec.devices = {DeviceSpec{Quadratic{0.24, 0.24}, 0.0, 10.0}};
  spec.g_uniform = std::make_pair(1.0, 2.0);
  spec.seed = 7;
  const auto pop = build_population(spec);
  for (const auto& p : pop) CHECK((p.g >= 1.0 && p.g < 2.0));
}
