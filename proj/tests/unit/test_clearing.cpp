#include <cmath>
#include <numeric>

#include "doctest.h"
#include "dera/clearing.hpp"
#include "dera/errors.hpp"
#include "dera/scenario.hpp"

using namespace dera;
using doctest::Approx;

namespace {

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<Prosumer> homogeneous(std::size_t n, double g_each) {
  std::vector<Prosumer> pop;
  for (std::size_t i = 0; i < n; ++i) pop.emplace_back(std::vector{UtilityFn::quadratic(0.24, 0.24)}, g_each);
  return pop;
}

}  // namespace

TEST_CASE("single aggregate curve clears at the intercept") {
  const auto pop = homogeneous(1000, 0.875);
  const std::vector<SupplyCurve> curves{aggregate_supply(pop)};
  const auto r = clear(curves, 0.0);
  CHECK(std::abs(r.price - 0.03) <= 1e-12);
  CHECK(std::abs(r.injections[0]) <= 1e-8);
}

TEST_CASE("identical curves split demand equally") {
  const auto pop = homogeneous(2, 2.0);
  const std::vector<SupplyCurve> curves{prosumer_supply(pop[0]), prosumer_supply(pop[1])};
  for (double demand : {-1.0, 0.5, 2.0, 3.5}) {
    const auto r = clear(curves, demand);
    CHECK(r.injections[0] == Approx(r.injections[1]));
    CHECK(std::abs(total(r.injections) - demand) <= 1e-8);
  }
}

TEST_CASE("demand at full capacity") {
  const auto pop = homogeneous(3, 1.0);
  std::vector<SupplyCurve> curves;
  for (const auto& p : pop) curves.push_back(prosumer_supply(p));
  const auto r = clear(curves, 3.0);
  CHECK(r.price == Approx(0.24));
  for (double inj : r.injections) CHECK(inj == Approx(1.0));
  CHECK_THROWS_AS(clear(curves, 3.5), InfeasibleError);
  CHECK_THROWS_AS(clear(std::vector<SupplyCurve>{}, 0.0), InfeasibleError);
}

TEST_CASE("plateau demand is rationed without breaking conservation") {
  // Step devices make the aggregate jump at price 0.5.
  const Prosumer a({UtilityFn::isoelastic(0.5, 0.0, 0.5, 2.0)}, 2.0);
  const Prosumer b({UtilityFn::isoelastic(0.5, 0.0, 0.5, 4.0)}, 4.0);
  const std::vector<SupplyCurve> curves{prosumer_supply(a), prosumer_supply(b)};
  const auto r = clear(curves, 3.0);
  CHECK(r.price == Approx(0.5));
  CHECK(std::abs(total(r.injections) - 3.0) <= 1e-8);
  // Jumps are 1.5 and 3.5 kWh, so demand is split 3:7.
  CHECK(r.injections[0] == Approx(0.9));
  CHECK(r.injections[1] == Approx(2.1));
}

TEST_CASE("direct and aggregated clearing agree") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pop = random_population(30, seed);
    const auto [direct, dera] = efficiency_check(pop, 5.0);
    CHECK(std::abs(direct.price - dera.price) <= 1e-8);
    CHECK(std::abs(direct.social_welfare - dera.social_welfare) <= 1e-6);
    CHECK(std::abs(total(direct.participant_surpluses) - total(dera.participant_surpluses)) <= 1e-6);
    CHECK(std::abs(total(direct.injections) - 5.0) <= 1e-8);
  }
}

TEST_CASE("one prosumer clears identically both ways") {
  const auto pop = random_population(1, 9);
  const double demand = 0.5 * (prosumer_supply(pop[0]).q_min() + prosumer_supply(pop[0]).q_max());
  const auto [direct, dera] = efficiency_check(pop, demand);
  CHECK(direct.price == dera.price);
  CHECK(direct.social_welfare == dera.social_welfare);
}

TEST_CASE("all-buyer population") {
  auto pop = random_population(10, 4);
  for (auto& p : pop) p.g = 0.0;
  const auto [direct, dera] = efficiency_check(pop, -5.0);
  CHECK(std::abs(direct.price - dera.price) <= 1e-8);
  CHECK(std::abs(direct.social_welfare - dera.social_welfare) <= 1e-6);
}

TEST_CASE("clearing CSV") {
  const auto pop = homogeneous(2, 1.0);
  const std::vector<SupplyCurve> curves{prosumer_supply(pop[0]), SupplyCurve{1.0, {UtilityFn::quadratic(0.24, 0.24)}, "b,1"}};
  const auto csv = clearing_csv(curves, clear(curves, 1.0));
  CHECK(csv.rfind("participant_id,injection_kwh,surplus_usd\r\n", 0) == 0);
  CHECK(csv.find("\"b,1\",") != std::string::npos);
}
