#include <cmath>
#include <random>

#include "doctest.h"
#include "dera/aggregation.hpp"
#include "dera/errors.hpp"
#include "oracles.hpp"

using namespace dera;
using doctest::Approx;

namespace {

const NemTariff kTariff{0.06, 0.03, 0.0};

CompetitiveTarget nem_target(double zeta = 0.0) {
  CompetitiveTarget t;
  t.base = CompetitiveTarget::Base::NemPassive;
  t.zeta_pct = zeta;
  t.tariff = kTariff;
  return t;
}

Prosumer one_device(double g) { return Prosumer({UtilityFn::quadratic(0.24, 0.24)}, g); }

}  // namespace

TEST_CASE("competitive floor") {
  CHECK(competitive_floor(nem_target(), one_device(5.0)) == Approx(0.24));
  CHECK(competitive_floor(nem_target(10.0), one_device(5.0)) == Approx(0.264));
  CHECK(competitive_floor(nem_target(), one_device(0.0)) == Approx(0.0675));
  CHECK_THROWS_AS(competitive_floor(nem_target(-1.0), one_device(0.0)), DomainError);
}

TEST_CASE("single prosumer schedule") {
  const std::vector<Prosumer> pop{one_device(5.0)};
  const auto s = schedule(pop, nem_target(), 0.03);
  REQUIRE(s.per_prosumer.size() == 1);
  CHECK(s.per_prosumer[0].consumption[0] == Approx(0.875));
  CHECK(s.per_prosumer[0].omega == Approx(-0.121875));
  CHECK(s.dera_profit == Approx(0.001875));
  CHECK(s.unprofitable().empty());
}

TEST_CASE("DERA and NEM coincide when the LMP equals the buy rate") {
  const std::vector<Prosumer> pop{one_device(0.0)};
  const auto s = schedule(pop, nem_target(), kTariff.pi_plus);
  CHECK(s.per_prosumer[0].consumption[0] == Approx(0.75));
  CHECK(s.per_prosumer[0].omega == Approx(0.06 * 0.75));
  CHECK(std::abs(s.dera_profit) <= 1e-15);
}

TEST_CASE("empty population") {
  const std::vector<Prosumer> pop;
  CHECK(schedule(pop, nem_target(), 0.03).dera_profit == 0.0);
}

TEST_CASE("loss-making contracts are reported, not fatal") {
  // LMP above the sell rate with large exports: the DERA still pays the NEM floor.
  const std::vector<Prosumer> pop{one_device(5.0)};
  const auto s = schedule(pop, nem_target(), 0.01);
  CHECK(s.dera_profit < 0.0);
  CHECK(s.unprofitable() == std::vector<std::size_t>{0});
}

TEST_CASE("schedule invariants over random populations") {
  std::mt19937_64 rng(5);
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<Prosumer> pop;
    for (int n = 0; n < 5; ++n) pop.push_back(oracle::small_prosumer(rng, 1 + n % 2));
    CompetitiveTarget target = nem_target();
    target.tariff = oracle::random_tariff(rng);
    target.base = static_cast<CompetitiveTarget::Base>(inst % 3);
    const double lmp = oracle::uniform(rng, 0.0, 0.1);
    const auto s = schedule(pop, target, lmp);
    double profit = 0.0;
    for (std::size_t n = 0; n < pop.size(); ++n) {
      const auto& sp = s.per_prosumer[n];
      CHECK(std::abs(pop[n].utility(sp.consumption) - sp.omega - sp.floor) <= 1e-12);
      double total = 0.0;
      for (double d : sp.consumption) total += d;
      profit += sp.omega - lmp * (total - pop[n].g);
    }
    CHECK(s.dera_profit == Approx(profit).epsilon(1e-12));

    // g-invariance of the schedule and monotonicity in zeta.
    auto shifted = pop;
    for (auto& p : shifted) p.g += 1.3;
    const auto s2 = schedule(shifted, target, lmp);
    for (std::size_t n = 0; n < pop.size(); ++n) CHECK(s2.per_prosumer[n].consumption == s.per_prosumer[n].consumption);
    double prev = s.dera_profit;
    for (double zeta : {5.0, 10.0, 25.0}) {
      target.zeta_pct = zeta;
      const double cur = schedule(pop, target, lmp).dera_profit;
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("closed-form profit beats the grid-search oracle") {
  std::mt19937_64 rng(23);
  for (int inst = 0; inst < 8; ++inst) {
    const std::vector<Prosumer> pop{oracle::small_prosumer(rng, 1 + inst % 2)};
    CompetitiveTarget target = nem_target();
    target.tariff = oracle::random_tariff(rng);
    const double lmp = oracle::uniform(rng, 0.0, 0.1);
    const auto s = schedule(pop, target, lmp);
    const auto brute = oracle::dera_profit(pop[0], s.per_prosumer[0].floor, lmp);
    CHECK(brute.value <= s.dera_profit + 1e-4);
  }
}
