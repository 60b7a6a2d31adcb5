#include <cmath>
#include <random>

#include "doctest.h"
#include "dera/errors.hpp"
#include "dera/nem.hpp"
#include "oracles.hpp"

using namespace dera;
using doctest::Approx;

namespace {

Prosumer one_device(double g) { return Prosumer({UtilityFn::quadratic(0.24, 0.24)}, g); }
const NemTariff kTariff{0.06, 0.03, 0.0};

}  // namespace

TEST_CASE("bill") {
  CHECK(bill(kTariff, 2.0) == Approx(0.12));
  CHECK(bill(NemTariff{0.06, 0.03, 0.5}, 0.0) == Approx(0.5));
  CHECK(bill(kTariff, -2.0) == Approx(-0.06));
  CHECK_THROWS_AS(NemTariff(0.02, 0.03, 0.0), DomainError);
}

TEST_CASE("passive optimum") {
  auto sell = passive_optimum(one_device(5.0), kTariff);
  CHECK(sell.d_total == Approx(0.75));
  CHECK(sell.surplus == Approx(0.24));
  CHECK(sell.regime == Regime::Sell);
  auto buy = passive_optimum(one_device(0.0), kTariff);
  CHECK(buy.d_total == Approx(0.75));
  CHECK(buy.surplus == Approx(0.0675));
  auto edge = passive_optimum(one_device(0.75), kTariff);
  CHECK(edge.surplus == Approx(0.1125));
}

TEST_CASE("active optimum") {
  auto island = active_optimum(one_device(0.8), kTariff);
  CHECK(island.regime == Regime::Island);
  CHECK(island.mu == Approx(0.048).epsilon(1e-9));
  CHECK(island.d_total == Approx(0.8));
  CHECK(island.surplus == Approx(0.1152));
  auto sell = active_optimum(one_device(5.0), kTariff);
  CHECK(sell.regime == Regime::Sell);
  CHECK(sell.d_total == Approx(0.875));
  CHECK(sell.surplus == Approx(0.241875));
  auto none = active_optimum(one_device(0.0), kTariff);
  auto passive = passive_optimum(one_device(0.0), kTariff);
  CHECK(none.surplus == passive.surplus);
  CHECK(none.d_total == passive.d_total);
}

TEST_CASE("equal buy and sell rates collapse to the buy branch") {
  const NemTariff flat{0.05, 0.05, 0.0};
  auto out = active_optimum(one_device(0.8), flat);
  CHECK(out.regime != Regime::Island);
  CHECK(out.surplus == Approx(passive_optimum(one_device(0.8), flat).surplus));
}

TEST_CASE("island price requires a bracket") {
  CHECK_THROWS_AS(island_price(one_device(0.0), 5.0, 0.03, 0.06), RootNotBracketed);
}

TEST_CASE("active dominates passive; both are continuous in g") {
  std::mt19937_64 rng(3);
  for (int inst = 0; inst < 30; ++inst) {
    Prosumer p = oracle::small_prosumer(rng, 1 + inst % 2);
    const NemTariff t = oracle::random_tariff(rng);
    const double d_plus = p.total_demand_at(t.pi_plus), d_minus = p.total_demand_at(t.pi_minus);
    for (double g = 0.0; g <= 4.0; g += 0.05) {
      p.g = g;
      CHECK(active_optimum(p, t).surplus >= passive_optimum(p, t).surplus - 1e-12);
    }
    for (double edge : {d_plus, d_minus}) {
      p.g = edge;
      const double at = active_optimum(p, t).surplus;
      p.g = edge + 1e-11;
      const double above = active_optimum(p, t).surplus;
      p.g = std::max(0.0, edge - 1e-11);
      const double below = active_optimum(p, t).surplus;
      CHECK(std::abs(at - above) <= 1e-9);
      CHECK(std::abs(at - below) <= 1e-9);
    }
  }
}

TEST_CASE("passive consumption ignores generation") {
  Prosumer p({UtilityFn::quadratic(0.3, 0.2), UtilityFn::log(0.2, 0.7)}, 0.0);
  const double base = passive_optimum(p, kTariff).d_total;
  for (double g = 0.0; g <= 10.0; g += 0.25) {
    p.g = g;
    CHECK(passive_optimum(p, kTariff).d_total == base);
  }
}

TEST_CASE("closed forms match the two-device brute-force oracle") {
  std::mt19937_64 rng(17);
  for (int inst = 0; inst < 10; ++inst) {
    const Prosumer p = oracle::small_prosumer(rng, 2);
    const NemTariff t = oracle::random_tariff(rng);
    const auto active = active_optimum(p, t);
    const auto brute = oracle::nem_active(p, t);
    CHECK(std::abs(active.surplus - brute.value) <= 1e-4);
    CHECK(std::abs(active.d_total - brute.d_total) <= 2e-3);
    const auto passive = passive_optimum(p, t);
    const auto brute_p = oracle::nem_passive(p, t);
    CHECK(std::abs(passive.surplus - brute_p.value) <= 1e-4);
    if (active.regime == Regime::Island) {
      double sum = 0.0;
      for (double d : p.demand_at(active.mu)) sum += d;
      CHECK(std::abs(sum - p.g) <= 1e-9);
    }
  }
}
