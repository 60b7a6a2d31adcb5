#pragma once

#include <vector>

#include "dera/prosumer.hpp"

namespace dera {

/// NEM X tariff: buy rate, sell rate, fixed connection charge.
struct NemTariff {
  double pi_plus;   // $/kWh
  double pi_minus;  // $/kWh
  double pi_zero;   // $

  NemTariff(double plus, double minus, double zero = 0.0);
};

enum class Regime { Sell, Buy, Island };

struct NemOutcome {
  double d_total = 0.0;
  std::vector<double> per_device;
  double surplus = 0.0;
  Regime regime = Regime::Buy;
  double mu = 0.0;  // island shadow price; only meaningful for Regime::Island
};

/// P(z) = pi+ [z]+ - pi- [z]- + pi0.
double bill(const NemTariff& t, double z);

/// Consumption set at the buy rate regardless of g.
NemOutcome passive_optimum(const Prosumer& p, const NemTariff& t);

/// Consumption responds to g: sell above sum f(pi-), buy below sum f(pi+),
/// otherwise consume exactly g at the shadow price mu in [pi-, pi+].
NemOutcome active_optimum(const Prosumer& p, const NemTariff& t);

/// Solves sum_k f_k(mu) = g for mu in [lo, hi] by bisection.
/// Throws RootNotBracketed if the endpoints do not straddle g.
double island_price(const Prosumer& p, double g, double lo, double hi);

}  // namespace dera
