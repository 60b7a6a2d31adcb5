#include "dera/nem.hpp"

#include <cmath>

#include "dera/errors.hpp"

namespace dera {

NemTariff::NemTariff(double plus, double minus, double zero)
    : pi_plus(plus), pi_minus(minus), pi_zero(zero) {
  if (!std::isfinite(plus) || !std::isfinite(minus) || !std::isfinite(zero))
    throw DomainError("tariff prices must be finite");
  if (plus < minus) throw DomainError("tariff requires pi_plus >= pi_minus");
}

double bill(const NemTariff& t, double z) {
  const double pos = z > 0.0 ? z : 0.0;
  const double neg = z < 0.0 ? -z : 0.0;
  return t.pi_plus * pos - t.pi_minus * neg + t.pi_zero;
}

NemOutcome passive_optimum(const Prosumer& p, const NemTariff& t) {
  NemOutcome out;
  out.per_device = p.demand_at(t.pi_plus);
  for (double d : out.per_device) out.d_total += d;
  const double u = p.utility(out.per_device);
  const double z = out.d_total - p.g;
  if (p.g >= out.d_total) {
    out.surplus = u - t.pi_minus * z - t.pi_zero;
  } else {
    out.surplus = u - t.pi_plus * z - t.pi_zero;
  }
  out.regime = z > 0.0 ? Regime::Buy : (z < 0.0 ? Regime::Sell : Regime::Island);
  out.mu = t.pi_plus;
  return out;
}

double island_price(const Prosumer& p, double g, double lo, double hi) {
  // sum f is nonincreasing in price: f(lo) >= g >= f(hi) is required.
  double f_lo = p.total_demand_at(lo);
  double f_hi = p.total_demand_at(hi);
  if (!(f_lo >= g && g >= f_hi)) throw RootNotBracketed("island price: sum f(mu) = g not bracketed");
  constexpr double kPriceTol = 1e-10;
  constexpr double kResidualTol = 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = p.total_demand_at(mid);
    if (f_mid >= g) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
    if (hi - lo <= kPriceTol && std::abs(f_lo - g) <= kResidualTol) break;
  }
  // lo always satisfies f(lo) >= g; prefer whichever endpoint is closer.
  return std::abs(f_lo - g) <= std::abs(f_hi - g) ? lo : hi;
}

NemOutcome active_optimum(const Prosumer& p, const NemTariff& t) {
  const auto d_plus = p.demand_at(t.pi_plus);
  const auto d_minus = p.demand_at(t.pi_minus);
  double sum_plus = 0.0, sum_minus = 0.0;
  for (double d : d_plus) sum_plus += d;
  for (double d : d_minus) sum_minus += d;

  NemOutcome out;
  if (p.g >= sum_minus) {
    out.per_device = d_minus;
    out.d_total = sum_minus;
    out.surplus = p.utility(d_minus) - t.pi_minus * (sum_minus - p.g) - t.pi_zero;
    out.regime = Regime::Sell;
    out.mu = t.pi_minus;
  } else if (p.g <= sum_plus || t.pi_plus == t.pi_minus) {
    out.per_device = d_plus;
    out.d_total = sum_plus;
    out.surplus = p.utility(d_plus) - t.pi_plus * (sum_plus - p.g) - t.pi_zero;
    out.regime = Regime::Buy;
    out.mu = t.pi_plus;
  } else {
    const double mu = island_price(p, p.g, t.pi_minus, t.pi_plus);
    out.per_device = p.demand_at(mu);
    for (double d : out.per_device) out.d_total += d;
    out.surplus = p.utility(out.per_device) - t.pi_zero;
    out.regime = Regime::Island;
    out.mu = mu;
  }
  return out;
}

}  // namespace dera
