#include "dera/bidding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dera/errors.hpp"

namespace dera {

SupplyCurve::SupplyCurve(double offset, std::vector<UtilityFn> devices, std::string id)
    : offset_(offset), devices_(std::move(devices)), id_(std::move(id)) {
  double lo_sum = 0.0, hi_sum = 0.0;
  for (const auto& u : devices_) {
    lo_sum += u.d_lo();
    hi_sum += u.d_hi();
    const auto bp = u.breakpoints();
    breakpoints_.insert(breakpoints_.end(), bp.begin(), bp.end());
  }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
  q_min_ = offset_ - hi_sum;
  q_max_ = offset_ - lo_sum;
}

double SupplyCurve::eval(double price) const {
  double consumed = 0.0;
  for (const auto& u : devices_) consumed += u.inverse_demand(price);
  return offset_ - consumed;
}

SupplyCurve prosumer_supply(const Prosumer& p) { return SupplyCurve{p.g, p.devices, p.id}; }

SupplyCurve aggregate_supply(std::span<const Prosumer> pop, std::optional<double> g_estimate) {
  std::vector<UtilityFn> devices;
  double g_total = 0.0;
  for (const auto& p : pop) {
    devices.insert(devices.end(), p.devices.begin(), p.devices.end());
    g_total += p.g;
  }
  if (g_estimate && !(*g_estimate >= 0.0)) throw DomainError("generation estimate must be >= 0");
  return SupplyCurve{g_estimate.value_or(g_total), std::move(devices), "dera"};
}

double estimate_generation(std::span<const double> samples, std::size_t n_target) {
  if (samples.empty()) throw DomainError("estimate_generation: empty sample");
  if (n_target == 0) throw DomainError("estimate_generation: n_target must be >= 1");
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  return static_cast<double>(n_target) * mean;
}

double inverse_price(const SupplyCurve& c, double q) {
  const double slack = 1e-12 * std::max(1.0, std::abs(c.q_max()) + std::abs(c.q_min()));
  if (!(q >= c.q_min() - slack) || !(q <= c.q_max() + slack))
    throw DomainError("inverse curve: quantity outside [q_min, q_max]");
  const auto& bp = c.breakpoints();
  double lo = (bp.empty() ? 0.0 : bp.front()) - 1.0;
  double hi = (bp.empty() ? 0.0 : bp.back()) + 1.0;
  if (c.eval(lo) >= q) return lo;  // q at the bottom plateau: any lower price works too
  // eval(lo) < q <= eval(hi); find the smallest price reaching q.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (c.eval(mid) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<std::pair<double, double>> sample_inverse_curve(const SupplyCurve& c, std::span<const double> q_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(q_grid.size());
  for (double q : q_grid) out.emplace_back(q, inverse_price(c, q));
  return out;
}

std::vector<std::pair<double, double>> export_points(const SupplyCurve& c, double lo, double hi, std::size_t points) {
  if (!(hi > lo) || points < 2) throw DomainError("export grid needs hi > lo and at least two points");
  std::vector<double> prices;
  for (std::size_t i = 0; i < points; ++i)
    prices.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  for (double b : c.breakpoints())
    if (b > lo && b < hi) prices.push_back(b);
  std::sort(prices.begin(), prices.end());
  prices.erase(std::unique(prices.begin(), prices.end()), prices.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(prices.size());
  for (double p : prices) out.emplace_back(c.eval(p), p);
  return out;
}

std::string bid_curve_csv(std::span<const std::pair<double, double>> points) {
  std::string out = "q_kwh,price_usd_per_kwh\r\n";
  char buf[64];
  for (const auto& [q, p] : points) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\r\n", q, p);
    out += buf;
  }
  return out;
}

}  // namespace dera
