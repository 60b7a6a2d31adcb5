#include "dera/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dera/errors.hpp"

namespace dera {
namespace {

double total_supply(std::span<const SupplyCurve> curves, double price) {
  double s = 0.0;
  for (const auto& c : curves) s += c.eval(price);
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

ClearingResult clear(std::span<const SupplyCurve> curves, double demand) {
  if (curves.empty()) throw InfeasibleError("clear: no supply curves");
  double q_lo = 0.0, q_hi = 0.0;
  double p_lo = 0.0, p_hi = 0.0;
  bool have_bp = false;
  for (const auto& c : curves) {
    q_lo += c.q_min();
    q_hi += c.q_max();
    if (!c.breakpoints().empty()) {
      p_lo = have_bp ? std::min(p_lo, c.breakpoints().front()) : c.breakpoints().front();
      p_hi = have_bp ? std::max(p_hi, c.breakpoints().back()) : c.breakpoints().back();
      have_bp = true;
    }
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(q_lo) + std::abs(q_hi));
  if (!(demand >= q_lo - slack && demand <= q_hi + slack))
    throw InfeasibleError("clear: demand outside aggregate supply range");
  p_lo -= 1.0;
  p_hi += 1.0;

  // Invariant: total(lo) < demand <= total(hi), unless demand sits on the bottom plateau.
  double lo = p_lo, hi = p_hi;
  if (total_supply(curves, lo) >= demand) {
    hi = lo;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (total_supply(curves, mid) >= demand) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }

  ClearingResult r;
  r.price = hi;
  r.demand = demand;
  std::vector<double> left, right;
  double left_sum = 0.0, right_sum = 0.0;
  for (const auto& c : curves) {
    left.push_back(c.eval(lo));
    right.push_back(c.eval(hi));
    left_sum += left.back();
    right_sum += right.back();
  }
  const double gap = right_sum - left_sum;
  const double theta = gap > 0.0 ? std::clamp((demand - left_sum) / gap, 0.0, 1.0) : 1.0;

  for (std::size_t m = 0; m < curves.size(); ++m) {
    const auto& c = curves[m];
    std::vector<double> d;
    d.reserve(c.devices().size());
    for (const auto& u : c.devices()) {
      const double d_left = u.inverse_demand(lo);
      const double d_right = u.inverse_demand(hi);
      d.push_back(d_left + theta * (d_right - d_left));
    }
    const double inj = left[m] + theta * (right[m] - left[m]);
    double u_total = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) u_total += c.devices()[k].value(d[k]);
    r.injections.push_back(inj);
    r.participant_surpluses.push_back(u_total + r.price * inj);
    r.social_welfare += u_total;
    r.consumption.push_back(std::move(d));
  }
  return r;
}

std::pair<ClearingResult, ClearingResult> efficiency_check(std::span<const Prosumer> pop, double demand) {
  std::vector<SupplyCurve> direct;
  direct.reserve(pop.size());
  for (const auto& p : pop) direct.push_back(prosumer_supply(p));
  const std::vector<SupplyCurve> dera{aggregate_supply(pop)};
  return {clear(direct, demand), clear(dera, demand)};
}

std::string clearing_csv(std::span<const SupplyCurve> curves, const ClearingResult& r) {
  std::string out = "participant_id,injection_kwh,surplus_usd\r\n";
  char buf[96];
  for (std::size_t m = 0; m < r.injections.size(); ++m) {
    const std::string id = m < curves.size() && !curves[m].id().empty() ? curves[m].id() : std::to_string(m);
    std::snprintf(buf, sizeof buf, ",%.12g,%.12g\r\n", r.injections[m], r.participant_surpluses[m]);
    out += csv_field(id) + buf;
  }
  return out;
}

}  // namespace dera
