#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dera/prosumer.hpp"

namespace dera {

/// Truthful price-taker supply function: injection(price) = offset - sum_k f_k(price).
///
/// Positive values are net injection into the grid. The curve is held as the
/// flattened device list so it can be evaluated exactly at any price, which
/// keeps aggregation and clearing free of interpolation error.
class SupplyCurve {
 public:
  SupplyCurve() = default;
  SupplyCurve(double offset, std::vector<UtilityFn> devices, std::string id = {});

  double eval(double price) const;
  double operator()(double price) const { return eval(price); }

  double q_min() const { return q_min_; }
  double q_max() const { return q_max_; }
  double offset() const { return offset_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<UtilityFn>& devices() const { return devices_; }
  const std::string& id() const { return id_; }

 private:
  double offset_ = 0.0;
  std::vector<UtilityFn> devices_;
  std::vector<double> breakpoints_;
  double q_min_ = 0.0;
  double q_max_ = 0.0;
  std::string id_;
};

/// S_n(price) = g_n - sum_k f_nk(price).
SupplyCurve prosumer_supply(const Prosumer& p);

/// F(price) = G - sum_{n,k} f_nk(price), with G = sum g_n unless an estimate is given.
SupplyCurve aggregate_supply(std::span<const Prosumer> pop, std::optional<double> g_estimate = std::nullopt);

/// n_target times the sample mean.
double estimate_generation(std::span<const double> samples, std::size_t n_target);

/// Smallest price p with eval(p) >= q for every q; throws DomainError outside [q_min, q_max].
std::vector<std::pair<double, double>> sample_inverse_curve(const SupplyCurve& c, std::span<const double> q_grid);

double inverse_price(const SupplyCurve& c, double q);

/// (q, price) pairs over `points` evenly spaced prices on [lo, hi] plus every
/// breakpoint inside that range, sorted by price.
std::vector<std::pair<double, double>> export_points(const SupplyCurve& c, double lo, double hi, std::size_t points);

/// RFC-4180 CSV with header q_kwh,price_usd_per_kwh and 12 significant digits.
std::string bid_curve_csv(std::span<const std::pair<double, double>> points);

}  // namespace dera
