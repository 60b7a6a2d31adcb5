#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dera {

/// U(x) = alpha x - beta x^2 / 2, saturating at alpha^2 / (2 beta) for x >= alpha / beta.
struct Quadratic {
  double alpha;  // $/kWh
  double beta;   // $/kWh^2
};

/// U(x) = a ln(1 + x / scale).
struct Log {
  double a;      // $
  double scale;  // kWh
};

/// U(x) = a (x^(1-eta) - d_lo^(1-eta)) / (1 - eta), so U(d_lo) = 0.
struct Isoelastic {
  double a;    // $
  double eta;  // >= 0, != 1
};

using UtilityFamily = std::variant<Quadratic, Log, Isoelastic>;

/// Concave, nondecreasing device utility with consumption bounds [d_lo, d_hi].
class UtilityFn {
 public:
  UtilityFn(UtilityFamily family, double d_lo, double d_hi);

  static UtilityFn quadratic(double alpha, double beta, double d_lo = 0.0, double d_hi = 10.0);
  static UtilityFn log(double a, double scale, double d_lo = 0.0, double d_hi = 10.0);
  static UtilityFn isoelastic(double a, double eta, double d_lo, double d_hi);

  const UtilityFamily& family() const { return family_; }
  double d_lo() const { return d_lo_; }
  double d_hi() const { return d_hi_; }

  /// dU/dx on [d_lo, d_hi]; throws DomainError outside.
  double marginal(double x) const;

  /// U(x) for x >= d_lo; throws DomainError below.
  double value(double x) const;

  /// f(price) = clamp(V^{-1}(price), d_lo, d_hi). Total in price; ties go to
  /// the smallest maximizer of U(x) - price * x.
  double inverse_demand(double price) const;

  /// Prices at which inverse_demand changes regime (V(d_hi), V(d_lo), and the
  /// saturation kink of the quadratic family), finite values only, sorted.
  std::vector<double> breakpoints() const;

 private:
  double raw_marginal(double x) const;

  UtilityFamily family_;
  double d_lo_;
  double d_hi_;
};

double marginal_utility(const UtilityFn& u, double x);
double inverse_demand(const UtilityFn& u, double price);
double utility_value(const UtilityFn& u, double x);

/// Household with K consuming devices and behind-the-meter generation g.
struct Prosumer {
  std::vector<UtilityFn> devices;
  double g = 0.0;  // kWh
  std::string id;

  Prosumer(std::vector<UtilityFn> devices, double g, std::string id = {});

  /// Sum of device utilities; bundle size must equal device count.
  double utility(std::span<const double> bundle) const;

  /// Per-device consumption at a common price.
  std::vector<double> demand_at(double price) const;

  double total_demand_at(double price) const;
};

}  // namespace dera
