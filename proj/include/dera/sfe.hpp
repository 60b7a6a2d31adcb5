#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dera::sfe {

/// Parameterized supply functions s(price, w) = R - w / B(price).
///
/// B is strictly increasing and invertible with inverse E, and E satisfies
/// x E'(x) = elasticity * E(x). Three members are provided:
///   Affine      B(p) = -1/p      E(x) = -1/x     elasticity -1   (s = R + w p)
///   Reciprocal  B(p) = p         E(x) = x        elasticity  1   (s = R - w / p)
///   Power       B(p) = p^(1/eta) E(x) = x^eta    elasticity eta
class SupplyFamily {
 public:
  enum class Kind { Affine, Reciprocal, Power };

  static SupplyFamily affine();
  static SupplyFamily reciprocal();
  /// `elasticity_override` exists to exercise the self-test; leave it empty.
  static SupplyFamily power(double eta, std::optional<double> elasticity_override = std::nullopt);

  Kind kind() const { return kind_; }
  double eta() const { return eta_; }
  double elasticity() const { return elasticity_; }
  bool unbounded_above() const { return kind_ != Kind::Affine; }

  /// B(price); requires price > 0.
  double transform(double price) const;
  /// E(x) = B^{-1}(x); requires x in the range of B over positive prices.
  double inverse_transform(double x) const;

  /// Largest relative residual of x E'(x) - elasticity E(x) over the sample grid
  /// (central differences).
  double self_test_residual() const;

 private:
  SupplyFamily(Kind kind, double eta, double elasticity);
  Kind kind_;
  double eta_;
  double elasticity_;
};

/// C(P) = linear P + quadratic P^2 / 2.
struct QuadraticCost {
  double linear = 0.0;
  double quadratic = 1.0;
};

/// C(P) = scale (exp(rate P) - 1).
struct ExponentialCost {
  double scale = 1.0;
  double rate = 1.0;
};

/// True production cost; convex with C(0) = 0.
class CostFn {
 public:
  CostFn(QuadraticCost c);
  CostFn(ExponentialCost c);

  double value(double p) const;
  double marginal(double p) const;
  bool is_quadratic() const { return std::holds_alternative<QuadraticCost>(spec_); }
  const std::variant<QuadraticCost, ExponentialCost>& spec() const { return spec_; }

 private:
  std::variant<QuadraticCost, ExponentialCost> spec_;
};

struct Participant {
  std::string name;
  double offset = 0.0;  // R_m (kWh); total BTM generation for a DERA
  CostFn cost{QuadraticCost{}};
  double p_lo = 0.0;  // capacity box (kWh)
  double p_hi = 0.0;
};

struct Problem {
  SupplyFamily family = SupplyFamily::affine();
  std::vector<Participant> participants;
  double demand = 0.0;  // inelastic D (kWh)

  double offset_sum() const;
  /// R_{-m} - D.
  double others_margin(std::size_t m) const;
};

struct Solution {
  double price = 0.0;
  std::vector<double> allocations;
  std::vector<double> w;
  std::vector<double> profits;
};

struct Box {
  double lo = 0.0;
  double hi = 0.0;
};

// --- price and allocation from bids ---------------------------------------

/// E(sum w / (sum R - D)).
double lemma_price(const SupplyFamily& family, std::span<const double> offsets, std::span<const double> w, double demand);

/// R_m - (sum R - D) w_m / sum w; independent of the family.
std::vector<double> lemma_allocation(std::span<const double> offsets, std::span<const double> w, double demand);

/// Q_m = price(w) P_m(w) - C_m(P_m(w)).
double profit(const Problem& prob, std::size_t m, std::span<const double> w);

// --- transformed cost program --------------------------------------------

/// J_m(P) = 1 + elasticity P / ((1 - elasticity) P - D + R_{-m}).
double markup_factor(const Problem& prob, std::size_t m, double p);

/// Feasible allocations for m: capacity box intersected with w >= 0, a positive
/// price, the integration bound (elasticity < 1), and the side of the J_m
/// singularity that contains zero. Open ends are pulled in by a relative 1e-12.
Box effective_box(const Problem& prob, std::size_t m);

/// C'_m(P) J_m(P).
double transformed_marginal(const Problem& prob, std::size_t m, double p);

/// C_m(P) J_m(P) - int_0^P J_m'(y) C_m(y) dy. Closed form for quadratic costs,
/// adaptive Gauss-Kronrod otherwise (or when `force_quadrature`).
double transformed_cost(const Problem& prob, std::size_t m, double p, bool force_quadrature = false);

/// Minimizes sum_m phi_m(P_m) subject to sum P = demand and box constraints by
/// bisection on the common multiplier; `marginals` must be nondecreasing.
/// Returns allocations and the multiplier.
struct Equalized {
  std::vector<double> allocations;
  double multiplier = 0.0;
};
Equalized equalize_marginals(std::span<const std::function<double(double)>> marginals, std::span<const Box> boxes,
                             double demand);

/// Supply function equilibrium via the transformed-cost program.
/// Throws NoEquilibriumError (M < 3), InfeasibleError, SingularityError,
/// NonconvexityError.
Solution solve_sfe(const Problem& prob);

/// Price-taker benchmark: every participant bids its true marginal cost.
Solution solve_competitive(const Problem& prob);

// --- Nash oracle ----------------------------------------------------------

/// Range of w_m allowed by participant m's capacity box given the others' sum.
/// Follows the closed-form bounds for families unbounded above; for the affine
/// family both box ends are mapped and sorted.
std::pair<double, double> w_bounds(const Problem& prob, std::size_t m, double w_others_sum);

/// As w_bounds but over effective_box (the strategy set the solver uses).
std::pair<double, double> strategy_range(const Problem& prob, std::size_t m, double w_others_sum);

struct NashReport {
  double max_gain = 0.0;               // largest unilateral improvement found
  std::vector<double> gains;           // per participant
  std::vector<double> profit_at_point;  // Q_m(w)
  bool equilibrium = false;            // every gain <= 1e-6 (1 + |Q_m|)
};

/// Scans each w_m over a log-spaced grid on its strategy range (others fixed),
/// then refines the best cell by golden section.
NashReport nash_check(const Problem& prob, std::span<const double> w, std::size_t grid = 2000);

/// Exact best response of m to the others (golden section).
double best_response(const Problem& prob, std::span<const double> w, std::size_t m);

struct Trajectory {
  std::vector<std::vector<double>> w;  // w[0] is the start point
  bool converged = false;
};

/// Round-robin best responses; stops early once a full round moves every
/// coordinate by less than 1e-7 relative (golden-section resolution).
Trajectory best_response_dynamics(const Problem& prob, std::span<const double> w0, std::size_t rounds);

}  // namespace dera::sfe
