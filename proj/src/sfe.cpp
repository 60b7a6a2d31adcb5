#include "dera/sfe.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "dera/errors.hpp"

namespace dera::sfe {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pull_in(double x) { return 1e-12 * std::max(1.0, std::abs(x)); }

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> offsets_of(const Problem& prob) {
  std::vector<double> r;
  r.reserve(prob.participants.size());
  for (const auto& p : prob.participants) r.push_back(p.offset);
  return r;
}

// w_m that yields allocation P for m when the others' bids sum to w_others.
double bid_for_allocation(const Problem& prob, std::size_t m, double p, double w_others) {
  const double k = prob.others_margin(m);
  return w_others * (prob.participants[m].offset - p) / (k + p);
}

// Golden-section maximization of a unimodal f on [lo, hi]; returns the argmax.
template <class F>
double golden_max(F&& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200; ++it) {
    if (b - a <= 1e-15 * std::max(1.0, std::abs(a) + std::abs(b))) break;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double best = fc >= fd ? c : d;
  double f_best = std::max(fc, fd);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx > f_best) {
      f_best = fx;
      best = x;
    }
  }
  return best;
}

void require_convex(const Problem& prob, std::size_t m, const Box& box) {
  constexpr int kSamples = 1000;
  if (box.hi <= box.lo) return;
  double prev = transformed_marginal(prob, m, box.lo);
  for (int i = 1; i <= kSamples; ++i) {
    const double p = box.lo + (box.hi - box.lo) * static_cast<double>(i) / kSamples;
    const double cur = transformed_marginal(prob, m, p);
    if (cur < prev - 1e-12 * std::max(1.0, std::abs(prev)))
      throw NonconvexityError("transformed marginal cost decreases on the feasible box of participant " +
                              prob.participants[m].name);
    prev = cur;
  }
}

}  // namespace

// --- family ---------------------------------------------------------------

SupplyFamily::SupplyFamily(Kind kind, double eta, double elasticity)
    : kind_(kind), eta_(eta), elasticity_(elasticity) {
  if (self_test_residual() > 1e-8)
    throw DomainError("supply family violates x E'(x) = M E(x) for the declared constant");
}

SupplyFamily SupplyFamily::affine() { return {Kind::Affine, 0.0, -1.0}; }
SupplyFamily SupplyFamily::reciprocal() { return {Kind::Reciprocal, 1.0, 1.0}; }

SupplyFamily SupplyFamily::power(double eta, std::optional<double> elasticity_override) {
  if (!(eta > 0.0) || eta == 1.0) throw DomainError("power family needs eta > 0, eta != 1");
  return {Kind::Power, eta, elasticity_override.value_or(eta)};
}

double SupplyFamily::transform(double price) const {
  if (!(price > 0.0)) throw DomainError("supply family: price must be positive");
  switch (kind_) {
    case Kind::Affine: return -1.0 / price;
    case Kind::Reciprocal: return price;
    case Kind::Power: return std::pow(price, 1.0 / eta_);
  }
  return 0.0;
}

double SupplyFamily::inverse_transform(double x) const {
  switch (kind_) {
    case Kind::Affine:
      if (!(x < 0.0)) throw DomainError("affine family: ratio must be negative");
      return -1.0 / x;
    case Kind::Reciprocal:
      if (!(x > 0.0)) throw DomainError("reciprocal family: ratio must be positive");
      return x;
    case Kind::Power:
      if (!(x > 0.0)) throw DomainError("power family: ratio must be positive");
      return std::pow(x, eta_);
  }
  return 0.0;
}

double SupplyFamily::self_test_residual() const {
  double worst = 0.0;
  const double sign = kind_ == Kind::Affine ? -1.0 : 1.0;
  for (int i = 0; i <= 40; ++i) {
    const double x = sign * std::pow(10.0, -1.0 + 2.0 * i / 40.0);
    const double h = 1e-5 * std::abs(x);
    const double deriv = (inverse_transform(x + h) - inverse_transform(x - h)) / (2.0 * h);
    const double e = inverse_transform(x);
    worst = std::max(worst, std::abs(x * deriv - elasticity_ * e) / std::abs(e));
  }
  return worst;
}

// --- cost -----------------------------------------------------------------

CostFn::CostFn(QuadraticCost c) : spec_(c) {
  if (!(c.quadratic > 0.0) || !(c.linear >= 0.0))
    throw DomainError("quadratic cost needs quadratic > 0 and linear >= 0");
}

CostFn::CostFn(ExponentialCost c) : spec_(c) {
  if (!(c.scale > 0.0) || !(c.rate > 0.0)) throw DomainError("exponential cost needs scale > 0, rate > 0");
}

double CostFn::value(double p) const {
  if (const auto* q = std::get_if<QuadraticCost>(&spec_)) return q->linear * p + 0.5 * q->quadratic * p * p;
  const auto& e = std::get<ExponentialCost>(spec_);
  return e.scale * std::expm1(e.rate * p);
}

double CostFn::marginal(double p) const {
  if (const auto* q = std::get_if<QuadraticCost>(&spec_)) return q->linear + q->quadratic * p;
  const auto& e = std::get<ExponentialCost>(spec_);
  return e.scale * e.rate * std::exp(e.rate * p);
}

// --- problem --------------------------------------------------------------

double Problem::offset_sum() const {
  double s = 0.0;
  for (const auto& p : participants) s += p.offset;
  return s;
}

double Problem::others_margin(std::size_t m) const { return offset_sum() - participants.at(m).offset - demand; }

// --- price and allocation from bids ---------------------------------------

double lemma_price(const SupplyFamily& family, std::span<const double> offsets, std::span<const double> w,
                   double demand) {
  const double w_sum = sum(w);
  if (!(w_sum > 0.0)) throw DomainError("lemma price: sum of w must be positive");
  const double spread = sum(offsets) - demand;
  if (spread == 0.0) throw SingularityError("lemma price: sum R equals demand");
  return family.inverse_transform(w_sum / spread);
}

std::vector<double> lemma_allocation(std::span<const double> offsets, std::span<const double> w, double demand) {
  if (offsets.size() != w.size()) throw DomainError("lemma allocation: size mismatch");
  const double w_sum = sum(w);
  if (!(w_sum > 0.0)) throw DomainError("lemma allocation: sum of w must be positive");
  const double spread = sum(offsets) - demand;
  if (spread == 0.0) throw SingularityError("lemma allocation: sum R equals demand");
  std::vector<double> out(w.size());
  for (std::size_t m = 0; m < w.size(); ++m) out[m] = offsets[m] - spread * w[m] / w_sum;
  return out;
}

double profit(const Problem& prob, std::size_t m, std::span<const double> w) {
  const auto r = offsets_of(prob);
  const double price = lemma_price(prob.family, r, w, prob.demand);
  const double p = lemma_allocation(r, w, prob.demand)[m];
  return price * p - prob.participants[m].cost.value(p);
}

// --- transformed program --------------------------------------------------

double markup_factor(const Problem& prob, std::size_t m, double p) {
  const double mm = prob.family.elasticity();
  const double den = (1.0 - mm) * p + prob.others_margin(m);
  if (den == 0.0) throw SingularityError("markup factor: vanishing denominator");
  return 1.0 + mm * p / den;
}

double transformed_marginal(const Problem& prob, std::size_t m, double p) {
  return prob.participants[m].cost.marginal(p) * markup_factor(prob, m, p);
}

Box effective_box(const Problem& prob, std::size_t m) {
  const auto& part = prob.participants.at(m);
  const double k = prob.others_margin(m);
  const double mm = prob.family.elasticity();
  const double spread = prob.offset_sum() - prob.demand;
  if (spread == 0.0) throw SingularityError("sum R equals demand");
  if (k == 0.0) throw SingularityError("R_{-m} equals demand for participant " + part.name);

  Box box{part.p_lo, part.p_hi};
  // w_m >= 0 with a finite positive price: P between R_m and -K (open at -K).
  const double r = part.offset;
  const double edge = -k;
  if (r <= edge) {
    box.lo = std::max(box.lo, r);
    box.hi = std::min(box.hi, edge - pull_in(edge));
  } else {
    box.lo = std::max(box.lo, edge + pull_in(edge));
    box.hi = std::min(box.hi, r);
  }
  if (mm < 1.0) {
    const double bound = std::abs(prob.demand - prob.offset_sum()) / static_cast<double>(prob.participants.size() - 1);
    box.lo = std::max(box.lo, -bound);
    box.hi = std::min(box.hi, bound);
  }
  const double c = 1.0 - mm;
  if (c != 0.0) {
    const double singular = -k / c;
    if (singular > 0.0) {
      box.hi = std::min(box.hi, singular - pull_in(singular));
    } else {
      box.lo = std::max(box.lo, singular + pull_in(singular));
    }
  }
  if (box.lo > box.hi) throw InfeasibleError("empty feasible box for participant " + part.name);
  return box;
}

double transformed_cost(const Problem& prob, std::size_t m, double p, bool force_quadrature) {
  const double mm = prob.family.elasticity();
  const double k = prob.others_margin(m);
  const double c = 1.0 - mm;
  if (k == 0.0) throw SingularityError("transformed cost: R_{-m} equals demand");
  if (c != 0.0) {
    const double singular = -k / c;
    if ((singular >= 0.0 && p >= singular) || (singular <= 0.0 && p <= singular))
      throw SingularityError("transformed cost: J_m singular between 0 and P");
  }
  if (p == 0.0) return 0.0;
  const auto& cost = prob.participants[m].cost;

  if (cost.is_quadratic() && !force_quadrature) {
    const auto& q = std::get<QuadraticCost>(cost.spec());
    const double a = q.linear, b = q.quadratic;
    if (c == 0.0) return a * p + 0.5 * b * p * p + a * p * p / (2.0 * k) + b * p * p * p / (3.0 * k);
    const double amp = k * (c - 1.0) / c;
    const double log_term = std::log1p(c * p / k);
    return (a * p + 0.5 * b * p * p) / c + amp * ((b / c) * p + (a - b * k / c) / c * log_term);
  }

  auto integrand = [&](double y) {
    const double den = c * y + k;
    return mm * k / (den * den) * cost.value(y);
  };
  const double lo = std::min(0.0, p), hi = std::max(0.0, p);
  double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 15, 1e-10);
  if (p < 0.0) integral = -integral;
  return cost.value(p) * markup_factor(prob, m, p) - integral;
}

Equalized equalize_marginals(std::span<const std::function<double(double)>> marginals, std::span<const Box> boxes,
                             double demand) {
  const std::size_t n = marginals.size();
  if (boxes.size() != n || n == 0) throw DomainError("equalize_marginals: size mismatch");
  double lo_sum = 0.0, hi_sum = 0.0;
  for (const auto& b : boxes) {
    if (b.lo > b.hi) throw InfeasibleError("equalize_marginals: empty box");
    lo_sum += b.lo;
    hi_sum += b.hi;
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(lo_sum) + std::abs(hi_sum));
  if (!(demand >= lo_sum - slack && demand <= hi_sum + slack))
    throw InfeasibleError("capacity boxes cannot sum to demand");

  auto allocate = [&](std::size_t i, double lambda) {
    const auto& f = marginals[i];
    double lo = boxes[i].lo, hi = boxes[i].hi;
    if (f(lo) >= lambda) return lo;
    if (f(hi) <= lambda) return hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (f(mid) < lambda ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto total = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += allocate(i, lambda);
    return s;
  };

  double lam_lo = kInf, lam_hi = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    lam_lo = std::min(lam_lo, marginals[i](boxes[i].lo));
    lam_hi = std::max(lam_hi, marginals[i](boxes[i].hi));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    if (mid <= lam_lo || mid >= lam_hi) break;
    (total(mid) >= demand ? lam_hi : lam_lo) = mid;
  }

  std::vector<double> p_lo(n), p_hi(n);
  double s_lo = 0.0, s_hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p_lo[i] = allocate(i, lam_lo);
    p_hi[i] = allocate(i, lam_hi);
    s_lo += p_lo[i];
    s_hi += p_hi[i];
  }
  const double theta = s_hi > s_lo ? std::clamp((demand - s_lo) / (s_hi - s_lo), 0.0, 1.0) : 1.0;
  Equalized out;
  out.allocations.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.allocations[i] = p_lo[i] + theta * (p_hi[i] - p_lo[i]);
  out.multiplier = lam_lo + theta * (lam_hi - lam_lo);
  return out;
}

namespace {

Solution finish(const Problem& prob, const Equalized& eq, bool with_bids) {
  Solution sol;
  sol.price = eq.multiplier;
  sol.allocations = eq.allocations;
  for (std::size_t m = 0; m < prob.participants.size(); ++m) {
    const auto& part = prob.participants[m];
    const double p = sol.allocations[m];
    sol.profits.push_back(sol.price * p - part.cost.value(p));
    if (with_bids) sol.w.push_back(std::max(0.0, prob.family.transform(sol.price) * (part.offset - p)));
  }
  return sol;
}

}  // namespace

Solution solve_sfe(const Problem& prob) {
  const std::size_t n = prob.participants.size();
  if (n < 3) throw NoEquilibriumError("supply function equilibrium needs at least three participants");
  const double spread = prob.offset_sum() - prob.demand;
  if (spread == 0.0) throw SingularityError("sum R equals demand");
  if (prob.family.unbounded_above()) {
    for (std::size_t m = 0; m < n; ++m)
      if (prob.others_margin(m) < 0.0)
        throw DomainError("R_{-m} >= D is required when B is unbounded above (participant " +
                          prob.participants[m].name + ")");
  } else if (spread > 0.0) {
    throw DomainError("affine family needs sum R < D for a positive price");
  }

  std::vector<Box> boxes;
  std::vector<std::function<double(double)>> marginals;
  for (std::size_t m = 0; m < n; ++m) {
    boxes.push_back(effective_box(prob, m));
    require_convex(prob, m, boxes.back());
    marginals.emplace_back([&prob, m](double p) { return transformed_marginal(prob, m, p); });
  }
  const Equalized eq = equalize_marginals(marginals, boxes, prob.demand);
  if (!(eq.multiplier > 0.0)) throw DomainError("equilibrium price is not positive");
  return finish(prob, eq, true);
}

Solution solve_competitive(const Problem& prob) {
  std::vector<Box> boxes;
  std::vector<std::function<double(double)>> marginals;
  for (const auto& part : prob.participants) {
    boxes.push_back({part.p_lo, part.p_hi});
    marginals.emplace_back([&part](double p) { return part.cost.marginal(p); });
  }
  return finish(prob, equalize_marginals(marginals, boxes, prob.demand), false);
}

// --- Nash oracle ----------------------------------------------------------

std::pair<double, double> w_bounds(const Problem& prob, std::size_t m, double w_others_sum) {
  if (!(w_others_sum > 0.0)) throw DomainError("w_bounds: others' bids must sum to a positive value");
  const auto& part = prob.participants.at(m);
  const double k = prob.others_margin(m);
  if (prob.family.unbounded_above()) {
    const double den_hi = k + part.p_hi;
    if (den_hi == 0.0) throw SingularityError("w_bounds: R_{-m} - D + P_hi vanishes");
    const double lower = std::max(0.0, (part.offset - part.p_hi) * w_others_sum / den_hi);
    const double den_lo = k + part.p_lo;
    const double upper = den_lo <= 0.0 ? kInf : (part.offset - part.p_lo) * w_others_sum / den_lo;
    return {lower, upper};
  }
  const double den_lo = k + part.p_lo, den_hi = k + part.p_hi;
  if (den_lo == 0.0 || den_hi == 0.0) throw SingularityError("w_bounds: R_{-m} - D + P vanishes at a box end");
  if ((den_lo < 0.0) != (den_hi < 0.0)) return {0.0, kInf};
  const double a = bid_for_allocation(prob, m, part.p_lo, w_others_sum);
  const double b = bid_for_allocation(prob, m, part.p_hi, w_others_sum);
  return {std::max(0.0, std::min(a, b)), std::max(0.0, std::max(a, b))};
}

std::pair<double, double> strategy_range(const Problem& prob, std::size_t m, double w_others_sum) {
  if (!(w_others_sum > 0.0)) throw DomainError("strategy_range: others' bids must sum to a positive value");
  const Box box = effective_box(prob, m);
  const double a = bid_for_allocation(prob, m, box.lo, w_others_sum);
  const double b = bid_for_allocation(prob, m, box.hi, w_others_sum);
  return {std::max(0.0, std::min(a, b)), std::max(0.0, std::max(a, b))};
}

NashReport nash_check(const Problem& prob, std::span<const double> w, std::size_t grid) {
  const std::size_t n = prob.participants.size();
  if (w.size() != n) throw DomainError("nash_check: w has wrong size");
  grid = std::max<std::size_t>(grid, 2);
  NashReport rep;
  rep.gains.assign(n, 0.0);
  rep.profit_at_point.assign(n, 0.0);
  std::vector<double> trial(w.begin(), w.end());

  for (std::size_t m = 0; m < n; ++m) {
    const double others = sum(w) - w[m];
    if (!(others > 0.0)) {
      // Others bidding zero: m can always shade its bid further.
      rep.gains[m] = kInf;
      rep.profit_at_point[m] = sum(w) > 0.0 ? profit(prob, m, w) : -kInf;
      continue;
    }
    const double base = profit(prob, m, w);
    rep.profit_at_point[m] = base;
    const auto [lo, hi] = strategy_range(prob, m, others);
    auto q_at = [&](double wm) {
      trial[m] = wm;
      const double q = profit(prob, m, trial);
      trial[m] = w[m];
      return q;
    };

    double best = -kInf;
    if (lo == 0.0) best = q_at(0.0);
    const double g_lo = lo > 0.0 ? lo : 1e-9 * std::max(w[m], others);
    const double g_hi = std::max(hi, g_lo);
    const double log_lo = std::log(g_lo), log_hi = std::log(g_hi);
    std::vector<double> logs(grid), values(grid);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < grid; ++i) {
      logs[i] = log_lo + (log_hi - log_lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
      values[i] = q_at(std::exp(logs[i]));
      if (values[i] > values[arg]) arg = i;
    }
    best = std::max(best, values[arg]);
    const double a = logs[arg == 0 ? 0 : arg - 1];
    const double b = logs[std::min(arg + 1, grid - 1)];
    if (b > a) {
      const double x = golden_max([&](double lw) { return q_at(std::exp(lw)); }, a, b);
      best = std::max(best, q_at(std::exp(x)));
    }
    rep.gains[m] = std::max(0.0, best - base);
  }
  rep.equilibrium = true;
  for (std::size_t m = 0; m < n; ++m) {
    rep.max_gain = std::max(rep.max_gain, rep.gains[m]);
    if (!(rep.gains[m] <= 1e-6 * (1.0 + std::abs(rep.profit_at_point[m])))) rep.equilibrium = false;
  }
  return rep;
}

double best_response(const Problem& prob, std::span<const double> w, std::size_t m) {
  const double others = sum(w) - w[m];
  if (!(others > 0.0)) throw DomainError("best response undefined when the others bid zero");
  const Box box = effective_box(prob, m);
  std::vector<double> trial(w.begin(), w.end());
  // Searched in allocation space, which maps monotonically onto the w range
  // and keeps the objective concave.
  auto q_of_alloc = [&](double p) {
    trial[m] = std::max(0.0, bid_for_allocation(prob, m, p, others));
    return profit(prob, m, trial);
  };
  const double p_star = golden_max(q_of_alloc, box.lo, box.hi);
  return std::max(0.0, bid_for_allocation(prob, m, p_star, others));
}

Trajectory best_response_dynamics(const Problem& prob, std::span<const double> w0, std::size_t rounds) {
  if (w0.size() != prob.participants.size()) throw DomainError("best_response_dynamics: w0 has wrong size");
  Trajectory traj;
  std::vector<double> w(w0.begin(), w0.end());
  traj.w.push_back(w);
  for (std::size_t r = 0; r < rounds; ++r) {
    double move = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
      const double next = best_response(prob, w, m);
      move = std::max(move, std::abs(next - w[m]) / std::max(std::abs(w[m]), 1e-300));
      w[m] = next;
    }
    traj.w.push_back(w);
    if (move < 1e-7) {
      traj.converged = true;
      break;
    }
  }
  return traj;
}

}  // namespace dera::sfe
