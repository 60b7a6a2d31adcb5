#include "dera/prosumer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dera/errors.hpp"

namespace dera {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

UtilityFn::UtilityFn(UtilityFamily family, double d_lo, double d_hi)
    : family_(family), d_lo_(d_lo), d_hi_(d_hi) {
  if (!(d_lo >= 0.0) || !(d_lo <= d_hi) || !std::isfinite(d_hi)) {
    throw DomainError("utility bounds must satisfy 0 <= d_lo <= d_hi < inf");
  }
  std::visit(overloaded{
                 [](const Quadratic& q) {
                   if (!(q.alpha > 0.0) || !(q.beta > 0.0))
                     throw DomainError("quadratic utility needs alpha > 0, beta > 0");
                 },
                 [](const Log& l) {
                   if (!(l.a > 0.0) || !(l.scale > 0.0))
                     throw DomainError("log utility needs a > 0, scale > 0");
                 },
                 [d_lo](const Isoelastic& e) {
                   if (!(e.a > 0.0) || !(e.eta >= 0.0) || e.eta == 1.0)
                     throw DomainError("isoelastic utility needs a > 0, eta >= 0, eta != 1");
                   if (!(d_lo > 0.0))
                     throw DomainError("isoelastic utility needs d_lo > 0");
                 },
             },
             family_);
}

UtilityFn UtilityFn::quadratic(double alpha, double beta, double d_lo, double d_hi) {
  return {Quadratic{alpha, beta}, d_lo, d_hi};
}

UtilityFn UtilityFn::log(double a, double scale, double d_lo, double d_hi) {
  return {Log{a, scale}, d_lo, d_hi};
}

UtilityFn UtilityFn::isoelastic(double a, double eta, double d_lo, double d_hi) {
  return {Isoelastic{a, eta}, d_lo, d_hi};
}

double UtilityFn::raw_marginal(double x) const {
  return std::visit(overloaded{
                        [x](const Quadratic& q) { return std::max(q.alpha - q.beta * x, 0.0); },
                        [x](const Log& l) { return l.a / (l.scale + x); },
                        [x](const Isoelastic& e) {
                          return e.eta == 0.0 ? e.a : e.a * std::pow(x, -e.eta);
                        },
                    },
                    family_);
}

double UtilityFn::marginal(double x) const {
  if (!(x >= d_lo_) || !(x <= d_hi_)) throw DomainError("marginal_utility: x outside [d_lo, d_hi]");
  return raw_marginal(x);
}

double UtilityFn::value(double x) const {
  if (!(x >= d_lo_)) throw DomainError("utility_value: x below d_lo");
  return std::visit(overloaded{
                        [x](const Quadratic& q) {
                          const double sat = q.alpha / q.beta;
                          if (x >= sat) return q.alpha * q.alpha / (2.0 * q.beta);
                          return q.alpha * x - 0.5 * q.beta * x * x;
                        },
                        [x](const Log& l) { return l.a * std::log1p(x / l.scale); },
                        [x, this](const Isoelastic& e) {
                          const double k = 1.0 - e.eta;
                          return e.a * (std::pow(x, k) - std::pow(d_lo_, k)) / k;
                        },
                    },
                    family_);
}

double UtilityFn::inverse_demand(double price) const {
  const double unclamped = std::visit(
      overloaded{
          [price](const Quadratic& q) {
            if (price < 0.0) return kInf;
            return std::max(q.alpha - price, 0.0) / q.beta;
          },
          [price](const Log& l) {
            if (price <= 0.0) return kInf;
            return l.a / price - l.scale;
          },
          [price, this](const Isoelastic& e) {
            if (price <= 0.0) return kInf;
            if (e.eta == 0.0) return price < e.a ? kInf : d_lo_;
            return std::pow(e.a / price, 1.0 / e.eta);
          },
      },
      family_);
  return std::clamp(unclamped, d_lo_, d_hi_);
}

std::vector<double> UtilityFn::breakpoints() const {
  std::vector<double> out{raw_marginal(d_hi_), raw_marginal(d_lo_)};
  if (std::holds_alternative<Quadratic>(family_)) out.push_back(0.0);
  std::erase_if(out, [](double p) { return !std::isfinite(p); });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double marginal_utility(const UtilityFn& u, double x) { return u.marginal(x); }
double inverse_demand(const UtilityFn& u, double price) { return u.inverse_demand(price); }
double utility_value(const UtilityFn& u, double x) { return u.value(x); }

Prosumer::Prosumer(std::vector<UtilityFn> devs, double gen, std::string label)
    : devices(std::move(devs)), g(gen), id(std::move(label)) {
  if (devices.empty()) throw DomainError("prosumer needs at least one device");
  if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("prosumer generation must be finite and >= 0");
}

double Prosumer::utility(std::span<const double> bundle) const {
  if (bundle.size() != devices.size()) throw DomainError("bundle size differs from device count");
  double total = 0.0;
  for (std::size_t k = 0; k < devices.size(); ++k) total += devices[k].value(bundle[k]);
  return total;
}

std::vector<double> Prosumer::demand_at(double price) const {
  std::vector<double> d;
  d.reserve(devices.size());
  for (const auto& u : devices) d.push_back(u.inverse_demand(price));
  return d;
}

double Prosumer::total_demand_at(double price) const {
  double total = 0.0;
  for (const auto& u : devices) total += u.inverse_demand(price);
  return total;
}

}  // namespace dera
