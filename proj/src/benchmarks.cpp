#include "dera/benchmarks.hpp"

#include <cmath>
#include <limits>

#include "dera/aggregation.hpp"
#include "dera/errors.hpp"

namespace dera {

std::string_view case_name(CaseId id) {
  switch (id) {
    case CaseId::NemRamsey: return "nem_ramsey";
    case CaseId::CCA: return "cca";
    case CaseId::TwoPart: return "two_part";
    case CaseId::OnePart: return "one_part";
    case CaseId::DeraVsNem: return "dera_vs_nem";
    case CaseId::DeraVsCca: return "dera_vs_cca";
  }
  return "unknown";
}

CaseId case_from_int(int id) {
  if (id < 1 || id > 6) throw DomainError("case id must be in 1..6, got " + std::to_string(id));
  return static_cast<CaseId>(id);
}

Population Population::make(std::vector<Prosumer> prosumers, double gamma, double lmp,
                            double pi_zero, std::optional<double> network_cost) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
  Population pop;
  const double n = static_cast<double>(prosumers.size());
  pop.prosumers = std::move(prosumers);
  pop.gamma = gamma;
  pop.lmp = lmp;
  pop.network_cost = network_cost.value_or(n * pi_zero);
  if (!(pop.network_cost >= 0.0)) throw DomainError("network cost must be >= 0");
  return pop;
}

bool is_producer(const Prosumer& p, const NemTariff& t) {
  return p.total_demand_at(t.pi_plus) - p.g <= 0.0;
}

CommunitySign community_sign(std::span<const Prosumer> pop, const NemTariff& t) {
  double z = 0.0;
  for (const auto& p : pop) z += p.total_demand_at(t.pi_plus) - p.g;
  return z <= 0.0 ? CommunitySign::NetSeller : CommunitySign::NetBuyer;
}

double utility_surplus(const Population& pop, const NemTariff& t) {
  double s = 0.0;
  for (const auto& p : pop.prosumers) {
    const double z = p.total_demand_at(t.pi_plus) - p.g;
    const double rate = z <= 0.0 ? t.pi_minus : t.pi_plus;
    s += (rate - pop.lmp) * z;
  }
  const double n = static_cast<double>(pop.prosumers.size());
  return s + n * t.pi_zero - pop.network_cost;
}

double total_passive_surplus(std::span<const Prosumer> pop, const NemTariff& t) {
  double s = 0.0;
  for (const auto& p : pop) s += passive_optimum(p, t).surplus;
  return s;
}

NemTariff ramsey_prices(const Population& pop, double spread, double pi_zero, RamseyOptions opts) {
  if (!(spread >= 0.0)) throw DomainError("Ramsey spread must be >= 0");
  if (!(opts.cap > 0.0) || !(opts.grid_step > 0.0)) throw DomainError("Ramsey grid must be positive");

  auto tariff = [&](double minus) { return NemTariff{minus + spread, minus, pi_zero}; };
  auto constraint = [&](double minus) { return utility_surplus(pop, tariff(minus)); };
  const double zero_tol = 1e-12 * std::max<double>(1.0, static_cast<double>(pop.prosumers.size()));

  std::vector<double> roots;
  const auto steps = static_cast<long>(std::floor(opts.cap / opts.grid_step + 0.5));
  double prev_x = 0.0;
  double prev_s = constraint(0.0);
  if (std::abs(prev_s) <= zero_tol) roots.push_back(0.0);
  for (long i = 1; i <= steps; ++i) {
    const double x = static_cast<double>(i) * opts.grid_step;
    const double s = constraint(x);
    if (std::abs(s) <= zero_tol) {
      roots.push_back(x);
    } else if (std::abs(prev_s) > zero_tol && (prev_s < 0.0) != (s < 0.0)) {
      double lo = prev_x, hi = x, s_lo = prev_s;
      while (hi - lo > opts.tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double s_mid = constraint(mid);
        if ((s_mid < 0.0) == (s_lo < 0.0)) {
          lo = mid;
          s_lo = s_mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_s = s;
  }
  if (roots.empty()) throw RootNotBracketed("Ramsey pricing: utility surplus never vanishes on [0, cap]");

  double best_root = roots.front();
  double best_obj = -std::numeric_limits<double>::infinity();
  for (double r : roots) {
    const double obj = total_passive_surplus(pop.prosumers, tariff(r));
    if (obj > best_obj) {
      best_obj = obj;
      best_root = r;
    }
  }
  return tariff(best_root);
}

double cca_surplus(const Prosumer& p, const NemTariff& t, CommunitySign sign) {
  const auto d = p.demand_at(t.pi_plus);
  double total = 0.0;
  for (double x : d) total += x;
  const double z = total - p.g;
  const double rate = sign == CommunitySign::NetSeller ? t.pi_minus : t.pi_plus;
  return p.utility(d) - rate * z - t.pi_zero;
}

namespace {

struct Split {
  double consumers = 0.0;  // sum of passive NEM surplus over consumers
  double producers = 0.0;
};

Split passive_split(const Population& pop, const NemTariff& t) {
  Split s;
  for (const auto& p : pop.prosumers) {
    const double v = passive_optimum(p, t).surplus;
    (is_producer(p, t) ? s.producers : s.consumers) += v;
  }
  return s;
}

// Utility keeps only consumers when producers leave for a DERA.
double utility_surplus_consumers_only(const Population& pop, const NemTariff& t) {
  double s = 0.0;
  for (const auto& p : pop.prosumers) {
    if (is_producer(p, t)) continue;
    s += (t.pi_plus - pop.lmp) * (p.total_demand_at(t.pi_plus) - p.g);
  }
  return s;
}

}  // namespace

WelfareLedger one_part(const Population& pop, const NemTariff& t) {
  WelfareLedger out;
  out.case_id = CaseId::OnePart;
  // K_i <= omega1 [g - d]+ + U_i binds; with pi0 = 0 this is omega1 = pi-.
  out.omega1 = t.pi_minus;
  for (const auto& p : pop.prosumers) {
    if (!is_producer(p, t)) continue;
    const auto d = p.demand_at(t.pi_plus);
    const double export_kwh = std::max(p.g - p.total_demand_at(t.pi_plus), 0.0);
    if (export_kwh <= 0.0) continue;
    const double payment = passive_optimum(p, t).surplus - p.utility(d);  // omega1_i * export
    out.dera_surplus += pop.lmp * export_kwh - payment;
  }
  const Split split = passive_split(pop, t);
  out.consumer_surplus = split.consumers;
  out.producer_surplus = split.producers;
  out.utility_surplus = utility_surplus_consumers_only(pop, t);
  return out;
}

WelfareLedger two_part(const Population& pop, const NemTariff& t) {
  WelfareLedger out;
  out.case_id = CaseId::TwoPart;
  // Any omega1 is optimal; pass the LMP through and let omega2 absorb the rest.
  out.omega1 = pop.lmp;
  for (const auto& p : pop.prosumers) {
    if (!is_producer(p, t)) continue;
    const auto d = p.demand_at(t.pi_plus);
    double total = 0.0;
    for (double x : d) total += x;
    const double z = total - p.g;
    const double floor = passive_optimum(p, t).surplus;
    const double export_kwh = z < 0.0 ? -z : 0.0;
    const double omega2 = p.utility(d) + out.omega1 * export_kwh - floor;
    out.omega2.push_back(omega2);
    const double indicator = z < 0.0 ? 1.0 : 0.0;
    out.dera_surplus += omega2 * indicator - (pop.lmp - out.omega1) * z;
  }
  const Split split = passive_split(pop, t);
  out.consumer_surplus = split.consumers;
  out.producer_surplus = split.producers;
  out.utility_surplus = utility_surplus_consumers_only(pop, t);
  return out;
}

WelfareLedger run_case(CaseId id, const Population& pop, const NemTariff& t, double zeta_pct) {
  const double n = static_cast<double>(pop.prosumers.size());
  WelfareLedger out;
  out.case_id = id;
  switch (id) {
    case CaseId::NemRamsey: {
      const Split split = passive_split(pop, t);
      out.consumer_surplus = split.consumers;
      out.producer_surplus = split.producers;
      out.utility_surplus = utility_surplus(pop, t);
      break;
    }
    case CaseId::CCA: {
      const CommunitySign sign = community_sign(pop.prosumers, t);
      const double rate = sign == CommunitySign::NetSeller ? t.pi_minus : t.pi_plus;
      double margin = 0.0;
      for (const auto& p : pop.prosumers) {
        const double s = cca_surplus(p, t, sign);
        (is_producer(p, t) ? out.producer_surplus : out.consumer_surplus) += s;
        margin += (rate - pop.lmp) * (p.total_demand_at(t.pi_plus) - p.g);
      }
      out.utility_surplus = margin + n * t.pi_zero - pop.network_cost;
      break;
    }
    case CaseId::TwoPart: {
      out = two_part(pop, t);
      break;
    }
    case CaseId::OnePart: {
      out = one_part(pop, t);
      break;
    }
    case CaseId::DeraVsNem:
    case CaseId::DeraVsCca: {
      CompetitiveTarget target;
      target.base = id == CaseId::DeraVsNem ? CompetitiveTarget::Base::NemPassive
                                            : CompetitiveTarget::Base::CcaPassive;
      target.zeta_pct = zeta_pct;
      target.tariff = t;
      const DeraSchedule sched = schedule(pop.prosumers, target, pop.lmp);
      out.dera_surplus = sched.dera_profit;
      for (std::size_t i = 0; i < pop.prosumers.size(); ++i) {
        const double s = sched.per_prosumer[i].prosumer_surplus;
        (is_producer(pop.prosumers[i], t) ? out.producer_surplus : out.consumer_surplus) += s;
      }
      // Every prosumer leaves; the fixed charge covers the network cost.
      out.utility_surplus = n * t.pi_zero - pop.network_cost;
      break;
    }
  }
  return out;
}

}  // namespace dera
