#include "dera/aggregation.hpp"

#include <cmath>

#include "dera/errors.hpp"

namespace dera {

std::vector<std::size_t> DeraSchedule::unprofitable() const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < per_prosumer.size(); ++n)
    if (!per_prosumer[n].profitable) out.push_back(n);
  return out;
}

double competitive_floor(const CompetitiveTarget& target, const Prosumer& p) {
  if (!(target.zeta_pct >= 0.0)) throw DomainError("zeta must be >= 0");
  double base = 0.0;
  switch (target.base) {
    case CompetitiveTarget::Base::NemPassive:
      base = passive_optimum(p, target.tariff).surplus;
      break;
    case CompetitiveTarget::Base::NemActive:
      base = active_optimum(p, target.tariff).surplus;
      break;
    case CompetitiveTarget::Base::CcaPassive:
      base = cca_surplus(p, target.tariff, target.community);
      break;
  }
  return (1.0 + target.zeta_pct / 100.0) * base;
}

DeraSchedule schedule(std::span<const Prosumer> pop, const CompetitiveTarget& target, double lmp) {
  CompetitiveTarget effective = target;
  if (target.base == CompetitiveTarget::Base::CcaPassive)
    effective.community = community_sign(pop, target.tariff);

  DeraSchedule out;
  out.lmp = lmp;
  out.per_prosumer.reserve(pop.size());
  for (const auto& p : pop) {
    ScheduledProsumer s;
    s.consumption = p.demand_at(lmp);
    s.floor = competitive_floor(effective, p);
    const double u = p.utility(s.consumption);
    s.omega = u - s.floor;
    s.prosumer_surplus = u - s.omega;
    double total = 0.0;
    for (double d : s.consumption) total += d;
    s.contribution = s.omega - lmp * (total - p.g);
    s.profitable = s.contribution >= 0.0;
    out.per_prosumer.push_back(std::move(s));
  }
  // Fixed summation order keeps the profit reproducible.
  for (const auto& s : out.per_prosumer) out.dera_profit += s.contribution;
  return out;
}

}  // namespace dera
