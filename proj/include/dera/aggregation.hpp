#pragma once

#include <span>
#include <vector>

#include "dera/benchmarks.hpp"
#include "dera/nem.hpp"
#include "dera/prosumer.hpp"

namespace dera {

/// Competing scheme whose surplus the DERA must match, plus the markup zeta.
struct CompetitiveTarget {
  enum class Base { NemPassive, NemActive, CcaPassive };

  Base base = Base::NemPassive;
  double zeta_pct = 0.0;
  NemTariff tariff{0.0, 0.0, 0.0};
  // Only read for CcaPassive; schedule() recomputes it from the population.
  CommunitySign community = CommunitySign::NetSeller;
};

struct ScheduledProsumer {
  std::vector<double> consumption;  // d*_n per device
  double omega = 0.0;               // payment from prosumer to DERA ($)
  double prosumer_surplus = 0.0;    // U_n(d*_n) - omega
  double floor = 0.0;               // K_n(g_n)
  double contribution = 0.0;        // omega - lmp (1'd* - g)
  bool profitable = true;           // contribution >= 0
};

struct DeraSchedule {
  std::vector<ScheduledProsumer> per_prosumer;
  double lmp = 0.0;
  double dera_profit = 0.0;

  /// Indices of prosumers the DERA serves at a loss.
  std::vector<std::size_t> unprofitable() const;
};

/// K_n(g_n) = (1 + zeta / 100) * S_base(g_n).
double competitive_floor(const CompetitiveTarget& target, const Prosumer& p);

/// Closed-form profit-maximizing schedule: d* = f(lmp) per device and a
/// payment that leaves each prosumer exactly at its competitive floor.
DeraSchedule schedule(std::span<const Prosumer> pop, const CompetitiveTarget& target, double lmp);

}  // namespace dera
