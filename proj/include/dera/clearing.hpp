#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dera/bidding.hpp"
#include "dera/prosumer.hpp"

namespace dera {

struct ClearingResult {
  double price = 0.0;
  std::vector<double> injections;  // per participant, kWh
  double demand = 0.0;             // inelastic D
  double social_welfare = 0.0;     // sum of consumption utility (value of D omitted)
  std::vector<double> participant_surpluses;  // U(d) + price * injection
  std::vector<std::vector<double>> consumption;  // per participant, per device
};

/// Competitive clearing of nondecreasing supply curves against inelastic demand.
/// Demand falling inside a supply jump is rationed pro rata to each curve's jump.
ClearingResult clear(std::span<const SupplyCurve> curves, double demand);

/// Clears once with every prosumer bidding directly and once with the single
/// DERA aggregate curve; returns {direct, dera}.
std::pair<ClearingResult, ClearingResult> efficiency_check(std::span<const Prosumer> pop, double demand);

/// RFC-4180 CSV: participant_id,injection_kwh,surplus_usd.
std::string clearing_csv(std::span<const SupplyCurve> curves, const ClearingResult& r);

}  // namespace dera
