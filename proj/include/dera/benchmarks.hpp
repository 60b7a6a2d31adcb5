#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dera/nem.hpp"
#include "dera/prosumer.hpp"

namespace dera {

/// Net position of a community: sum of passive net consumption <= 0 is a seller.
enum class CommunitySign { NetSeller, NetBuyer };

/// The six participation models compared in the welfare study.
enum class CaseId {
  NemRamsey = 1,  // everyone stays with the utility under Ramsey prices
  CCA = 2,        // everyone joins a profit-neutral CCA
  TwoPart = 3,    // producers join a two-part-pricing DERA
  OnePart = 4,    // producers join a one-part-pricing DERA
  DeraVsNem = 5,  // competitive DERA matched to passive NEM surplus
  DeraVsCca = 6,  // competitive DERA matched to passive CCA surplus
};

std::string_view case_name(CaseId id);
CaseId case_from_int(int id);

struct Population {
  std::vector<Prosumer> prosumers;
  double gamma = 0.0;         // nominal producer fraction
  double network_cost = 0.0;  // utility network cost C
  double lmp = 0.0;           // $/kWh

  /// Network cost defaults to N * pi0 when not given.
  static Population make(std::vector<Prosumer> prosumers, double gamma, double lmp,
                         double pi_zero, std::optional<double> network_cost = std::nullopt);
};

struct WelfareLedger {
  CaseId case_id = CaseId::NemRamsey;
  double dera_surplus = 0.0;
  double consumer_surplus = 0.0;
  double producer_surplus = 0.0;
  double utility_surplus = 0.0;
  // Binding prices reported by the one/two-part models (zero elsewhere).
  double omega1 = 0.0;
  std::vector<double> omega2;
};

/// Producer if passive net consumption at this tariff is <= 0.
bool is_producer(const Prosumer& p, const NemTariff& t);

CommunitySign community_sign(std::span<const Prosumer> pop, const NemTariff& t);

/// Utility margin on passive NEM flows plus N pi0 minus network cost.
double utility_surplus(const Population& pop, const NemTariff& t);

/// Sum of passive NEM surpluses (the Ramsey objective).
double total_passive_surplus(std::span<const Prosumer> pop, const NemTariff& t);

struct RamseyOptions {
  double cap = 0.5;          // pi- searched on [0, cap]
  double grid_step = 1e-3;   // bracketing grid
  double tolerance = 1e-9;   // bisection width on pi-
};

/// Profit-neutral tariff with pi+ = pi- + spread maximizing total passive surplus.
/// Throws RootNotBracketed when the utility surplus never vanishes on the grid.
NemTariff ramsey_prices(const Population& pop, double spread, double pi_zero = 0.0,
                        RamseyOptions opts = {});

/// Passive consumption settled at pi- (net-seller community) or pi+ (net-buyer).
double cca_surplus(const Prosumer& p, const NemTariff& t, CommunitySign sign);

WelfareLedger one_part(const Population& pop, const NemTariff& t);
WelfareLedger two_part(const Population& pop, const NemTariff& t);

/// Dispatch one of the six cases at tariff t (normally the Ramsey tariff).
WelfareLedger run_case(CaseId id, const Population& pop, const NemTariff& t, double zeta_pct = 0.0);

}  // namespace dera
