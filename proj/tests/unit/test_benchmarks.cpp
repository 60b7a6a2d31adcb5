#include <cmath>

#include "doctest.h"
#include "dera/benchmarks.hpp"
#include "dera/errors.hpp"

using namespace dera;
using doctest::Approx;

namespace {

Prosumer one_device(double g) { return Prosumer({UtilityFn::quadratic(0.24, 0.24)}, g); }

Population mixed(std::size_t n, double gamma, double g, double lmp = 0.03) {
  std::vector<Prosumer> pros;
  const auto producers = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) pros.push_back(one_device(i < producers ? g : 0.0));
  return Population::make(std::move(pros), gamma, lmp, 0.0);
}

const NemTariff kTariff{0.06, 0.03, 0.0};

}  // namespace

TEST_CASE("case ids") {
  CHECK(case_from_int(5) == CaseId::DeraVsNem);
  CHECK(case_name(CaseId::CCA) == "cca");
  CHECK_THROWS_AS(case_from_int(0), DomainError);
  CHECK_THROWS_AS(case_from_int(7), DomainError);
}

TEST_CASE("utility surplus") {
  CHECK(utility_surplus(mixed(3, 0.3, 2.0), NemTariff{0.03, 0.03, 0.0}) == Approx(0.0));
  CHECK(utility_surplus(mixed(1, 0.0, 0.0), kTariff) == Approx(0.0225));
  const auto producer = Population::make({one_device(5.0)}, 1.0, 0.03, 0.0);
  CHECK(std::abs(utility_surplus(producer, kTariff)) <= 1e-15);
  const auto costly = Population::make({one_device(0.0)}, 0.0, 0.03, 0.1, 0.5);
  CHECK(utility_surplus(costly, NemTariff{0.06, 0.03, 0.1}) == Approx(0.0225 + 0.1 - 0.5));
}

TEST_CASE("Ramsey prices") {
  const auto consumers = ramsey_prices(mixed(10, 0.0, 0.0), 0.0);
  CHECK(consumers.pi_plus == Approx(0.03).epsilon(1e-9));
  CHECK(consumers.pi_minus == Approx(0.03).epsilon(1e-9));
  const auto producers = ramsey_prices(mixed(10, 1.0, 3.0), 0.0);
  CHECK(producers.pi_minus == Approx(0.03).epsilon(1e-9));

  const auto pop = mixed(10, 0.5, 2.0);
  const auto t = ramsey_prices(pop, 0.03);
  CHECK(t.pi_plus == Approx(t.pi_minus + 0.03));
  CHECK(std::abs(utility_surplus(pop, t)) <= 1e-9);
  // Fine-grid oracle: first sign change of the constraint.
  double prev = utility_surplus(pop, NemTariff{0.03, 0.0, 0.0});
  double oracle_root = -1.0;
  for (int i = 1; i <= 200000; ++i) {
    const double minus = i * 1e-6;
    const double cur = utility_surplus(pop, NemTariff{minus + 0.03, minus, 0.0});
    if ((prev < 0.0) != (cur < 0.0) || cur == 0.0) {
      oracle_root = minus;
      break;
    }
    prev = cur;
  }
  REQUIRE(oracle_root >= 0.0);
  CHECK(std::abs(t.pi_minus - oracle_root) <= 1e-6);
}

TEST_CASE("Ramsey search reports an empty bracket") {
  RamseyOptions opts;
  opts.cap = 0.01;
  CHECK_THROWS_AS(ramsey_prices(mixed(10, 0.0, 0.0), 0.0, 0.0, opts), RootNotBracketed);
}

TEST_CASE("CCA surplus") {
  CHECK(cca_surplus(one_device(0.0), kTariff, CommunitySign::NetSeller) == Approx(0.09));
  CHECK(cca_surplus(one_device(5.0), kTariff, CommunitySign::NetSeller) == Approx(passive_optimum(one_device(5.0), kTariff).surplus));
  CHECK(cca_surplus(one_device(0.0), kTariff, CommunitySign::NetBuyer) == Approx(passive_optimum(one_device(0.0), kTariff).surplus));
  // Weak dominance over passive NEM for every member.
  for (double g : {0.0, 0.5, 0.75, 1.0, 5.0}) {
    const auto p = one_device(g);
    const auto pop = mixed(10, 0.5, 5.0);
    const auto sign = community_sign(pop.prosumers, kTariff);
    CHECK(cca_surplus(p, kTariff, sign) >= passive_optimum(p, kTariff).surplus - 1e-12);
  }
}

TEST_CASE("one-part and two-part pricing") {
  const auto pop = mixed(10, 0.5, 3.0, 0.02);  // LMP below the sell rate
  const auto one = one_part(pop, kTariff);
  const auto two = two_part(pop, kTariff);
  CHECK(one.dera_surplus < 0.0);
  CHECK(std::abs(one.dera_surplus - two.dera_surplus) <= 1e-12);
  CHECK(one.omega1 == kTariff.pi_minus);
  REQUIRE(two.omega2.size() == 5);
  const auto d = one_device(3.0).demand_at(kTariff.pi_plus);
  const double export_kwh = 3.0 - d[0];
  const double floor = passive_optimum(one_device(3.0), kTariff).surplus;
  CHECK(two.omega2[0] == Approx(one_device(3.0).utility(d) + two.omega1 * export_kwh - floor));

  const auto none = mixed(10, 0.0, 3.0);
  CHECK(one_part(none, kTariff).dera_surplus == 0.0);
  CHECK(two_part(none, kTariff).dera_surplus == 0.0);
  CHECK(two_part(none, kTariff).omega2.empty());

  const auto at_par = mixed(10, 0.5, 3.0, kTariff.pi_minus);
  CHECK(std::abs(one_part(at_par, kTariff).dera_surplus) <= 1e-12);
  CHECK(std::abs(two_part(at_par, kTariff).dera_surplus) <= 1e-12);
}

TEST_CASE("case dispatch") {
  const auto pop = mixed(20, 0.4, 2.5);
  const auto t = ramsey_prices(pop, 0.03);
  const auto nem = run_case(CaseId::NemRamsey, pop, t);
  const auto cca = run_case(CaseId::CCA, pop, t);
  CHECK(cca.producer_surplus == Approx(nem.producer_surplus));
  CHECK(cca.consumer_surplus >= nem.consumer_surplus);
  CHECK(cca.utility_surplus <= 1e-12);  // net-seller community loses the spread
  for (CaseId id : {CaseId::DeraVsNem, CaseId::DeraVsCca}) CHECK(std::abs(run_case(id, pop, t).utility_surplus) <= 1e-10);
  const double best = run_case(CaseId::DeraVsNem, pop, t).dera_surplus;
  for (int id = 1; id <= 6; ++id) CHECK(run_case(case_from_int(id), pop, t).dera_surplus <= best + 1e-9);
  CHECK(run_case(CaseId::TwoPart, pop, t).case_id == CaseId::TwoPart);
}
