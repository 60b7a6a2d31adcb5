// Python bindings for the core models, solvers and scenario runner.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dera/aggregation.hpp"
#include "dera/benchmarks.hpp"
#include "dera/bidding.hpp"
#include "dera/clearing.hpp"
#include "dera/errors.hpp"
#include "dera/nem.hpp"
#include "dera/prosumer.hpp"
#include "dera/runner.hpp"
#include "dera/scenario.hpp"
#include "dera/sfe.hpp"

namespace py = pybind11;
using namespace dera;

namespace {

void bind_errors(py::module_& m) {
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RootNotBracketed>(m, "RootNotBracketed", PyExc_RuntimeError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_RuntimeError);
  py::register_exception<NoEquilibriumError>(m, "NoEquilibriumError", PyExc_RuntimeError);
  py::register_exception<NonconvexityError>(m, "NonconvexityError", PyExc_RuntimeError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
}

void bind_prosumers(py::module_& m) {
  py::class_<UtilityFn>(m, "UtilityFn")
      .def_static("quadratic", &UtilityFn::quadratic, py::arg("alpha"), py::arg("beta"), py::arg("d_lo") = 0.0,
                  py::arg("d_hi") = 10.0)
      .def_static("log", &UtilityFn::log, py::arg("a"), py::arg("scale"), py::arg("d_lo") = 0.0, py::arg("d_hi") = 10.0)
      .def_static("isoelastic", &UtilityFn::isoelastic, py::arg("a"), py::arg("eta"), py::arg("d_lo"), py::arg("d_hi"))
      .def_property_readonly("d_lo", &UtilityFn::d_lo)
      .def_property_readonly("d_hi", &UtilityFn::d_hi)
      .def("marginal", &UtilityFn::marginal)
      .def("value", &UtilityFn::value)
      .def("inverse_demand", &UtilityFn::inverse_demand)
      .def("breakpoints", &UtilityFn::breakpoints);

  py::class_<Prosumer>(m, "Prosumer")
      .def(py::init<std::vector<UtilityFn>, double, std::string>(), py::arg("devices"), py::arg("g"),
           py::arg("id") = "")
      .def_readonly("devices", &Prosumer::devices)
      .def_readwrite("g", &Prosumer::g)
      .def_readwrite("id", &Prosumer::id)
      .def("utility", [](const Prosumer& p, const std::vector<double>& x) { return p.utility(x); })
      .def("demand_at", &Prosumer::demand_at)
      .def("total_demand_at", &Prosumer::total_demand_at);

  m.def("random_population", &random_population, py::arg("n"), py::arg("seed"));
}

void bind_nem(py::module_& m) {
  py::class_<NemTariff>(m, "NemTariff")
      .def(py::init<double, double, double>(), py::arg("pi_plus"), py::arg("pi_minus"), py::arg("pi_zero") = 0.0)
      .def_readonly("pi_plus", &NemTariff::pi_plus)
      .def_readonly("pi_minus", &NemTariff::pi_minus)
      .def_readonly("pi_zero", &NemTariff::pi_zero);

  py::enum_<Regime>(m, "Regime").value("Sell", Regime::Sell).value("Buy", Regime::Buy).value("Island", Regime::Island);

  py::class_<NemOutcome>(m, "NemOutcome")
      .def_readonly("d_total", &NemOutcome::d_total)
      .def_readonly("per_device", &NemOutcome::per_device)
      .def_readonly("surplus", &NemOutcome::surplus)
      .def_readonly("regime", &NemOutcome::regime)
      .def_readonly("mu", &NemOutcome::mu);

  m.def("bill", &bill);
  m.def("passive_optimum", &passive_optimum);
  m.def("active_optimum", &active_optimum);
}

void bind_aggregation(py::module_& m) {
  py::enum_<CompetitiveTarget::Base>(m, "TargetBase")
      .value("NemPassive", CompetitiveTarget::Base::NemPassive)
      .value("NemActive", CompetitiveTarget::Base::NemActive)
      .value("CcaPassive", CompetitiveTarget::Base::CcaPassive);

  py::class_<ScheduledProsumer>(m, "ScheduledProsumer")
      .def_readonly("consumption", &ScheduledProsumer::consumption)
      .def_readonly("omega", &ScheduledProsumer::omega)
      .def_readonly("prosumer_surplus", &ScheduledProsumer::prosumer_surplus)
      .def_readonly("floor", &ScheduledProsumer::floor)
      .def_readonly("contribution", &ScheduledProsumer::contribution);

  py::class_<DeraSchedule>(m, "DeraSchedule")
      .def_readonly("per_prosumer", &DeraSchedule::per_prosumer)
      .def_readonly("dera_profit", &DeraSchedule::dera_profit);

  m.def(
      "schedule",
      [](const std::vector<Prosumer>& pop, CompetitiveTarget::Base base, const NemTariff& t, double zeta_pct,
         double lmp) {
        CompetitiveTarget target;
        target.base = base;
        target.tariff = t;
        target.zeta_pct = zeta_pct;
        return schedule(pop, target, lmp);
      },
      py::arg("population"), py::arg("base"), py::arg("tariff"), py::arg("zeta_pct"), py::arg("lmp"));
}

void bind_market(py::module_& m) {
  py::class_<SupplyCurve>(m, "SupplyCurve")
      .def("eval", &SupplyCurve::eval)
      .def("__call__", &SupplyCurve::eval)
      .def_property_readonly("q_min", &SupplyCurve::q_min)
      .def_property_readonly("q_max", &SupplyCurve::q_max)
      .def_property_readonly("breakpoints", &SupplyCurve::breakpoints);

  m.def("prosumer_supply", &prosumer_supply);
  m.def(
      "aggregate_supply",
      [](const std::vector<Prosumer>& pop, std::optional<double> g) { return aggregate_supply(pop, g); },
      py::arg("population"), py::arg("g_estimate") = py::none());
  m.def("inverse_price", &inverse_price);
  m.def("export_points", &export_points, py::arg("curve"), py::arg("lo"), py::arg("hi"), py::arg("points"));

  py::class_<ClearingResult>(m, "ClearingResult")
      .def_readonly("price", &ClearingResult::price)
      .def_readonly("injections", &ClearingResult::injections)
      .def_readonly("demand", &ClearingResult::demand)
      .def_readonly("social_welfare", &ClearingResult::social_welfare)
      .def_readonly("participant_surpluses", &ClearingResult::participant_surpluses);

  m.def("clear", [](const std::vector<SupplyCurve>& curves, double demand) { return clear(curves, demand); });
  m.def("efficiency_check", [](const std::vector<Prosumer>& pop, double demand) { return efficiency_check(pop, demand); });
}

void bind_benchmarks(py::module_& m) {
  py::enum_<CaseId>(m, "CaseId")
      .value("NemRamsey", CaseId::NemRamsey)
      .value("CCA", CaseId::CCA)
      .value("TwoPart", CaseId::TwoPart)
      .value("OnePart", CaseId::OnePart)
      .value("DeraVsNem", CaseId::DeraVsNem)
      .value("DeraVsCca", CaseId::DeraVsCca);

  py::class_<Population>(m, "Population")
      .def_static("make", &Population::make, py::arg("prosumers"), py::arg("gamma"), py::arg("lmp"),
                  py::arg("pi_zero"), py::arg("network_cost") = py::none())
      .def_readonly("prosumers", &Population::prosumers)
      .def_readonly("network_cost", &Population::network_cost);

  py::class_<WelfareLedger>(m, "WelfareLedger")
      .def_readonly("case_id", &WelfareLedger::case_id)
      .def_readonly("dera_surplus", &WelfareLedger::dera_surplus)
      .def_readonly("consumer_surplus", &WelfareLedger::consumer_surplus)
      .def_readonly("producer_surplus", &WelfareLedger::producer_surplus)
      .def_readonly("utility_surplus", &WelfareLedger::utility_surplus);

  m.def("ramsey_prices",
        [](const Population& pop, double spread, double pi_zero) { return ramsey_prices(pop, spread, pi_zero); },
        py::arg("population"), py::arg("spread"), py::arg("pi_zero") = 0.0);
  m.def("run_case", &run_case, py::arg("case_id"), py::arg("population"), py::arg("tariff"), py::arg("zeta_pct") = 0.0);
}

void bind_sfe(py::module_& top) {
  using namespace dera::sfe;
  auto m = top.def_submodule("sfe", "Supply function equilibrium among price-making aggregators");

  py::class_<SupplyFamily>(m, "SupplyFamily")
      .def_static("affine", &SupplyFamily::affine)
      .def_static("reciprocal", &SupplyFamily::reciprocal)
      .def_static("power", [](double eta) { return SupplyFamily::power(eta); }, py::arg("eta"))
      .def_property_readonly("elasticity", &SupplyFamily::elasticity);

  py::class_<CostFn>(m, "CostFn")
      .def_static("quadratic", [](double a, double b) { return CostFn{QuadraticCost{a, b}}; }, py::arg("linear"),
                  py::arg("quadratic"))
      .def_static("exponential", [](double s, double r) { return CostFn{ExponentialCost{s, r}}; }, py::arg("scale"),
                  py::arg("rate"))
      .def("value", &CostFn::value)
      .def("marginal", &CostFn::marginal);

  py::class_<Participant>(m, "Participant")
      .def(py::init([](std::string name, double offset, CostFn cost, double p_lo, double p_hi) {
             return Participant{std::move(name), offset, std::move(cost), p_lo, p_hi};
           }),
           py::arg("name"), py::arg("offset"), py::arg("cost"), py::arg("p_lo"), py::arg("p_hi"));

  py::class_<Problem>(m, "Problem")
      .def(py::init([](SupplyFamily f, std::vector<Participant> parts, double demand) {
             return Problem{f, std::move(parts), demand};
           }),
           py::arg("family"), py::arg("participants"), py::arg("demand"));

  py::class_<Solution>(m, "Solution")
      .def_readonly("price", &Solution::price)
      .def_readonly("allocations", &Solution::allocations)
      .def_readonly("w", &Solution::w)
      .def_readonly("profits", &Solution::profits);

  py::class_<NashReport>(m, "NashReport")
      .def_readonly("max_gain", &NashReport::max_gain)
      .def_readonly("gains", &NashReport::gains)
      .def_readonly("profit_at_point", &NashReport::profit_at_point)
      .def_readonly("equilibrium", &NashReport::equilibrium);

  m.def("lemma_price", [](const SupplyFamily& f, const std::vector<double>& r, const std::vector<double>& w,
                          double d) { return lemma_price(f, r, w, d); });
  m.def("solve_sfe", &solve_sfe);
  m.def("solve_competitive", &solve_competitive);
  m.def(
      "nash_check",
      [](const Problem& p, const std::vector<double>& w, std::size_t grid) { return nash_check(p, w, grid); },
      py::arg("problem"), py::arg("w"), py::arg("grid") = 2000);
  m.def(
      "best_response_dynamics",
      [](const Problem& p, const std::vector<double>& w0, std::size_t rounds) {
        const auto t = best_response_dynamics(p, w0, rounds);
        return py::make_tuple(t.w, t.converged);
      },
      py::arg("problem"), py::arg("w0"), py::arg("rounds"));
}

void bind_scenarios(py::module_& m) {
  // Returns output file name -> content for every section of the scenario.
  m.def(
      "run_scenario",
      [](const std::string& path, unsigned threads) {
        const Scenario s = parse_scenario(path);
        py::gil_scoped_release release;
        return run_artifacts(s, threads);
      },
      py::arg("path"), py::arg("threads") = 1);
}

}  // namespace

PYBIND11_MODULE(deramarket, m) {
  m.doc() = "Aggregated prosumer markets: NEM benchmarks, DERA bidding and supply function equilibrium";
  m.attr("__version__") = DERA_VERSION;
  bind_errors(m);
  bind_prosumers(m);
  bind_nem(m);
  bind_aggregation(m);
  bind_market(m);
  bind_benchmarks(m);
  bind_sfe(m);
  bind_scenarios(m);
}
