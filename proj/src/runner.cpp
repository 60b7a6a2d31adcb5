#include "dera/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "dera/bidding.hpp"
#include "dera/clearing.hpp"
#include "dera/errors.hpp"
#include "dera/sfe.hpp"
#include "json.hpp"

#ifndef DERA_VERSION
#define DERA_VERSION "0.0.0"
#endif

namespace dera {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string family_name(const sfe::SupplyFamily& f) {
  switch (f.kind()) {
    case sfe::SupplyFamily::Kind::Affine: return "affine";
    case sfe::SupplyFamily::Kind::Reciprocal: return "reciprocal";
    case sfe::SupplyFamily::Kind::Power: return "power";
  }
  return "";
}

ojson problem_json(const sfe::Problem& p) {
  ojson j;
  j["family"] = family_name(p.family);
  if (p.family.kind() == sfe::SupplyFamily::Kind::Power) j["eta"] = p.family.eta();
  j["demand_kwh"] = p.demand;
  j["participants"] = ojson::array();
  for (const auto& part : p.participants) {
    ojson cost;
    if (const auto* q = std::get_if<sfe::QuadraticCost>(&part.cost.spec())) {
      cost = {{"kind", "quadratic"}, {"linear_usd_per_kwh", q->linear}, {"quadratic_usd_per_kwh2", q->quadratic}};
    } else {
      const auto& e = std::get<sfe::ExponentialCost>(part.cost.spec());
      cost = {{"kind", "exponential"}, {"scale_usd", e.scale}, {"rate_per_kwh", e.rate}};
    }
    j["participants"].push_back({{"name", part.name},
                                 {"offset_kwh", part.offset},
                                 {"cost", cost},
                                 {"p_lo_kwh", part.p_lo},
                                 {"p_hi_kwh", part.p_hi}});
  }
  return j;
}

ojson solution_json(const sfe::Problem& p, const sfe::Solution& s) {
  ojson j;
  j["price_usd_per_kwh"] = s.price;
  j["participants"] = ojson::array();
  for (std::size_t m = 0; m < p.participants.size(); ++m) {
    ojson row{{"name", p.participants[m].name}, {"allocation_kwh", s.allocations[m]}, {"profit_usd", s.profits[m]}};
    if (!s.w.empty()) row["w"] = s.w[m];
    j["participants"].push_back(row);
  }
  return j;
}

const SfeSpec& need_sfe(const Scenario& s) {
  if (!s.sfe) throw StageError("sfe", "scenario has no sfe section");
  return *s.sfe;
}

}  // namespace

Population sweep_population(const Scenario& s, double gamma, double g) {
  const auto& spec = *s.population;
  std::vector<UtilityFn> devices;
  for (const auto& d : spec.devices) devices.push_back(d.make());
  const auto producers = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(spec.n)));
  std::vector<Prosumer> pros;
  pros.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) pros.emplace_back(devices, i < producers ? g : 0.0, "p" + std::to_string(i));
  return Population::make(std::move(pros), gamma, s.lmp, s.tariff.pi_zero, s.network_cost);
}

NemTariff resolve_tariff(const Scenario& s, const Population& pop) {
  const auto& t = s.tariff;
  if (t.mode == TariffSpec::Mode::Fixed) return NemTariff{t.pi_plus, t.pi_minus, t.pi_zero};
  RamseyOptions opts;
  opts.cap = t.cap;
  return ramsey_prices(pop, t.spread, t.pi_zero, opts);
}

std::vector<LedgerRow> run_case_grid(const Scenario& s, unsigned threads) {
  if (!s.cases) throw StageError("cases", "scenario has no cases section");
  const auto gammas = s.cases->gamma.values();
  const auto gs = s.cases->g.values();
  const auto& ids = s.cases->ids;
  const std::size_t points = gammas.size() * gs.size();
  std::vector<std::vector<LedgerRow>> out(points);
  std::vector<std::string> errors(points);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points; i = next++) {
      const double gamma = gammas[i / gs.size()], g = gs[i % gs.size()];
      try {
        const Population pop = sweep_population(s, gamma, g);
        const NemTariff t = resolve_tariff(s, pop);
        const double n = static_cast<double>(pop.prosumers.size());
        for (CaseId id : ids) {
          WelfareLedger l = run_case(id, pop, t, s.zeta_pct);
          l.dera_surplus /= n;
          l.consumer_surplus /= n;
          l.producer_surplus /= n;
          l.utility_surplus /= n;
          out[i].push_back(LedgerRow{id, gamma, g, std::move(l), t});
        }
      } catch (const std::exception& e) {
        errors[i] = "gamma=" + fmt(gamma) + " g=" + fmt(g) + ": " + e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& e : errors)
    if (!e.empty()) throw StageError("cases", e);
  std::vector<LedgerRow> rows;
  for (auto& v : out) std::move(v.begin(), v.end(), std::back_inserter(rows));
  return rows;
}

std::string ledger_csv(const std::vector<LedgerRow>& rows) {
  std::string out = "case_id,gamma,g,dera_surplus,consumer_surplus,producer_surplus,utility_surplus\r\n";
  for (const auto& r : rows) {
    out += std::to_string(static_cast<int>(r.case_id)) + "," + fmt(r.gamma) + "," + fmt(r.g) + "," +
           fmt(r.ledger.dera_surplus) + "," + fmt(r.ledger.consumer_surplus) + "," + fmt(r.ledger.producer_surplus) +
           "," + fmt(r.ledger.utility_surplus) + "\r\n";
  }
  return out;
}

Artifacts cases_artifacts(const Scenario& s, unsigned threads) {
  return {{"ledger.csv", ledger_csv(run_case_grid(s, threads))}};
}

Artifacts bidcurve_artifacts(const Scenario& s) {
  if (!s.bid_curve) throw StageError("bidcurve", "scenario has no bid_curve section");
  return stage("bidcurve", [&] {
    const auto pop = build_population(*s.population);
    const auto curve = aggregate_supply(pop, s.bid_curve->g_total);
    const auto pts = export_points(curve, s.bid_curve->price_lo, s.bid_curve->price_hi, s.bid_curve->points);
    return Artifacts{{"bid_curve.csv", bid_curve_csv(pts)}};
  });
}

Artifacts clearing_artifacts(const Scenario& s) {
  if (!s.clearing) throw StageError("clear", "scenario has no clearing section");
  return stage("clear", [&] {
    const auto pop = build_population(*s.population);
    const auto [direct, dera] = efficiency_check(pop, s.clearing->demand);
    std::vector<SupplyCurve> direct_curves;
    for (const auto& p : pop) direct_curves.push_back(prosumer_supply(p));
    const std::vector<SupplyCurve> dera_curves{aggregate_supply(pop)};
    auto total = [](const ClearingResult& r) {
      double t = 0.0;
      for (double v : r.participant_surpluses) t += v;
      return t;
    };
    ojson summary;
    summary["demand_kwh"] = s.clearing->demand;
    summary["direct"] = {{"price_usd_per_kwh", direct.price},
                         {"social_welfare_usd", direct.social_welfare},
                         {"participant_surplus_usd", total(direct)}};
    summary["dera"] = {{"price_usd_per_kwh", dera.price},
                       {"social_welfare_usd", dera.social_welfare},
                       {"participant_surplus_usd", total(dera)}};
    summary["price_gap"] = std::abs(direct.price - dera.price);
    summary["welfare_gap"] = std::abs(direct.social_welfare - dera.social_welfare);
    return Artifacts{{"clearing_direct.csv", clearing_csv(direct_curves, direct)},
                     {"clearing_dera.csv", clearing_csv(dera_curves, dera)},
                     {"clearing_summary.json", summary.dump(2) + "\n"}};
  });
}

Artifacts sfe_artifacts(const Scenario& s) {
  const auto& spec = need_sfe(s);
  return stage("sfe", [&] {
    const auto sol = sfe::solve_sfe(spec.problem);
    const auto ce = sfe::solve_competitive(spec.problem);
    ojson j;
    j["problem"] = problem_json(spec.problem);
    j["sfe"] = solution_json(spec.problem, sol);
    j["competitive"] = solution_json(spec.problem, ce);
    return Artifacts{{"sfe.json", j.dump(2) + "\n"}};
  });
}

Artifacts nashcheck_artifacts(const Scenario& s) {
  const auto& spec = need_sfe(s);
  return stage("nashcheck", [&] {
    const auto sol = sfe::solve_sfe(spec.problem);
    const auto rep = sfe::nash_check(spec.problem, sol.w, spec.nash_grid);
    const auto traj = sfe::best_response_dynamics(spec.problem, sol.w, spec.br_rounds);
    double dev = 0.0;
    for (std::size_t m = 0; m < sol.w.size(); ++m)
      dev = std::max(dev, std::abs(traj.w.back()[m] - sol.w[m]) / std::max(std::abs(sol.w[m]), 1e-300));
    ojson j;
    j["grid"] = spec.nash_grid;
    j["equilibrium"] = rep.equilibrium;
    j["max_gain_usd"] = rep.max_gain;
    j["participants"] = ojson::array();
    for (std::size_t m = 0; m < rep.gains.size(); ++m)
      j["participants"].push_back({{"name", spec.problem.participants[m].name},
                                   {"profit_usd", rep.profit_at_point[m]},
                                   {"gain_usd", rep.gains[m]}});
    j["best_response"] = {{"rounds", traj.w.size() - 1},
                          {"converged", traj.converged},
                          {"max_rel_deviation", dev}};
    return Artifacts{{"nash.json", j.dump(2) + "\n"}};
  });
}

Artifacts run_artifacts(const Scenario& s, unsigned threads) {
  Artifacts all;
  auto add = [&](Artifacts a) { all.merge(a); };
  if (s.cases) add(cases_artifacts(s, threads));
  if (s.bid_curve) add(bidcurve_artifacts(s));
  if (s.clearing) add(clearing_artifacts(s));
  if (s.sfe) {
    add(sfe_artifacts(s));
    add(nashcheck_artifacts(s));
  }
  if (all.empty()) throw StageError("run", "scenario has nothing to run");
  return all;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_json(const Scenario& s, std::string_view command, std::string_view input_text,
                          const Artifacts& files) {
  auto hex = [](std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
  };
  ojson j;
  j["tool"] = "dera";
  j["version"] = DERA_VERSION;
  j["command"] = command;
  j["scenario"] = s.name;
  j["input_fnv1a64"] = hex(fnv1a64(input_text));
  j["seeds"] = ojson::object();
  if (s.population && s.population->seed) j["seeds"]["population"] = *s.population->seed;
  j["files"] = ojson::array();
  for (const auto& [name, content] : files)
    j["files"].push_back({{"path", name}, {"bytes", content.size()}, {"fnv1a64", hex(fnv1a64(content))}});
  return j.dump(2) + "\n";
}

void write_artifacts(const std::string& dir, const Artifacts& files, bool force) {
  const fs::path root(dir);
  if (fs::exists(root)) {
    if (!force) throw StageError("output", "directory " + dir + " exists (use --force to overwrite)");
    for (const auto& [name, content] : files) fs::remove(root / name);
  }
  fs::create_directories(root);
  for (const auto& [name, content] : files) {
    std::ofstream out(root / name, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("output", "cannot write " + (root / name).string());
    out << content;
  }
}

}  // namespace dera
