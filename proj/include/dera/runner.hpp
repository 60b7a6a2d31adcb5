#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dera/benchmarks.hpp"
#include "dera/scenario.hpp"

namespace dera {

/// A module failure tagged with the pipeline stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// One welfare ledger per (case, gamma, g), normalized per prosumer.
struct LedgerRow {
  CaseId case_id;
  double gamma = 0.0;
  double g = 0.0;
  WelfareLedger ledger;  // totals divided by N
  NemTariff tariff{0.0, 0.0, 0.0};
};

/// Population for one sweep point: the first round(gamma N) prosumers produce g.
Population sweep_population(const Scenario& s, double gamma, double g);

/// Tariff for a population: fixed, or Ramsey prices computed on it.
NemTariff resolve_tariff(const Scenario& s, const Population& pop);

/// Runs every requested case over the gamma x g grid on `threads` workers.
/// Rows are ordered by grid index (gamma outer, g inner, then case order).
std::vector<LedgerRow> run_case_grid(const Scenario& s, unsigned threads);

/// case_id,gamma,g,dera_surplus,consumer_surplus,producer_surplus,utility_surplus
std::string ledger_csv(const std::vector<LedgerRow>& rows);

/// Output file name -> content.
using Artifacts = std::map<std::string, std::string>;

Artifacts cases_artifacts(const Scenario& s, unsigned threads);
Artifacts bidcurve_artifacts(const Scenario& s);
Artifacts clearing_artifacts(const Scenario& s);
Artifacts sfe_artifacts(const Scenario& s);
Artifacts nashcheck_artifacts(const Scenario& s);
/// Every section present in the scenario.
Artifacts run_artifacts(const Scenario& s, unsigned threads);

std::uint64_t fnv1a64(std::string_view bytes);

/// JSON manifest listing each artifact with its size and hash, plus the input
/// hash, version and seeds. No timestamps, so reruns are byte-identical.
std::string manifest_json(const Scenario& s, std::string_view command, std::string_view input_text,
                          const Artifacts& files);

/// Writes artifacts and manifest.json into `dir`. Refuses an existing
/// directory unless `force`.
void write_artifacts(const std::string& dir, const Artifacts& files, bool force);

}  // namespace dera
