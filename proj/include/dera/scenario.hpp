#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dera/benchmarks.hpp"
#include "dera/prosumer.hpp"
#include "dera/sfe.hpp"

namespace dera {

/// Device template shared by every prosumer of a population.
struct DeviceSpec {
  UtilityFamily family;
  double d_lo = 0.0;
  double d_hi = 10.0;

  UtilityFn make() const { return UtilityFn{family, d_lo, d_hi}; }
};

/// Either a fixed template population or a seeded random mix of families.
struct PopulationSpec {
  enum class Kind { Template, Random };

  Kind kind = Kind::Template;
  std::size_t n = 0;
  std::vector<DeviceSpec> devices;        // Template only
  std::vector<double> g;                  // explicit per-prosumer generation (Template)
  std::optional<std::pair<double, double>> g_uniform;  // drawn per prosumer (needs seed)
  std::optional<std::uint64_t> seed;
};

struct TariffSpec {
  enum class Mode { Fixed, Ramsey };

  Mode mode = Mode::Ramsey;
  double pi_plus = 0.0;
  double pi_minus = 0.0;
  double pi_zero = 0.0;
  double spread = 0.0;  // Ramsey: pi+ = pi- + spread
  double cap = 0.5;     // Ramsey search range for pi-
};

struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  /// start, start + step, ... up to stop (inclusive within step / 1e6).
  std::vector<double> values() const;
};

/// Welfare sweep: producers are the first round(gamma N) prosumers, each with
/// generation g; the rest have none.
struct CasesSpec {
  std::vector<CaseId> ids;
  Range gamma;
  Range g;
};

struct BidCurveSpec {
  std::optional<double> g_total;  // aggregate generation estimate; population total if absent
  double price_lo = 0.0;
  double price_hi = 1.0;
  std::size_t points = 101;
};

struct ClearingSpec {
  double demand = 0.0;
};

struct SfeSpec {
  sfe::Problem problem;
  std::size_t nash_grid = 2000;
  std::size_t br_rounds = 200;
};

struct Scenario {
  std::string name;
  std::string output_dir;
  std::optional<PopulationSpec> population;
  TariffSpec tariff;
  double lmp = 0.0;
  double zeta_pct = 0.0;
  std::optional<double> network_cost;
  std::optional<CasesSpec> cases;
  std::optional<BidCurveSpec> bid_curve;
  std::optional<ClearingSpec> clearing;
  std::optional<SfeSpec> sfe;
};

/// Reads and validates a scenario document. Throws ScenarioError naming the
/// offending field and its line.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<scenario>");

/// Prosumers for a population spec (Random kind uses random_population).
std::vector<Prosumer> build_population(const PopulationSpec& spec);

/// Seeded mix of quadratic, log and isoelastic devices, one or two per
/// prosumer, with generation drawn on [0, 3] kWh.
std::vector<Prosumer> random_population(std::size_t n, std::uint64_t seed);

}  // namespace dera
