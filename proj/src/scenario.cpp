#include "dera/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "dera/errors.hpp"
#include "json.hpp"

namespace dera {
namespace {

using nlohmann::json;

// Maps a field path back to a line of the source by following its keys in order.
class Locator {
 public:
  Locator(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::vector<std::string>& keys, const std::string& path, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    if (const auto line = line_of(keys)) os << ":" << *line;
    os << ": " << (path.empty() ? "<root>" : path) << ": " << msg;
    throw ScenarioError(os.str());
  }

  [[noreturn]] void fail_at(std::size_t byte, const std::string& msg) const {
    const auto end = text_.begin() + static_cast<long>(std::min(byte, text_.size()));
    const auto line = 1 + std::count(text_.begin(), end, '\n');
    throw ScenarioError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

 private:
  std::optional<long> line_of(const std::vector<std::string>& keys) const {
    std::size_t pos = 0;
    bool found = false;
    for (const auto& k : keys) {
      const auto at = text_.find("\"" + k + "\"", pos);
      if (at == std::string::npos) break;
      pos = at + 1;
      found = true;
    }
    if (!found) return std::nullopt;
    return 1 + std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n');
  }

  const std::string& text_;
  std::string origin_;
};

// Typed, schema-checked view of one JSON object.
class Obj {
 public:
  Obj(const json& j, const Locator& loc, std::vector<std::string> keys, std::string path)
      : j_(j), loc_(loc), keys_(std::move(keys)), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  double num(const std::string& k) {
    const json& v = get(k);
    if (!v.is_number()) fail(k, "expected a number");
    return v.get<double>();
  }
  double num(const std::string& k, double fallback) { return has(k) ? num(k) : fallback; }

  std::size_t count(const std::string& k) {
    const json& v = get(k);
    if (!v.is_number_unsigned()) fail(k, "expected a non-negative integer");
    return v.get<std::size_t>();
  }
  std::size_t count(const std::string& k, std::size_t fallback) { return has(k) ? count(k) : fallback; }

  std::string str(const std::string& k) {
    const json& v = get(k);
    if (!v.is_string()) fail(k, "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& k, const std::string& fallback) { return has(k) ? str(k) : fallback; }

  std::vector<double> nums(const std::string& k) {
    const json& v = get(k);
    if (!v.is_array()) fail(k, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(k, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Obj obj(const std::string& k) {
    const json& v = get(k);
    return Obj{v, loc_, with(k), join(k)};
  }

  std::vector<Obj> objs(const std::string& k) {
    const json& v = get(k);
    if (!v.is_array()) fail(k, "expected an array of objects");
    std::vector<Obj> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], loc_, with(k), join(k) + "[" + std::to_string(i) + "]");
    return out;
  }

  const json& raw(const std::string& k) { return get(k); }

  /// Rejects keys never read.
  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) loc_.fail(with(k), join(k), "unknown key");
  }

  [[noreturn]] void fail(const std::string& k, const std::string& msg) const { loc_.fail(with(k), join(k), msg); }
  [[noreturn]] void fail(const std::string& msg) const { loc_.fail(keys_, path_, msg); }

 private:
  const json& get(const std::string& k) {
    seen_.insert(k);
    if (!j_.contains(k)) fail(k, "missing required field");
    return j_.at(k);
  }
  std::vector<std::string> with(const std::string& k) const {
    auto out = keys_;
    out.push_back(k);
    return out;
  }
  std::string join(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json& j_;
  const Locator& loc_;
  std::vector<std::string> keys_;
  std::string path_;
  std::set<std::string> seen_;
};

double positive(Obj& o, const std::string& k) {
  const double v = o.num(k);
  if (!(v > 0.0)) o.fail(k, "must be > 0");
  return v;
}

double non_negative(Obj& o, const std::string& k, double fallback) {
  const double v = o.num(k, fallback);
  if (!(v >= 0.0)) o.fail(k, "must be >= 0");
  return v;
}

DeviceSpec parse_device(Obj o) {
  DeviceSpec d;
  const std::string family = o.str("family");
  d.d_lo = non_negative(o, "d_lo_kwh", 0.0);
  d.d_hi = o.num("d_hi_kwh", 10.0);
  if (family == "quadratic") {
    d.family = Quadratic{positive(o, "alpha_usd_per_kwh"), positive(o, "beta_usd_per_kwh2")};
  } else if (family == "log") {
    d.family = Log{positive(o, "a_usd"), positive(o, "scale_kwh")};
  } else if (family == "isoelastic") {
    d.family = Isoelastic{positive(o, "a_usd"), non_negative(o, "eta", 0.0)};
  } else {
    o.fail("family", "expected quadratic, log or isoelastic");
  }
  o.done();
  try {
    (void)d.make();
  } catch (const DomainError& e) {
    o.fail(e.what());
  }
  return d;
}

PopulationSpec parse_population(Obj o, std::optional<std::uint64_t> seed) {
  PopulationSpec p;
  const std::string kind = o.str("kind", "template");
  p.n = o.count("n");
  if (p.n == 0) o.fail("n", "must be >= 1");
  p.seed = seed;
  if (kind == "random") {
    p.kind = PopulationSpec::Kind::Random;
    if (!seed) o.fail("a seed is mandatory for a random population");
  } else if (kind == "template") {
    for (auto& d : o.objs("devices")) p.devices.push_back(parse_device(std::move(d)));
    if (p.devices.empty()) o.fail("devices", "at least one device is required");
    if (o.has("g_kwh")) {
      p.g = o.nums("g_kwh");
      if (p.g.size() != p.n) o.fail("g_kwh", "needs exactly n entries");
      for (double g : p.g)
        if (!(g >= 0.0)) o.fail("g_kwh", "entries must be >= 0");
    }
    if (o.has("g_uniform_kwh")) {
      const auto r = o.nums("g_uniform_kwh");
      if (r.size() != 2 || !(r[0] >= 0.0) || !(r[1] >= r[0])) o.fail("g_uniform_kwh", "expected [lo, hi] with 0 <= lo <= hi");
      if (!p.g.empty()) o.fail("g_uniform_kwh", "conflicts with g_kwh");
      if (!seed) o.fail("g_uniform_kwh", "a seed is mandatory when generation is drawn");
      p.g_uniform = std::make_pair(r[0], r[1]);
    }
  } else {
    o.fail("kind", "expected template or random");
  }
  o.done();
  return p;
}

TariffSpec parse_tariff(Obj o) {
  TariffSpec t;
  const std::string mode = o.str("mode");
  t.pi_zero = non_negative(o, "pi_zero_usd", 0.0);
  if (mode == "fixed") {
    t.mode = TariffSpec::Mode::Fixed;
    t.pi_plus = o.num("pi_plus_usd_per_kwh");
    t.pi_minus = o.num("pi_minus_usd_per_kwh");
    if (t.pi_plus < t.pi_minus) o.fail("pi_plus_usd_per_kwh", "must be >= pi_minus_usd_per_kwh");
  } else if (mode == "ramsey") {
    t.mode = TariffSpec::Mode::Ramsey;
    t.spread = non_negative(o, "spread_usd_per_kwh", 0.0);
    t.cap = o.num("cap_usd_per_kwh", 0.5);
    if (!(t.cap > 0.0)) o.fail("cap_usd_per_kwh", "must be > 0");
  } else {
    o.fail("mode", "expected fixed or ramsey");
  }
  o.done();
  return t;
}

Range parse_range(Obj o) {
  Range r{o.num("start"), o.num("stop"), o.num("step")};
  if (!(r.step > 0.0)) o.fail("step", "must be > 0");
  if (r.stop < r.start) o.fail("stop", "must be >= start");
  o.done();
  return r;
}

CasesSpec parse_cases(Obj o) {
  CasesSpec c;
  const json& ids = o.raw("ids");
  if (!ids.is_array() || ids.empty()) o.fail("ids", "expected a non-empty array of case numbers");
  for (const auto& v : ids) {
    if (!v.is_number_integer()) o.fail("ids", "case ids are integers 1..6");
    try {
      c.ids.push_back(case_from_int(v.get<int>()));
    } catch (const DomainError&) {
      o.fail("ids", "unknown case id " + std::to_string(v.get<int>()));
    }
  }
  c.gamma = parse_range(o.obj("gamma"));
  c.g = parse_range(o.obj("g_kwh"));
  if (c.gamma.start < 0.0 || c.gamma.stop > 1.0) o.fail("gamma", "must lie in [0, 1]");
  if (c.g.start < 0.0) o.fail("g_kwh", "must be >= 0");
  o.done();
  return c;
}

sfe::CostFn parse_cost(Obj o) {
  const std::string kind = o.str("kind");
  try {
    if (kind == "quadratic") {
      sfe::QuadraticCost c{o.num("linear_usd_per_kwh", 0.0), o.num("quadratic_usd_per_kwh2")};
      o.done();
      return sfe::CostFn{c};
    }
    if (kind == "exponential") {
      sfe::ExponentialCost c{o.num("scale_usd"), o.num("rate_per_kwh")};
      o.done();
      return sfe::CostFn{c};
    }
  } catch (const DomainError& e) {
    o.fail(e.what());
  }
  o.fail("kind", "expected quadratic or exponential");
}

SfeSpec parse_sfe(Obj o) {
  SfeSpec s;
  const std::string family = o.str("family");
  try {
    if (family == "affine") {
      s.problem.family = sfe::SupplyFamily::affine();
    } else if (family == "reciprocal") {
      s.problem.family = sfe::SupplyFamily::reciprocal();
    } else if (family == "power") {
      s.problem.family = sfe::SupplyFamily::power(o.num("eta"));
    } else {
      o.fail("family", "expected affine, reciprocal or power");
    }
  } catch (const DomainError& e) {
    o.fail("eta", e.what());
  }
  s.problem.demand = o.num("demand_kwh");
  for (auto p : o.objs("participants")) {
    sfe::Participant part;
    part.name = p.str("name");
    part.offset = p.num("offset_kwh", 0.0);
    part.cost = parse_cost(p.obj("cost"));
    part.p_lo = p.num("p_lo_kwh");
    part.p_hi = p.num("p_hi_kwh");
    if (part.p_hi < part.p_lo) p.fail("p_hi_kwh", "must be >= p_lo_kwh");
    p.done();
    s.problem.participants.push_back(std::move(part));
  }
  s.nash_grid = o.count("nash_grid", 2000);
  s.br_rounds = o.count("best_response_rounds", 200);
  if (s.nash_grid < 2) o.fail("nash_grid", "must be >= 2");
  o.done();
  return s;
}

std::uint64_t next_u64(std::mt19937_64& rng) { return rng(); }

// Platform-independent uniform draw on [lo, hi).
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(next_u64(rng) >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace

std::vector<double> Range::values() const {
  std::vector<double> out;
  const double tol = step * 1e-6;
  for (long i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + tol) break;
    out.push_back(std::min(v, stop));
  }
  return out;
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  const Locator loc(text, origin);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    loc.fail_at(e.byte == 0 ? 0 : e.byte - 1, std::string("malformed JSON: ") + e.what());
  }
  Obj root(doc, loc, {}, "");
  Scenario s;
  s.name = root.str("name");
  s.output_dir = root.str("output_dir", "out/" + s.name);
  std::optional<std::uint64_t> seed;
  if (root.has("seed")) seed = root.count("seed");
  if (root.has("population")) s.population = parse_population(root.obj("population"), seed);
  if (root.has("tariff")) s.tariff = parse_tariff(root.obj("tariff"));
  s.lmp = root.num("lmp_usd_per_kwh", 0.0);
  s.zeta_pct = non_negative(root, "zeta_pct", 0.0);
  if (root.has("network_cost_usd")) s.network_cost = non_negative(root, "network_cost_usd", 0.0);
  if (root.has("cases")) {
    s.cases = parse_cases(root.obj("cases"));
    if (!s.population || s.population->kind != PopulationSpec::Kind::Template)
      root.fail("cases", "a template population is required");
    if (!root.has("tariff")) root.fail("cases", "a tariff is required");
  }
  if (root.has("bid_curve")) {
    Obj b = root.obj("bid_curve");
    BidCurveSpec spec;
    if (b.has("g_total_kwh")) spec.g_total = non_negative(b, "g_total_kwh", 0.0);
    spec.price_lo = b.num("price_lo_usd_per_kwh", 0.0);
    spec.price_hi = b.num("price_hi_usd_per_kwh", 1.0);
    spec.points = b.count("points", 101);
    if (!(spec.price_hi > spec.price_lo)) b.fail("price_hi_usd_per_kwh", "must exceed price_lo_usd_per_kwh");
    if (spec.points < 2) b.fail("points", "must be >= 2");
    b.done();
    if (!s.population) root.fail("bid_curve", "a population is required");
    s.bid_curve = spec;
  }
  if (root.has("clearing")) {
    Obj c = root.obj("clearing");
    s.clearing = ClearingSpec{c.num("demand_kwh")};
    c.done();
    if (!s.population) root.fail("clearing", "a population is required");
  }
  if (root.has("sfe")) s.sfe = parse_sfe(root.obj("sfe"));
  root.done();
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

std::vector<Prosumer> random_population(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Prosumer> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int devices = 1 + static_cast<int>(next_u64(rng) % 2);
    std::vector<UtilityFn> us;
    for (int k = 0; k < devices; ++k) {
      const double d_hi = uniform(rng, 2.0, 8.0);
      switch (next_u64(rng) % 3) {
        case 0:
          us.push_back(UtilityFn::quadratic(uniform(rng, 0.05, 0.5), uniform(rng, 0.05, 0.5), 0.0, d_hi));
          break;
        case 1:
          us.push_back(UtilityFn::log(uniform(rng, 0.1, 1.0), uniform(rng, 0.5, 2.0), 0.0, d_hi));
          break;
        default: {
          const double eta = next_u64(rng) % 2 ? uniform(rng, 0.3, 0.8) : uniform(rng, 1.5, 3.0);
          const double d_lo = uniform(rng, 0.1, 0.5);
          us.push_back(UtilityFn::isoelastic(uniform(rng, 0.1, 1.0), eta, d_lo, d_lo + d_hi));
          break;
        }
      }
    }
    out.emplace_back(std::move(us), uniform(rng, 0.0, 3.0), "p" + std::to_string(i));
  }
  return out;
}

std::vector<Prosumer> build_population(const PopulationSpec& spec) {
  if (spec.kind == PopulationSpec::Kind::Random) return random_population(spec.n, spec.seed.value_or(0));
  std::vector<UtilityFn> devices;
  for (const auto& d : spec.devices) devices.push_back(d.make());
  std::mt19937_64 rng(spec.seed.value_or(0));
  std::vector<Prosumer> out;
  out.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double g = 0.0;
    if (!spec.g.empty()) g = spec.g[i];
    if (spec.g_uniform) g = uniform(rng, spec.g_uniform->first, spec.g_uniform->second);
    out.emplace_back(devices, g, "p" + std::to_string(i));
  }
  return out;
}

}  // namespace dera
