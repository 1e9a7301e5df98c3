#pragma once

// Batch runner behind the bohmsim command line: run configuration, scenario
// dispatch, checks, and the CSV / JSON writers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bohm/ensemble.hpp"
#include "bohm/scenarios.hpp"
#include "bohm/subsystem.hpp"

namespace bohm::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::size_t kTrajectoryCap = 200;
inline constexpr double kContinuityThreshold = 1e-3;
inline constexpr std::size_t kMinFringes = 5;
inline constexpr double kFringeFloor = 1e-3;
inline constexpr double kCollapseRunFraction = 0.99;
inline constexpr std::size_t kHistogramBins = 50;
inline constexpr std::size_t kDensitySnapshots = 5;

enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 1, kExitConfigError = 2 };

/// What to run. Unset optionals fall back to the scenario defaults.
struct RunConfig {
  std::string scenario;
  Json params = Json::object();  ///< overrides of scenario parameters
  std::optional<double> dt;
  std::optional<std::size_t> nsteps;
  std::optional<std::size_t> stride;
  std::size_t substeps = 1;
  std::optional<std::size_t> n;
  std::uint64_t seed = 1;
  std::vector<std::string> checks;
  std::size_t trajectory_cap = kTrajectoryCap;
  std::string output_dir;
};

struct ScenarioInfo {
  std::string name;
  Json defaults;
  RunDefaults run;
  std::vector<std::string> checks;
};

/// Known scenarios in listing order.
inline const std::vector<ScenarioInfo>& catalog() {
  static const std::vector<ScenarioInfo> table = [] {
    std::vector<ScenarioInfo> out;
    out.push_back({"free_gaussian",
                   Json{{"x0", 0.0}, {"sigma0", 1.0}, {"k0", 0.0}, {"length", 40.0}, {"points", std::size_t{512}}},
                   free_gaussian().run_defaults,
                   {"equivariance", "continuity"}});
    out.push_back({"harmonic",
                   Json{{"omega", 1.0}, {"displacement", 0.0}, {"length", 20.0}, {"points", std::size_t{256}}},
                   harmonic().run_defaults,
                   {"equivariance", "continuity"}});
    out.push_back({"two_slit",
                   Json{{"separation", 2.0},
                        {"slit_width", 0.25},
                        {"length", 64.0},
                        {"points", std::size_t{2048}},
                        {"initial", "born"}},
                   two_slit().run_defaults,
                   {"equivariance", "continuity", "no_crossing", "fringes"}});
    const MeasurementParams m;
    // The measurement lasts nsteps * dt.
    out.push_back({"measurement",
                   Json{{"mode_separation", m.mode_separation},
                        {"mode_width", m.mode_width},
                        {"p1", m.p1},
                        {"pointer_width", m.pointer_width},
                        {"coupling", m.coupling},
                        {"length_x", m.length_x},
                        {"points_x", m.points_x},
                        {"length_y", m.length_y},
                        {"points_y", m.points_y}},
                   {0.02, 50, 1, 10000},
                   {"equivariance", "born", "collapse", "fcp"}});
    return out;
  }();
  return table;
}

inline const ScenarioInfo* find_scenario(const std::string& name) {
  for (const auto& s : catalog()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

/// One line per scenario: name, parameter defaults, run defaults, checks.
inline void list_scenarios(std::ostream& out) {
  for (const auto& s : catalog()) {
    out << s.name;
    for (const auto& [key, value] : s.defaults.items()) out << ' ' << key << '=' << value.dump();
    out << " dt=" << Json(s.run.dt).dump() << " nsteps=" << s.run.nsteps << " stride=" << s.run.stride
        << " n=" << s.run.n_samples << " checks=";
    for (std::size_t i = 0; i < s.checks.size(); ++i) out << (i ? "," : "") << s.checks[i];
    out << '\n';
  }
}

namespace detail {

template <class T>
T get_as(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("'" + key + "' has the wrong type");
  }
}

inline std::size_t get_count(const Json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline double get_number(const Json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("'" + key + "' must be finite");
  return v;
}

}  // namespace detail

/// Reads a run configuration from JSON. A report.json is accepted too: its
/// "config" echo is used.
inline RunConfig config_from_json(const Json& input) {
  if (!input.is_object()) throw ConfigError("configuration must be a JSON object");
  const Json& j = input.contains("config") && input.at("config").is_object() ? input.at("config") : input;
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "scenario") {
      if (value.is_string()) {
        cfg.scenario = value.get<std::string>();
      } else if (value.is_object()) {
        for (const auto& [k, v] : value.items()) {
          if (k == "name") {
            cfg.scenario = detail::get_as<std::string>(v, "scenario.name");
          } else if (k == "params") {
            if (!v.is_object()) throw ConfigError("'scenario.params' must be an object");
            cfg.params = v;
          } else {
            throw ConfigError("unknown key 'scenario." + k + "'");
          }
        }
      } else {
        throw ConfigError("'scenario' must be a name or an object");
      }
    } else if (key == "dt") {
      cfg.dt = detail::get_number(value, key);
    } else if (key == "nsteps") {
      cfg.nsteps = detail::get_count(value, key);
    } else if (key == "stride") {
      cfg.stride = detail::get_count(value, key);
    } else if (key == "substeps") {
      cfg.substeps = detail::get_count(value, key);
    } else if (key == "ensemble") {
      if (!value.is_object()) throw ConfigError("'ensemble' must be an object");
      for (const auto& [k, v] : value.items()) {
        if (k == "n") {
          cfg.n = detail::get_count(v, "ensemble.n");
        } else if (k == "seed") {
          cfg.seed = detail::get_count(v, "ensemble.seed");
        } else {
          throw ConfigError("unknown key 'ensemble." + k + "'");
        }
      }
    } else if (key == "checks") {
      if (!value.is_array()) throw ConfigError("'checks' must be a list");
      for (const auto& c : value) cfg.checks.push_back(detail::get_as<std::string>(c, "checks"));
    } else if (key == "trajectory_cap") {
      cfg.trajectory_cap = detail::get_count(value, key);
    } else if (key == "output_dir") {
      cfg.output_dir = detail::get_as<std::string>(value, key);
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  try {
    return config_from_json(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Parses the value of a key=value override: JSON literal if it parses, else a string.
inline Json parse_override_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return Json(text);
  }
}

/// A validated run: every default resolved and the scenario constructed.
struct Plan {
  RunConfig config;
  const ScenarioInfo* info = nullptr;
  Json params;
  double dt = 0.0;
  std::size_t nsteps = 0;
  std::size_t stride = 1;
  std::size_t n = 0;
  std::optional<Scenario> scenario;
  std::optional<MeasurementSetup> setup;

  bool wants(const std::string& check) const {
    return std::find(config.checks.begin(), config.checks.end(), check) != config.checks.end();
  }

  /// Parameter echo; feeding it back as a config reproduces the run.
  Json echo() const {
    return Json{{"scenario", {{"name", info->name}, {"params", params}}},
                {"dt", dt},
                {"nsteps", nsteps},
                {"stride", stride},
                {"substeps", config.substeps},
                {"ensemble", {{"n", n}, {"seed", config.seed}}},
                {"checks", config.checks},
                {"trajectory_cap", config.trajectory_cap}};
  }
};

/// Checks every name and precondition without running anything expensive.
/// Throws ConfigError.
inline Plan plan_run(const RunConfig& cfg) {
  Plan plan;
  plan.config = cfg;
  if (cfg.scenario.empty()) throw ConfigError("no scenario given");
  plan.info = find_scenario(cfg.scenario);
  if (plan.info == nullptr) throw ConfigError("unknown scenario '" + cfg.scenario + "'");
  const ScenarioInfo& info = *plan.info;

  plan.params = info.defaults;
  if (!cfg.params.is_object()) throw ConfigError("scenario parameters must be an object");
  for (const auto& [key, value] : cfg.params.items()) {
    if (!info.defaults.contains(key)) throw ConfigError("unknown parameter '" + key + "' for " + info.name);
    const Json& def = info.defaults.at(key);
    if (def.is_string()) {
      plan.params[key] = detail::get_as<std::string>(value, key);
    } else if (def.is_number_unsigned()) {
      plan.params[key] = detail::get_count(value, key);
    } else {
      plan.params[key] = detail::get_number(value, key);
    }
  }

  plan.dt = cfg.dt.value_or(info.run.dt);
  plan.nsteps = cfg.nsteps.value_or(info.run.nsteps);
  plan.stride = cfg.stride.value_or(info.run.stride);
  plan.n = cfg.n.value_or(info.run.n_samples);
  if (!(plan.dt > 0.0) || !std::isfinite(plan.dt)) throw ConfigError("dt must be positive");
  if (plan.nsteps < 1) throw ConfigError("nsteps must be >= 1");
  if (plan.stride < 1 || plan.nsteps % plan.stride != 0) throw ConfigError("stride must be >= 1 and divide nsteps");
  if (cfg.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (plan.n < 1) throw ConfigError("ensemble size must be >= 1");
  if (cfg.output_dir.empty()) throw ConfigError("no output directory given");
  if (std::filesystem::exists(cfg.output_dir) && !std::filesystem::is_directory(cfg.output_dir)) {
    throw ConfigError("output path '" + cfg.output_dir + "' exists and is not a directory");
  }

  std::set<std::string> seen;
  for (const auto& c : cfg.checks) {
    if (std::find(info.checks.begin(), info.checks.end(), c) == info.checks.end()) {
      throw ConfigError("check '" + c + "' is not available for " + info.name);
    }
    if (!seen.insert(c).second) throw ConfigError("check '" + c + "' listed twice");
  }
  if (info.name == "two_slit") {
    const auto initial = plan.params.at("initial").get<std::string>();
    if (initial != "born" && initial != "uniform") throw ConfigError("two_slit initial must be 'born' or 'uniform'");
    if (initial == "uniform" && plan.wants("equivariance")) {
      throw ConfigError("equivariance needs initial = born");
    }
  }
  worker_count();

  const Json& p = plan.params;
  auto num = [&](const char* key) { return p.at(key).get<double>(); };
  auto cnt = [&](const char* key) { return p.at(key).get<std::size_t>(); };
  try {
    if (info.name == "free_gaussian") {
      plan.scenario = free_gaussian(num("x0"), num("sigma0"), num("k0"), num("length"), cnt("points"));
    } else if (info.name == "harmonic") {
      plan.scenario = harmonic(num("omega"), num("displacement"), num("length"), cnt("points"));
    } else if (info.name == "two_slit") {
      plan.scenario = two_slit(num("separation"), num("slit_width"), num("length"), cnt("points"));
    } else {
      MeasurementParams m;
      m.mode_separation = num("mode_separation");
      m.mode_width = num("mode_width");
      m.p1 = num("p1");
      m.pointer_width = num("pointer_width");
      m.coupling = num("coupling");
      m.duration = plan.dt * static_cast<double>(plan.nsteps);
      m.length_x = num("length_x");
      m.points_x = cnt("points_x");
      m.length_y = num("length_y");
      m.points_y = cnt("points_y");
      plan.setup = measurement_setup(m);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(info.name + ": " + e.what());
  }
  return plan;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

inline void write_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& trajs, int dim,
                               std::size_t every) {
  auto out = open_output(path);
  out << (dim == 1 ? "sample_id,t,x\n" : "sample_id,t,x,y\n");
  for (const auto& tr : trajs) {
    for (std::size_t k = 0; k < tr.size(); k += every) {
      out << tr.id << ',' << fmt17(tr.times[k]) << ',' << fmt17(tr.points[k][0]);
      if (dim == 2) out << ',' << fmt17(tr.points[k][1]);
      out << '\n';
    }
  }
}

inline void write_density(const std::filesystem::path& path, const WaveFunction& psi) {
  auto out = open_output(path);
  const Grid& g = psi.grid();
  const auto rho = density(psi);
  if (g.dim() == 1) {
    out << "x,rho\n";
    for (std::size_t i = 0; i < g.size(); ++i) out << fmt17(g.coordinate(0, i)) << ',' << fmt17(rho.values[i]) << '\n';
    return;
  }
  out << "x,y,rho\n";
  const std::size_t ny = g.points(1);
  for (std::size_t i = 0; i < g.points(0); ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      out << fmt17(g.coordinate(0, i)) << ',' << fmt17(g.coordinate(1, j)) << ',' << fmt17(rho.values[i * ny + j])
          << '\n';
    }
  }
}

// Normalized histogram (integrates to 1) over the sample range.
inline Json histogram(const std::vector<Configuration>& qs, int axis, double t) {
  std::vector<double> xs(qs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = qs[i][axis];
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  double a = *lo;
  double b = *hi;
  if (!(b > a)) {
    a -= 0.5;
    b += 0.5;
  }
  const double width = (b - a) / static_cast<double>(kHistogramBins);
  std::vector<double> edges(kHistogramBins + 1);
  for (std::size_t k = 0; k <= kHistogramBins; ++k) edges[k] = a + static_cast<double>(k) * width;
  std::vector<double> counts(kHistogramBins, 0.0);
  for (double x : xs) {
    auto k = static_cast<std::size_t>((x - a) / width);
    counts[std::min(k, kHistogramBins - 1)] += 1.0;
  }
  for (auto& c : counts) c /= static_cast<double>(xs.size()) * width;
  return Json{{"t", t}, {"axis", axis == 0 ? "x" : "y"}, {"edges", edges}, {"density", counts}};
}

inline Json stat_json(const StatReport& r) {
  Json j{{"kind", r.kind}, {"statistic", r.statistic()}, {"n", r.n}};
  if (r.kind == "chi2") j["bins"] = r.bins;
  j["critical"] = r.critical;
  j["margin"] = r.margin;
  j["threshold"] = r.threshold;
  j["pass"] = r.pass;
  return j;
}

// A sign change of x between recorded points that is not a periodic wrap.
inline bool crosses_axis(const Trajectory& tr, double length) {
  for (std::size_t k = 1; k < tr.size(); ++k) {
    const double a = tr.points[k - 1][0];
    const double b = tr.points[k][0];
    if (((a < 0.0) != (b < 0.0)) && std::abs(b - a) < 0.5 * length) return true;
  }
  return false;
}

struct Outputs {
  Json checks = Json::object();
  Json densities = Json::array();
  Json histograms = Json::array();
  Json summary = Json::object();
  std::size_t trajectory_count = 0;
};

inline void run_line(const Plan& plan, const std::filesystem::path& dir, Outputs& out) {
  const Scenario& s = *plan.scenario;
  const std::uint64_t seed = plan.config.seed;
  const Propagator prop(s.potential, s.params, plan.dt);
  const auto frames = evolve(s.psi0, prop, plan.nsteps, plan.stride);
  const FrameField field(frames, s.params);
  const bool uniform = s.name == "two_slit" && plan.params.at("initial").get<std::string>() == "uniform";
  const auto starts =
      uniform ? sample_uniform_intervals(s.uniform_intervals, plan.n, seed) : sample(s.psi0, plan.n, seed).samples;

  const std::size_t kept = std::min(plan.config.trajectory_cap, plan.n);
  std::vector<Trajectory> trajs(kept);
  std::vector<Configuration> finals(plan.n);
  std::vector<char> crossed(plan.n, 0);
  parallel_for(plan.n, [&](std::size_t i) {
    Trajectory tr = integrate(field, starts[i], plan.config.substeps, i);
    finals[i] = tr.final_point();
    crossed[i] = crosses_axis(tr, s.grid.extent(0)) ? 1 : 0;
    if (i < kept) trajs[i] = std::move(tr);
  });
  write_trajectories(dir / "trajectories.csv", trajs, 1, 1);
  out.trajectory_count = kept;

  std::vector<std::size_t> picks;
  for (std::size_t k = 0; k < kDensitySnapshots; ++k) {
    picks.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(k * (frames.size() - 1)) /
                                                          static_cast<double>(kDensitySnapshots - 1))));
  }
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  for (std::size_t idx : picks) {
    const double t = frames[idx].time();
    const std::string name = "density_" + time_label(t) + ".csv";
    write_density(dir / name, frames[idx]);
    out.densities.push_back({{"t", t}, {"file", name}});
  }
  out.histograms.push_back(histogram(starts, 0, frames.front().time()));
  out.histograms.push_back(histogram(finals, 0, frames.back().time()));

  for (const auto& check : plan.config.checks) {
    if (check == "equivariance") {
      Json j = stat_json(compare_with_density(finals, frames.back()));
      j["t"] = frames.back().time();
      j["seed"] = seed;
      out.checks[check] = j;
    } else if (check == "continuity") {
      // Centered differences over single solver steps from each stored frame;
      // differencing across a stride would measure the check's own error.
      std::vector<double> r(frames.size() - 1);
      parallel_for(r.size(), [&](std::size_t k) {
        const WaveFunction b = step(frames[k], prop);
        r[k] = continuity_residual(frames[k], b, step(b, prop), plan.dt, s.params);
      });
      double mean = 0.0;
      for (double v : r) mean += v;
      mean /= static_cast<double>(r.size());
      const double worst = *std::max_element(r.begin(), r.end());
      out.checks[check] = {{"max_residual", worst},
                           {"mean_residual", mean},
                           {"frames", r.size()},
                           {"dt", plan.dt},
                           {"threshold", kContinuityThreshold},
                           {"pass", worst <= kContinuityThreshold}};
    } else if (check == "no_crossing") {
      const auto count = static_cast<std::size_t>(std::count(crossed.begin(), crossed.end(), 1));
      out.checks[check] = {{"crossings", count}, {"trajectories", plan.n}, {"pass", count == 0}};
    } else if (check == "fringes") {
      const auto maxima = count_maxima(density(frames.back()), kFringeFloor);
      out.checks[check] = {{"maxima", maxima},
                           {"floor_fraction", kFringeFloor},
                           {"required", kMinFringes},
                           {"t", frames.back().time()},
                           {"pass", maxima >= kMinFringes}};
    }
  }
}

inline void run_measurement_scenario(const Plan& plan, const std::filesystem::path& dir, Outputs& out) {
  const MeasurementSetup& setup = *plan.setup;
  const std::uint64_t seed = plan.config.seed;
  const auto result = run_measurement(setup, plan.n, seed, plan.nsteps);

  const std::size_t kept = std::min(plan.config.trajectory_cap, plan.n);
  std::vector<Trajectory> trajs;
  trajs.reserve(kept);
  for (std::size_t i = 0; i < kept; ++i) trajs.push_back(result.runs[i].trajectory);
  write_trajectories(dir / "trajectories.csv", trajs, 2, plan.stride);
  out.trajectory_count = kept;

  const double duration = setup.duration;
  for (double t : {0.0, 0.5 * duration, duration}) {
    const std::string name = "density_" + time_label(t) + ".csv";
    write_density(dir / name, measurement_state(setup, t));
    out.densities.push_back({{"t", t}, {"file", name}});
  }
  std::vector<Configuration> starts(plan.n);
  std::vector<Configuration> finals(plan.n);
  for (std::size_t i = 0; i < plan.n; ++i) {
    starts[i] = result.runs[i].trajectory.points.front();
    finals[i] = result.runs[i].trajectory.final_point();
  }
  for (int axis : {0, 1}) {
    out.histograms.push_back(histogram(starts, axis, 0.0));
    out.histograms.push_back(histogram(finals, axis, duration));
  }
  out.summary = {{"duration", duration},
                 {"counts", result.counts},
                 {"unclassified", result.unclassified},
                 {"unclassified_fraction", result.unclassified_fraction()}};

  for (const auto& check : plan.config.checks) {
    if (check == "equivariance") {
      const double t = 0.5 * duration;
      Json j = stat_json(measurement_equivariance(setup, t, plan.n, seed, std::max<std::size_t>(1, plan.nsteps / 2)));
      j["t"] = t;
      j["seed"] = seed;
      out.checks[check] = j;
    } else if (check == "born") {
      Json modes = Json::array();
      bool pass = result.classified() > 0;
      for (const auto& e : born_check(result, setup)) {
        modes.push_back({{"count", e.count},
                         {"frequency", e.frequency},
                         {"expected", e.expected},
                         {"tolerance", e.tolerance},
                         {"pass", e.pass}});
        pass = pass && e.pass;
      }
      out.checks[check] = {{"modes", modes},
                           {"classified", result.classified()},
                           {"unclassified", result.unclassified},
                           {"pass", pass}};
    } else if (check == "collapse") {
      const auto fidelities = collapse_fidelity(result, setup);
      std::size_t good = 0;
      double worst = 1.0;
      for (const auto& f : fidelities) {
        if (!f) continue;
        worst = std::min(worst, *f);
        if (*f >= kFidelityThreshold) ++good;
      }
      const double fraction = static_cast<double>(good) / static_cast<double>(plan.n);
      const double unclassified = result.unclassified_fraction();
      out.checks[check] = {{"fidelity_threshold", kFidelityThreshold},
                           {"fraction_above", fraction},
                           {"required_fraction", kCollapseRunFraction},
                           {"min_fidelity", worst},
                           {"unclassified_fraction", unclassified},
                           {"max_unclassified_fraction", kMaxUnclassifiedFraction},
                           {"pass", fraction >= kCollapseRunFraction && unclassified < kMaxUnclassifiedFraction}};
    } else if (check == "fcp") {
      Json modes = Json::array();
      bool pass = false;
      bool all = true;
      for (std::size_t a = 0; a < setup.mode_count(); ++a) {
        if (result.counts[a] == 0) {
          modes.push_back({{"mode", a}, {"skipped", "no runs"}});
          continue;
        }
        try {
          const auto whole = fcp_check(result, setup, a);
          const auto [below, above] = fcp_split_check(result, setup, a);
          const bool ok = whole.pass && below.pass && above.pass;
          modes.push_back({{"mode", a},
                           {"class", stat_json(whole)},
                           {"split_below", stat_json(below)},
                           {"split_above", stat_json(above)},
                           {"pass", ok}});
          all = all && ok;
          pass = true;
        } catch (const InsufficientSamples& e) {
          modes.push_back({{"mode", a}, {"error", e.what()}, {"pass", false}});
          all = false;
        }
      }
      out.checks[check] = {{"modes", modes}, {"pass", pass && all}};
    }
  }
}

}  // namespace detail

/// Runs a validated plan, writing every output into the plan's output
/// directory. Returns the exit code.
inline int execute(const Plan& plan) {
  const std::filesystem::path dir(plan.config.output_dir);
  std::filesystem::create_directories(dir);
  detail::Outputs out;
  if (plan.setup) {
    detail::run_measurement_scenario(plan, dir, out);
  } else {
    detail::run_line(plan, dir, out);
  }
  bool pass = true;
  for (const auto& [name, check] : out.checks.items()) pass = pass && check.at("pass").get<bool>();

  Json report{{"program", "bohmsim"},
              {"version", kVersion},
              {"config", plan.echo()},
              {"seed", plan.config.seed},
              {"outputs",
               {{"trajectories", "trajectories.csv"},
                {"trajectory_count", out.trajectory_count},
                {"densities", out.densities}}},
              {"histograms", out.histograms}};
  if (!out.summary.empty()) report["measurement"] = out.summary;
  report["checks"] = out.checks;
  report["pass"] = pass;
  auto file = detail::open_output(dir / "report.json");
  file << report.dump(2) << '\n';
  return pass ? kExitPass : kExitCheckFailure;
}

/// Validate, then run. Config errors go to `err` and leave no files behind.
inline int run(const RunConfig& cfg, std::ostream& err) {
  Plan plan;
  try {
    plan = plan_run(cfg);
  } catch (const ConfigError& e) {
    err << "bohmsim: " << e.what() << '\n';
    return kExitConfigError;
  }
  try {
    return execute(plan);
  } catch (const ConfigError& e) {
    err << "bohmsim: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "bohmsim: run failed: " << e.what() << '\n';
    return kExitCheckFailure;
  }
}

}  // namespace bohm::cli
