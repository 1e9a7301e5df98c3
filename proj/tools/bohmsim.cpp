// bohmsim: run Bohmian-mechanics scenarios and their statistical checks.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bohm/runner.hpp"

namespace {

using bohm::cli::kExitConfigError;

int run_command(const std::optional<std::string>& config_path, const std::optional<std::string>& scenario,
                const std::vector<std::string>& params, const std::optional<double>& dt,
                const std::optional<std::size_t>& nsteps, const std::optional<std::size_t>& stride,
                const std::optional<std::size_t>& substeps, const std::optional<std::size_t>& n,
                const std::optional<std::uint64_t>& seed, const std::vector<std::string>& checks,
                const std::optional<std::size_t>& cap, const std::optional<std::string>& output_dir) {
  bohm::cli::RunConfig cfg;
  try {
    if (config_path) cfg = bohm::cli::load_config(*config_path);
    // Flags override the file.
    if (scenario) cfg.scenario = *scenario;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw bohm::ConfigError("--param expects key=value, got '" + kv + "'");
      cfg.params[kv.substr(0, eq)] = bohm::cli::parse_override_value(kv.substr(eq + 1));
    }
    if (dt) cfg.dt = *dt;
    if (nsteps) cfg.nsteps = *nsteps;
    if (stride) cfg.stride = *stride;
    if (substeps) cfg.substeps = *substeps;
    if (n) cfg.n = *n;
    if (seed) cfg.seed = *seed;
    if (!checks.empty()) cfg.checks = checks;
    if (cap) cfg.trajectory_cap = *cap;
    if (output_dir) cfg.output_dir = *output_dir;
    if (cfg.output_dir.empty()) cfg.output_dir = "bohm_out";
  } catch (const bohm::ConfigError& e) {
    std::cerr << "bohmsim: " << e.what() << '\n';
    return kExitConfigError;
  }
  return bohm::cli::run(cfg, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohmian-mechanics simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario and the requested checks");
  std::optional<std::string> config_path;
  std::optional<std::string> scenario;
  std::vector<std::string> params;
  std::optional<double> dt;
  std::optional<std::size_t> nsteps;
  std::optional<std::size_t> stride;
  std::optional<std::size_t> substeps;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> checks;
  std::optional<std::size_t> cap;
  std::optional<std::string> output_dir;
  run->add_option("-c,--config", config_path, "JSON run configuration (a report.json works too)");
  run->add_option("-s,--scenario", scenario, "Scenario name (see `bohmsim list`)");
  run->add_option("-p,--param", params, "Scenario parameter override key=value")->take_all();
  run->add_option("--dt", dt, "Time step");
  run->add_option("--nsteps", nsteps, "Number of time steps");
  run->add_option("--stride", stride, "Store every stride-th step");
  run->add_option("--substeps", substeps, "RK4 steps per stored frame interval");
  run->add_option("-n,--samples", n, "Ensemble size");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--check", checks, "Check to run (repeatable)")->take_all();
  run->add_option("--trajectory-cap", cap, "Trajectories written to trajectories.csv");
  run->add_option("-o,--output-dir", output_dir, "Output directory (default bohm_out)");

  app.add_subcommand("list", "List scenarios with their defaults");
  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (app.got_subcommand("list")) {
    bohm::cli::list_scenarios(std::cout);
    return 0;
  }
  if (app.got_subcommand("version")) {
    std::cout << "bohmsim " << bohm::cli::kVersion << '\n';
    return 0;
  }
  return run_command(config_path, scenario, params, dt, nsteps, stride, substeps, n, seed, checks, cap, output_dir);
}
