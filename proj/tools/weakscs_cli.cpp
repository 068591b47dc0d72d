// Command-line front end: one subcommand per experiment kind.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakscs/errors.hpp"
#include "weakscs/runner.hpp"

namespace {

int fail(const std::string& kind, const std::string& field, const std::string& message, int code) {
  nlohmann::json line = {{"error", kind}, {"message", message}};
  if (!field.empty()) line["field"] = field;
  std::cerr << line.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak collective-spin measurement simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_qubits, trajectories, workers;
  std::optional<long> steps, stride;
  std::optional<double> kappa_dt, total_time;
  std::optional<std::string> out_dir, grid, mode, protocol;
  bool no_polar = false;

  for (const char* name : {"sequential", "continuous", "sweep", "krauspath", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--n", n_qubits, "Number of qubits");
    sub->add_option("--trajectories", trajectories, "Trajectories (paths for krauspath)");
    sub->add_option("--steps", steps, "Sequential measurement count L");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--workers", workers, "Worker threads (0: all cores)");
    sub->add_option("--stride", stride, "Steps between diagnostic snapshots");
    sub->add_option("--kappa-dt", kappa_dt, "Sequential measurement strength kappa*dt");
    sub->add_option("--time", total_time, "Total time T (continuous, krauspath)");
    sub->add_option("--grid", grid, "Comma-separated N values (sweep, validate)");
    sub->add_option("--mode", mode, "mu variance mode for krauspath: third or unit");
    sub->add_option("--protocol", protocol, "Sweep protocol: sequential, continuous or both");
    sub->add_flag("--no-polar", no_polar, "Skip the alpha fit at snapshots");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", "", e.what(), 2);
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    const weakscs::ExperimentKind kind = weakscs::parse_experiment(name);
    weakscs::ExperimentConfig config = weakscs::default_config(kind);
    if (!config_path.empty()) config = weakscs::load_config(config_path, config);
    config.experiment = kind;

    nlohmann::json overrides = nlohmann::json::object();
    if (seed) overrides["master_seed"] = *seed;
    if (n_qubits) overrides["n_qubits"] = *n_qubits;
    if (trajectories) overrides["n_trajectories"] = *trajectories;
    if (steps) {
      overrides["n_steps"] = *steps;
      if (kind == weakscs::ExperimentKind::kSweep && !stride) overrides["diagnostics_stride"] = *steps;
    }
    if (out_dir) overrides["out_dir"] = *out_dir;
    if (workers) overrides["workers"] = *workers;
    if (stride) {
      overrides["diagnostics_stride"] = *stride;
      overrides["continuous_stride"] = *stride;
    }
    if (kappa_dt) overrides["kappa_dt"] = *kappa_dt;
    if (total_time) overrides["total_time"] = *total_time;
    if (mode) overrides["mu_mode"] = *mode;
    if (protocol) overrides["sweep_protocol"] = *protocol;
    if (no_polar) overrides["polar_diagnostics"] = false;
    if (grid) {
      std::vector<int> values;
      for (const std::string& item : CLI::detail::split(*grid, ',')) {
        try {
          values.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw weakscs::ConfigError("grid", "not an integer: '" + item + "'");
        }
      }
      overrides[kind == weakscs::ExperimentKind::kValidate ? "validate_grid" : "n_qubits_grid"] = values;
    }
    config = weakscs::config_from_json(overrides, config);

    const weakscs::ExperimentResult result = weakscs::run_experiment(config);
    std::cout << result.summary.dump(2) << "\n";
    return 0;
  } catch (const weakscs::ConfigError& e) {
    return fail("config", e.field(), e.what(), 2);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", "", e.what(), 3);
  } catch (const weakscs::IoError& e) {
    return fail("io", "", e.what(), 3);
  } catch (const weakscs::Error& e) {
    return fail("simulation", "", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", "", e.what(), 1);
  }
}
