#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakscs/continuous.hpp"
#include "weakscs/kraus_path.hpp"
#include "weakscs/sequential.hpp"

namespace weakscs {

enum class ExperimentKind { kSequential, kContinuous, kSweep, kKrausPath, kValidate };
enum class SweepProtocol { kSequential, kContinuous, kBoth };

std::string to_string(ExperimentKind kind);
std::string to_string(SweepProtocol protocol);
std::string to_string(MuVarianceMode mode);

/// Everything needed to reproduce one experiment. Serialized as a flat JSON
/// object whose keys are the field names below.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kSequential;
  std::uint64_t master_seed = 1;
  int n_trajectories = 50;
  int workers = 0;  // 0: one per hardware thread
  std::filesystem::path out_dir = "out";

  // sequential / continuous
  int n_qubits = 10;
  std::optional<Vec3> initial_direction;  // Haar random per trajectory when empty
  bool polar_diagnostics = true;
  long diagnostics_stride = 10;

  // sequential
  double kappa_dt = 1e-4;
  long n_steps = 10000;

  // continuous
  double kappa = 1.0;
  std::optional<double> dt;
  double total_time = 1.0;
  double rabi_over_kappa = 20 * 3.14159265358979323846;
  double dwell = 0.02;
  long continuous_stride = 0;

  // sweep
  std::vector<int> n_qubits_grid = {2, 6, 10, 20, 30, 50};
  SweepProtocol sweep_protocol = SweepProtocol::kSequential;

  // krauspath
  double delta_t = 0.01;
  MuVarianceMode mu_mode = MuVarianceMode::kThird;
  int path_record_every = 10;

  // validate
  std::vector<int> validate_grid = {1, 2, 5, 10};
  int quadrature_theta = 0;  // 0: chosen per N
  int quadrature_phi = 0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  SequentialConfig sequential_config(int n_qubits) const;
  ContinuousConfig continuous_config(int n_qubits) const;
  PathConfig path_config() const;
};

/// Per-experiment defaults: sequential follows the single-state coherency
/// study (N = 50, 5000 steps, 50 trajectories), sweep the infidelity study
/// (400 trajectories, final snapshot only), krauspath N = 4 with 2000 paths.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses the experiment name; throws ConfigError for unknown names.
ExperimentKind parse_experiment(const std::string& name);

/// Parses a flat JSON object; unknown keys and wrongly typed values raise
/// ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a 64-bit hash (16 hex digits) of the canonical JSON of every field
/// that affects results; `workers` and `out_dir` are excluded.
std::string config_hash(const ExperimentConfig& config);

/// Mean infidelity of one protocol at one N.
struct SweepRow {
  std::string protocol;
  int n_qubits = 0;
  int trajectories = 0;
  double mean_infidelity = 0;
  double standard_error = 0;
  double bound = 0;  // 1 / (N + 2)
  int fallback_estimates = 0;
};

struct ExperimentResult {
  nlohmann::json summary;
  std::vector<SweepRow> rows;
  std::vector<std::filesystem::path> files;
};

/// Trajectory `index` of a stream tagged `tag` (protocol and N in sweeps)
/// uses derive_seed(derive_seed(master_seed, tag), index).
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index);

/// Runs the experiment and writes into config.out_dir:
///   config.json        effective configuration
///   trajectories.csv   snapshot rows (sequential, continuous, sweep)
///   paths.csv          per-path time points (krauspath)
///   validation.csv     resolution-of-identity deviations (validate)
///   summary.json       summary plus runtime metadata
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Mean infidelity and its standard error over `outcomes`.
SweepRow summarize(const std::string& protocol, int n_qubits, const std::vector<TrajectoryOutcome>& outcomes);

/// Writes `value` with 17 significant digits (empty for NaN).
std::string format_double(double value);

}  // namespace weakscs
