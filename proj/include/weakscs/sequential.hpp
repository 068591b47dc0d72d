#pragma once

#include <cstdint>
#include <optional>

#include "weakscs/trajectory.hpp"
#include "weakscs/weak_measurement.hpp"

namespace weakscs {

/// Uniform direction on the sphere: cos(theta) uniform on [-1, 1], azimuth
/// uniform on [0, 2 pi).
Direction haar_direction(Rng& rng);

/// Protocol (i): L weak measurements along Haar-random directions.
struct SequentialConfig {
  int n_qubits = 1;
  double kappa_dt = 1e-4;
  long n_steps = 10000;
  /// Initial coherent-state direction; drawn Haar-randomly when empty.
  std::optional<Direction> initial_direction;
  /// Steps between diagnostic snapshots. Step 0 and the final step are
  /// always recorded.
  int diagnostics_stride = 10;
  /// Fit alpha at every snapshot (one eigendecomposition each).
  bool polar_diagnostics = true;
  bool keep_record = true;
  EstimatePolicy estimate_policy = EstimatePolicy::kRandomFallback;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Runs one trajectory. Draw order from `rng`: initial direction (if not
/// fixed), then per step the direction followed by the outcome, then the
/// fallback estimate if one is needed.
TrajectoryOutcome run_sequential(const SequentialConfig& config, Rng& rng);

/// Same as above with an engine seeded from `config.seed`.
TrajectoryOutcome run_sequential(const SequentialConfig& config);

/// Validation mode: every measurement is along the fixed direction `u`.
TrajectoryOutcome run_fixed_direction(const SequentialConfig& config, const Direction& u, Rng& rng);

}  // namespace weakscs
