#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "weakscs/trajectory.hpp"

namespace weakscs {

/// Protocol (ii): continuous measurement of Jz while a piecewise-constant
/// equatorial field of random azimuth drives the spins. Times are in the
/// same units as 1/kappa.
struct ContinuousConfig {
  int n_qubits = 1;
  double kappa = 1.0;
  /// Time step; defaults to kappa dt = 1e-3 / (8 J).
  std::optional<double> dt;
  /// Total time T; defaults to 1/kappa. Zero gives an empty record.
  std::optional<double> total_time;
  /// Rabi frequency over kappa; Omega / 2 pi = 10 kappa.
  double rabi_over_kappa = 20 * 3.14159265358979323846;
  /// Control dwell tau; defaults to 1 / (50 kappa). Snapped to whole steps.
  std::optional<double> dwell;
  std::optional<Direction> initial_direction;
  /// Steps between diagnostic snapshots; 0 picks one snapshot per dwell.
  long diagnostics_stride = 0;
  bool polar_diagnostics = true;
  bool keep_record = true;
  EstimatePolicy estimate_policy = EstimatePolicy::kRandomFallback;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Step counts after snapping the dwell to an integer number of steps.
struct ContinuousPlan {
  double dt = 0;
  long n_steps = 0;
  long steps_per_dwell = 0;
  long n_dwells = 0;       // ceil(n_steps / steps_per_dwell)
  double dwell = 0;        // snapped dwell, steps_per_dwell * dt
  double dwell_shift = 0;  // snapped minus requested dwell
  long diagnostics_stride = 0;
};

ContinuousPlan plan(const ContinuousConfig& config);

/// Omega (cos(phi) Jx + sin(phi) Jy).
Matrix control_hamiltonian(const SpinSystem& sys, double phi, double omega);

/// One azimuth per dwell, each uniform on [0, 2 pi).
std::vector<double> sample_control_schedule(Rng& rng, long n_dwells);

/// dK = 1 - i H dt - (kappa/8) Jz^2 dt + (sqrt(kappa)/2) Jz dy.
Matrix differential_kraus(const SpinSystem& sys, const Matrix& hamiltonian, double dy, double dt,
                          double kappa);

struct SseStep {
  StateVector state;  // normalized
  double dy = 0;
  Matrix kraus;  // dK for this step
};

/// One Euler-Maruyama step with a fresh Wiener increment dW ~ Normal(0, dt).
SseStep sse_step(const SpinSystem& sys, const StateVector& state, double phi, Rng& rng,
                 const ContinuousConfig& config);

/// As above with the Wiener increment supplied.
SseStep sse_step_with_noise(const SpinSystem& sys, const StateVector& state, double phi, double dw,
                            const ContinuousConfig& config);

/// As above driven by a recorded increment dy instead of noise.
SseStep sse_step_from_record(const SpinSystem& sys, const StateVector& state, double phi, double dy,
                             const ContinuousConfig& config);

/// Draw order from `rng`: initial direction (if not fixed), then for each
/// dwell its azimuth followed by one dW per step, then the fallback
/// estimate if needed. Throws UnderflowError on norm collapse.
TrajectoryOutcome run_continuous(const ContinuousConfig& config, Rng& rng);
TrajectoryOutcome run_continuous(const ContinuousConfig& config);

/// Re-runs a stored record (control azimuths and dy increments) from the
/// coherent state along `initial`. No randomness is consumed unless the
/// estimate falls back.
TrajectoryOutcome replay_continuous(const ContinuousConfig& config, const Direction& initial,
                                    const MeasurementRecord& record, Rng& rng);

}  // namespace weakscs
