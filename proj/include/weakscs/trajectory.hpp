#pragma once

#include <optional>
#include <vector>

#include "weakscs/analysis.hpp"
#include "weakscs/spin_algebra.hpp"

namespace weakscs {

/// One weak measurement of the sequential protocol.
struct Measurement {
  Direction direction;
  double outcome;
};

/// Outcomes of one trajectory. Sequential runs fill `measurements`;
/// continuous runs fill `control_angles` (one per dwell) and `increments`
/// (the record dy, one per time step).
struct MeasurementRecord {
  std::vector<Measurement> measurements;
  std::vector<double> control_angles;
  std::vector<double> increments;
};

/// Diagnostics of the accumulated POVM element at one instant.
struct Snapshot {
  long step = 0;
  double t_kappa = 0;  // elapsed time in units of 1/kappa
  double coherency = 0;
  double alpha = 0;  // NaN when polar diagnostics are disabled
  double fit_residual = 0;
};

struct TrajectoryOutcome {
  Direction initial_direction = Direction::z();
  MeasurementRecord record;
  Matrix povm;  // E_r with unit trace
  Estimate estimate;
  double fidelity = 0;
  std::vector<Snapshot> diagnostics;
  double log_scale = 0;  // ln of the scalar dropped from the Kraus product
  StateVector final_state;
  long steps = 0;
};

/// Diagnostics of the POVM element held by `acc`.
Snapshot take_snapshot(const SpinSystem& sys, const KrausAccumulator& acc, long step, double t_kappa,
                       bool with_polar);

/// Estimate, fidelity and final element for a finished Kraus product.
void finish_trajectory(const SpinSystem& sys, const KrausAccumulator& acc, EstimatePolicy policy,
                       Rng& rng, TrajectoryOutcome& out);

}  // namespace weakscs
