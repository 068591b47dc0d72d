#include "weakscs/trajectory.hpp"

#include <limits>

namespace weakscs {

Snapshot take_snapshot(const SpinSystem& sys, const KrausAccumulator& acc, long step, double t_kappa,
                       bool with_polar) {
  const Matrix effect = povm_element(acc);
  Snapshot snap;
  snap.step = step;
  snap.t_kappa = t_kappa;
  snap.coherency = coherency(sys, effect);
  if (with_polar) {
    const PolarExtract polar = extract_polar(sys, effect);
    snap.alpha = polar.alpha;
    snap.fit_residual = polar.fit_residual;
  } else {
    snap.alpha = std::numeric_limits<double>::quiet_NaN();
    snap.fit_residual = std::numeric_limits<double>::quiet_NaN();
  }
  return snap;
}

void finish_trajectory(const SpinSystem& sys, const KrausAccumulator& acc, EstimatePolicy policy,
                       Rng& rng, TrajectoryOutcome& out) {
  out.povm = povm_element(acc);
  out.log_scale = acc.log_scale();
  out.estimate = estimate_direction(sys, out.povm, policy, rng);
  out.fidelity = qubit_fidelity(out.initial_direction, out.estimate.direction);
}

}  // namespace weakscs
