#include "weakscs/sequential.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "weakscs/errors.hpp"

namespace weakscs {

Direction haar_direction(Rng& rng) {
  std::uniform_real_distribution<double> cos_theta(-1.0, 1.0);
  std::uniform_real_distribution<double> azimuth(0.0, 2 * std::numbers::pi);
  const double c = cos_theta(rng);
  const double phi = azimuth(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return Direction::normalized(Vec3(s * std::cos(phi), s * std::sin(phi), c));
}

void SequentialConfig::validate() const {
  if (n_qubits < 1) throw ConfigError("n_qubits", "must be at least 1");
  if (!std::isfinite(kappa_dt) || kappa_dt <= 0) throw ConfigError("kappa_dt", "must be positive");
  if (n_steps < 1) throw ConfigError("n_steps", "must be at least 1");
  if (diagnostics_stride < 1) throw ConfigError("diagnostics_stride", "must be at least 1");
}

namespace {

struct MeasuredAxis {
  Direction direction = Direction::z();
  ComponentBasis basis;
};

// Shared loop of the random and fixed-direction modes. `next_axis` yields
// the component measured at each step.
TrajectoryOutcome run_loop(const SpinSystem& sys, const SequentialConfig& config, Rng& rng,
                           const std::function<const MeasuredAxis&(Rng&)>& next_axis) {
  const WeakMeasSettings settings(config.kappa_dt);

  TrajectoryOutcome out;
  out.initial_direction = config.initial_direction ? *config.initial_direction : haar_direction(rng);
  StateVector state = sys.coherent_state(out.initial_direction);
  KrausAccumulator acc(sys.dim());
  if (config.keep_record) out.record.measurements.reserve(config.n_steps);

  out.diagnostics.push_back(take_snapshot(sys, acc, 0, 0.0, config.polar_diagnostics));
  for (long step = 1; step <= config.n_steps; ++step) {
    const MeasuredAxis& axis = next_axis(rng);
    const double m = sample_outcome(outcome_mixture(axis.basis, state, settings), rng);
    state = apply_measurement(axis.basis, state, m, settings).state;
    const KrausSpectrum spec = kraus_spectrum(axis.basis.eigenvalues, m, settings);
    acc.accumulate_diagonal(axis.basis, spec.factors, spec.log_scale);
    if (config.keep_record) out.record.measurements.push_back({axis.direction, m});
    if (step % config.diagnostics_stride == 0 || step == config.n_steps) {
      out.diagnostics.push_back(
          take_snapshot(sys, acc, step, step * config.kappa_dt, config.polar_diagnostics));
    }
  }
  out.steps = config.n_steps;
  out.final_state = state;
  finish_trajectory(sys, acc, config.estimate_policy, rng, out);
  return out;
}

}  // namespace

TrajectoryOutcome run_sequential(const SequentialConfig& config, Rng& rng) {
  config.validate();
  const SpinSystem sys(config.n_qubits);
  MeasuredAxis current;
  return run_loop(sys, config, rng, [&](Rng& r) -> const MeasuredAxis& {
    current.direction = haar_direction(r);
    current.basis = sys.rotated_basis(current.direction);
    return current;
  });
}

TrajectoryOutcome run_sequential(const SequentialConfig& config) {
  Rng rng(config.seed);
  return run_sequential(config, rng);
}

TrajectoryOutcome run_fixed_direction(const SequentialConfig& config, const Direction& u, Rng& rng) {
  config.validate();
  const SpinSystem sys(config.n_qubits);
  const MeasuredAxis fixed{u, sys.rotated_basis(u)};
  return run_loop(sys, config, rng, [&](Rng&) -> const MeasuredAxis& { return fixed; });
}

}  // namespace weakscs
