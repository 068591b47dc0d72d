#include "weakscs/continuous.hpp"

#include <cmath>
#include <numbers>

#include "weakscs/errors.hpp"
#include "weakscs/sequential.hpp"

namespace weakscs {

namespace {

constexpr Complex kI{0.0, 1.0};

double default_dt(const ContinuousConfig& c) { return 1e-3 / (8.0 * 0.5 * c.n_qubits) / c.kappa; }

double omega(const ContinuousConfig& c) { return c.rabi_over_kappa * c.kappa; }

// 1 - i H dt - (kappa/8) Jz^2 dt; the dy term is added per step.
Matrix drift_part(const SpinSystem& sys, const Matrix& hamiltonian, double dt, double kappa) {
  const int d = sys.dim();
  Matrix out = Matrix::Identity(d, d) - kI * dt * hamiltonian;
  const RealVector& m = sys.m_values();
  for (int k = 0; k < d; ++k) out(k, k) -= 0.125 * kappa * dt * m[k] * m[k];
  return out;
}

SseStep step_with_dy(const SpinSystem& sys, const StateVector& state, const Matrix& drift, double dy,
                     double kappa) {
  SseStep out;
  out.dy = dy;
  out.kraus = drift;
  const double gain = 0.5 * std::sqrt(kappa) * dy;
  const RealVector& m = sys.m_values();
  for (int k = 0; k < sys.dim(); ++k) out.kraus(k, k) += gain * m[k];
  out.state = StateVector(out.kraus * state.amplitudes());
  out.state.normalize();
  return out;
}

double mean_jz(const SpinSystem& sys, const StateVector& state) {
  return state.amplitudes().cwiseAbs2().dot(sys.m_values());
}

}  // namespace

void ContinuousConfig::validate() const {
  if (n_qubits < 1) throw ConfigError("n_qubits", "must be at least 1");
  if (!std::isfinite(kappa) || kappa <= 0) throw ConfigError("kappa", "must be positive");
  if (dt && (!std::isfinite(*dt) || *dt <= 0)) throw ConfigError("dt", "must be positive");
  if (total_time && (!std::isfinite(*total_time) || *total_time < 0)) {
    throw ConfigError("total_time", "must be nonnegative");
  }
  if (dwell && (!std::isfinite(*dwell) || *dwell <= 0)) throw ConfigError("dwell", "must be positive");
  if (!std::isfinite(rabi_over_kappa)) throw ConfigError("rabi_over_kappa", "must be finite");
  if (diagnostics_stride < 0) throw ConfigError("diagnostics_stride", "must be nonnegative");
  const double t = total_time.value_or(1.0 / kappa);
  const double tau = dwell.value_or(1.0 / (50.0 * kappa));
  if (t > 0 && t < tau * (1 - 1e-12)) throw ConfigError("total_time", "shorter than one control dwell");
}

ContinuousPlan plan(const ContinuousConfig& config) {
  config.validate();
  ContinuousPlan p;
  p.dt = config.dt.value_or(default_dt(config));
  const double total = config.total_time.value_or(1.0 / config.kappa);
  const double tau = config.dwell.value_or(1.0 / (50.0 * config.kappa));
  p.n_steps = std::lround(total / p.dt);
  p.steps_per_dwell = std::max(1L, std::lround(tau / p.dt));
  p.n_dwells = (p.n_steps + p.steps_per_dwell - 1) / p.steps_per_dwell;
  p.dwell = p.steps_per_dwell * p.dt;
  p.dwell_shift = p.dwell - tau;
  p.diagnostics_stride = config.diagnostics_stride > 0 ? config.diagnostics_stride : p.steps_per_dwell;
  return p;
}

Matrix control_hamiltonian(const SpinSystem& sys, double phi, double omega) {
  return omega * (std::cos(phi) * sys.jx() + std::sin(phi) * sys.jy());
}

std::vector<double> sample_control_schedule(Rng& rng, long n_dwells) {
  std::uniform_real_distribution<double> azimuth(0.0, 2 * std::numbers::pi);
  std::vector<double> out(static_cast<std::size_t>(std::max(0L, n_dwells)));
  for (double& phi : out) phi = azimuth(rng);
  return out;
}

Matrix differential_kraus(const SpinSystem& sys, const Matrix& hamiltonian, double dy, double dt,
                          double kappa) {
  Matrix out = drift_part(sys, hamiltonian, dt, kappa);
  const double gain = 0.5 * std::sqrt(kappa) * dy;
  for (int k = 0; k < sys.dim(); ++k) out(k, k) += gain * sys.m_values()[k];
  return out;
}

SseStep sse_step_from_record(const SpinSystem& sys, const StateVector& state, double phi, double dy,
                             const ContinuousConfig& config) {
  const ContinuousPlan p = plan(config);
  const Matrix drift = drift_part(sys, control_hamiltonian(sys, phi, omega(config)), p.dt, config.kappa);
  return step_with_dy(sys, state, drift, dy, config.kappa);
}

SseStep sse_step_with_noise(const SpinSystem& sys, const StateVector& state, double phi, double dw,
                            const ContinuousConfig& config) {
  const double dt = plan(config).dt;
  const double dy = std::sqrt(config.kappa) * mean_jz(sys, state) * dt + dw;
  return sse_step_from_record(sys, state, phi, dy, config);
}

SseStep sse_step(const SpinSystem& sys, const StateVector& state, double phi, Rng& rng,
                 const ContinuousConfig& config) {
  std::normal_distribution<double> wiener(0.0, std::sqrt(plan(config).dt));
  return sse_step_with_noise(sys, state, phi, wiener(rng), config);
}

namespace {

// Shared by fresh runs and replays. `control_for` supplies the azimuth of
// a dwell and `increment_for` the record dy of a step given the current state.
template <class ControlFn, class IncrementFn>
TrajectoryOutcome integrate(const ContinuousConfig& config, const Direction& initial, Rng& rng,
                            ControlFn&& control_for, IncrementFn&& increment_for) {
  const ContinuousPlan p = plan(config);
  const SpinSystem sys(config.n_qubits);
  const double kappa = config.kappa;

  TrajectoryOutcome out;
  out.initial_direction = initial;
  StateVector state = sys.coherent_state(initial);
  KrausAccumulator acc(sys.dim());
  if (config.keep_record) {
    out.record.control_angles.reserve(p.n_dwells);
    out.record.increments.reserve(p.n_steps);
  }

  out.diagnostics.push_back(take_snapshot(sys, acc, 0, 0.0, config.polar_diagnostics));
  Matrix drift;
  for (long step = 0; step < p.n_steps; ++step) {
    if (step % p.steps_per_dwell == 0) {
      const long dwell = step / p.steps_per_dwell;
      const double phi = control_for(dwell);
      if (config.keep_record) out.record.control_angles.push_back(phi);
      drift = drift_part(sys, control_hamiltonian(sys, phi, omega(config)), p.dt, kappa);
    }
    const double dy = increment_for(step, sys, state, p.dt);
    SseStep next = step_with_dy(sys, state, drift, dy, kappa);
    acc.accumulate(next.kraus);
    state = std::move(next.state);
    if (config.keep_record) out.record.increments.push_back(dy);
    const long done = step + 1;
    if (done % p.diagnostics_stride == 0 || done == p.n_steps) {
      out.diagnostics.push_back(
          take_snapshot(sys, acc, done, done * p.dt * kappa, config.polar_diagnostics));
    }
  }
  out.steps = p.n_steps;
  out.final_state = state;
  finish_trajectory(sys, acc, config.estimate_policy, rng, out);
  return out;
}

}  // namespace

TrajectoryOutcome run_continuous(const ContinuousConfig& config, Rng& rng) {
  config.validate();
  const Direction initial = config.initial_direction ? *config.initial_direction : haar_direction(rng);
  std::uniform_real_distribution<double> azimuth(0.0, 2 * std::numbers::pi);
  const double sqrt_kappa = std::sqrt(config.kappa);
  std::normal_distribution<double> wiener(0.0, 1.0);
  return integrate(
      config, initial, rng, [&](long) { return azimuth(rng); },
      [&](long, const SpinSystem& sys, const StateVector& state, double dt) {
        return sqrt_kappa * mean_jz(sys, state) * dt + std::sqrt(dt) * wiener(rng);
      });
}

TrajectoryOutcome run_continuous(const ContinuousConfig& config) {
  Rng rng(config.seed);
  return run_continuous(config, rng);
}

TrajectoryOutcome replay_continuous(const ContinuousConfig& config, const Direction& initial,
                                    const MeasurementRecord& record, Rng& rng) {
  const ContinuousPlan p = plan(config);
  if (static_cast<long>(record.increments.size()) != p.n_steps ||
      static_cast<long>(record.control_angles.size()) != p.n_dwells) {
    throw ConfigError("record", "length does not match the configured run");
  }
  return integrate(
      config, initial, rng, [&](long dwell) { return record.control_angles[dwell]; },
      [&](long step, const SpinSystem&, const StateVector&, double) { return record.increments[step]; });
}

}  // namespace weakscs
