#pragma once

#include "weakscs/spin_algebra.hpp"
#include "weakscs/types.hpp"

namespace weakscs {

/// Strength of a single weak measurement, as the dimensionless product
/// kappa * dt of measurement rate and duration.
struct WeakMeasSettings {
  /// Throws ConfigError unless kappa_dt is finite and positive.
  explicit WeakMeasSettings(double kappa_dt);

  /// Values above 0.01 are accepted but leave the weak regime.
  bool is_weak() const { return kappa_dt <= 0.01; }

  double kappa_dt;
};

/// Born density of the outcome m for one weak measurement: a mixture of
/// Gaussians of common variance 1/kappa_dt centred on the eigenvalues M.
struct OutcomeMixture {
  RealVector weights;  // p_M, aligned with `centers`
  RealVector centers;  // eigenvalues M of the measured component
  double variance = 0;

  double density(double m) const;
};

/// Kraus factor in the eigenbasis of J_u, divided by its largest entry:
/// factors[k] * exp(log_scale) is the k-th eigenvalue of dK_u(m).
struct KrausSpectrum {
  RealVector factors;
  double log_scale = 0;
};

KrausSpectrum kraus_spectrum(const RealVector& eigenvalues, double m, const WeakMeasSettings& settings);

/// (kappa_dt / 2 pi)^{1/4} exp(-(kappa_dt / 4) (J_u - m)^2) as a dense matrix.
Matrix kraus_operator(const SpinSystem& sys, const Direction& u, double m,
                      const WeakMeasSettings& settings);
Matrix kraus_operator(const ComponentBasis& basis, double m, const WeakMeasSettings& settings);

OutcomeMixture outcome_mixture(const SpinSystem& sys, const StateVector& state, const Direction& u,
                               const WeakMeasSettings& settings);
OutcomeMixture outcome_mixture(const ComponentBasis& basis, const StateVector& state,
                               const WeakMeasSettings& settings);

/// Exact draw: M from the categorical weights, then m ~ Normal(M, variance).
double sample_outcome(const OutcomeMixture& mixture, Rng& rng);

struct PostMeasurement {
  StateVector state;
  /// Squared norm of the unnormalized post-measurement state with the
  /// Gaussian prefactor dropped: sum_M p_M exp(-kappa_dt (m - M)^2 / 2).
  double norm_sq = 0;
};

/// Applies dK_u(m) and renormalizes. Throws UnderflowError when norm_sq
/// falls below 1e-300.
PostMeasurement apply_measurement(const SpinSystem& sys, const StateVector& state, const Direction& u,
                                  double m, const WeakMeasSettings& settings);
PostMeasurement apply_measurement(const ComponentBasis& basis, const StateVector& state, double m,
                                  const WeakMeasSettings& settings);

}  // namespace weakscs
