#include "weakscs/weak_measurement.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "weakscs/errors.hpp"

namespace weakscs {

WeakMeasSettings::WeakMeasSettings(double kdt) : kappa_dt(kdt) {
  if (!std::isfinite(kdt) || kdt <= 0) {
    throw ConfigError("kappa_dt", "must be finite and positive");
  }
}

double OutcomeMixture::density(double m) const {
  const double norm = 1.0 / std::sqrt(2 * std::numbers::pi * variance);
  double total = 0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    const double x = m - centers[k];
    total += weights[k] * std::exp(-0.5 * x * x / variance);
  }
  return norm * total;
}

KrausSpectrum kraus_spectrum(const RealVector& eigenvalues, double m, const WeakMeasSettings& settings) {
  const double q = 0.25 * settings.kappa_dt;
  const RealVector exponents = -q * (eigenvalues.array() - m).square();
  const double top = exponents.maxCoeff();
  KrausSpectrum out;
  out.factors = (exponents.array() - top).exp();
  out.log_scale = top + 0.25 * std::log(settings.kappa_dt / (2 * std::numbers::pi));
  return out;
}

Matrix kraus_operator(const ComponentBasis& basis, double m, const WeakMeasSettings& settings) {
  const KrausSpectrum spec = kraus_spectrum(basis.eigenvalues, m, settings);
  const RealVector diag = spec.factors * std::exp(spec.log_scale);
  return basis.vectors * diag.cast<Complex>().asDiagonal() * basis.vectors.adjoint();
}

Matrix kraus_operator(const SpinSystem& sys, const Direction& u, double m,
                      const WeakMeasSettings& settings) {
  return kraus_operator(sys.rotated_basis(u), m, settings);
}

OutcomeMixture outcome_mixture(const ComponentBasis& basis, const StateVector& state,
                               const WeakMeasSettings& settings) {
  const Vector coeffs = basis.vectors.adjoint() * state.amplitudes();
  OutcomeMixture out;
  out.weights = coeffs.cwiseAbs2();
  out.weights /= out.weights.sum();
  out.centers = basis.eigenvalues;
  out.variance = 1.0 / settings.kappa_dt;
  return out;
}

OutcomeMixture outcome_mixture(const SpinSystem& sys, const StateVector& state, const Direction& u,
                               const WeakMeasSettings& settings) {
  return outcome_mixture(sys.rotated_basis(u), state, settings);
}

double sample_outcome(const OutcomeMixture& mixture, Rng& rng) {
  std::discrete_distribution<Eigen::Index> pick(mixture.weights.data(),
                                                mixture.weights.data() + mixture.weights.size());
  const double center = mixture.centers[pick(rng)];
  std::normal_distribution<double> noise(center, std::sqrt(mixture.variance));
  return noise(rng);
}

PostMeasurement apply_measurement(const ComponentBasis& basis, const StateVector& state, double m,
                                  const WeakMeasSettings& settings) {
  const Vector coeffs = basis.vectors.adjoint() * state.amplitudes();
  // Full Kraus eigenvalues without the (kappa_dt / 2 pi)^{1/4} prefactor.
  const RealVector diag =
      (-0.25 * settings.kappa_dt * (basis.eigenvalues.array() - m).square()).exp();
  const Vector scaled = diag.cast<Complex>().cwiseProduct(coeffs);
  PostMeasurement out;
  out.norm_sq = scaled.squaredNorm();
  if (!(out.norm_sq >= 1e-300)) {
    throw UnderflowError("measurement outcome has vanishing probability");
  }
  out.state = StateVector(basis.vectors * scaled);
  out.state.normalize();
  return out;
}

PostMeasurement apply_measurement(const SpinSystem& sys, const StateVector& state, const Direction& u,
                                  double m, const WeakMeasSettings& settings) {
  return apply_measurement(sys.rotated_basis(u), state, m, settings);
}

}  // namespace weakscs
