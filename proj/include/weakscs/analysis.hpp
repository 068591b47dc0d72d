#pragma once

#include <utility>
#include <vector>

#include "weakscs/spin_algebra.hpp"
#include "weakscs/types.hpp"

namespace weakscs {

/// Underflow-safe running product of Kraus operators. The true product is
/// exp(log_scale()) * matrix(); matrix() is kept at unit Frobenius norm.
/// New factors multiply from the left, so the first factor applied is the
/// rightmost one.
class KrausAccumulator {
 public:
  /// Starts from the identity.
  explicit KrausAccumulator(int dim);

  const Matrix& matrix() const { return matrix_; }
  double log_scale() const { return log_scale_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  /// matrix <- exp(step_log_scale) * step * matrix, then rescale.
  void accumulate(const Matrix& step, double step_log_scale = 0.0);

  /// Left-multiplies by V diag(factors) V^dagger, where V = basis.vectors,
  /// with exp(log_factor) carried into log_scale.
  void accumulate_diagonal(const ComponentBasis& basis, const RealVector& factors,
                           double log_factor = 0.0);

  /// exp(log_scale) * matrix; overflows for long products.
  Matrix product() const;

 private:
  void rescale();

  Matrix matrix_;
  double log_scale_ = 0;
  Matrix scratch_;
};

KrausAccumulator accumulate(KrausAccumulator acc, const Matrix& step);

/// K^dagger K / Tr(K^dagger K), explicitly Hermitized.
Matrix povm_element(const KrausAccumulator& acc);
Matrix povm_element(const Matrix& kraus);

/// Tr(J E) as a real 3-vector.
Vec3 mean_spin(const SpinSystem& sys, const Matrix& effect);

/// |Tr(J E)|^2 / (J^2 (Tr E)^2); equals 1 only for a spin-coherent projector.
double coherency(const SpinSystem& sys, const Matrix& effect);

/// Tr(E J) / |Tr(E J)|. Throws NoEstimateError when |Tr(E J)| <= 1e-12 Tr E.
Direction estimate_direction(const SpinSystem& sys, const Matrix& effect);

enum class EstimatePolicy { kThrow, kRandomFallback };

struct Estimate {
  Direction direction = Direction::z();
  bool fallback = false;
};

/// As above, but with kRandomFallback a degenerate effect yields a Haar
/// random direction drawn from `rng`.
Estimate estimate_direction(const SpinSystem& sys, const Matrix& effect, EstimatePolicy policy,
                            Rng& rng);

/// (1 + n0.n_hat) / 2
double qubit_fidelity(const Direction& n0, const Direction& n_hat);

/// Fit of a POVM element to the form exp(2 alpha n.J).
struct PolarExtract {
  double alpha = 0;
  Direction axis = Direction::z();
  double fit_residual = 0;  // RMS deviation of log-eigenvalues from the line
  int fitted_levels = 0;    // eigenvalues above the clamp that entered the fit
};

/// Least-squares fit of ln(eigenvalue) against M. Eigenvalues below
/// 1e-15 of the largest are clamped there and excluded from the fit unless
/// fewer than two levels remain. Throws NotPositiveError for an eigenvalue
/// below -1e-12 of the largest.
PolarExtract extract_polar(const SpinSystem& sys, const Matrix& effect);

/// Closed-form coherency of exp(2 alpha n.J) for N qubits. Even in alpha.
double coherency_from_alpha(int n_qubits, double alpha);

/// Large-alpha limit 1 - 2 / (exp(2 alpha) (N + 1)).
double coherency_asymptote(int n_qubits, double alpha);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<RealVector, RealVector> gauss_legendre(int n);

/// Max-abs deviation from the identity of the quadrature estimate of
/// (2J+1)/(4 pi) \int dn |J,J>_n <J,J|_n, using n_theta Gauss-Legendre
/// nodes in cos(theta) times n_phi uniform azimuths.
double scs_resolution_check(const SpinSystem& sys, int n_theta, int n_phi);

}  // namespace weakscs
