#include "weakscs/analysis.hpp"

#include <cmath>
#include <numbers>

#include "weakscs/errors.hpp"
#include "weakscs/sequential.hpp"

namespace weakscs {

KrausAccumulator::KrausAccumulator(int dim) : matrix_(Matrix::Identity(dim, dim)) { rescale(); }

void KrausAccumulator::rescale() {
  const double norm = matrix_.norm();
  if (!(norm >= 1e-300) || !std::isfinite(norm)) {
    throw UnderflowError("Kraus product lost its norm");
  }
  matrix_ /= norm;
  log_scale_ += std::log(norm);
}

void KrausAccumulator::accumulate(const Matrix& step, double step_log_scale) {
  scratch_.noalias() = step * matrix_;
  matrix_.swap(scratch_);
  log_scale_ += step_log_scale;
  rescale();
}

void KrausAccumulator::accumulate_diagonal(const ComponentBasis& basis, const RealVector& factors,
                                           double log_factor) {
  scratch_.noalias() = basis.vectors.adjoint() * matrix_;
  scratch_ = factors.cast<Complex>().asDiagonal() * scratch_;
  matrix_.noalias() = basis.vectors * scratch_;
  log_scale_ += log_factor;
  rescale();
}

Matrix KrausAccumulator::product() const { return std::exp(log_scale_) * matrix_; }

KrausAccumulator accumulate(KrausAccumulator acc, const Matrix& step) {
  acc.accumulate(step);
  return acc;
}

Matrix povm_element(const Matrix& kraus) {
  Matrix effect = kraus.adjoint() * kraus;
  effect = 0.5 * (effect + effect.adjoint()).eval();
  const double trace = effect.trace().real();
  if (!(trace > 0)) throw UnderflowError("POVM element has zero trace");
  return effect / trace;
}

Matrix povm_element(const KrausAccumulator& acc) { return povm_element(acc.matrix()); }

Vec3 mean_spin(const SpinSystem& sys, const Matrix& effect) {
  Vec3 out;
  for (int a = 0; a < 3; ++a) {
    // Tr(J_a E) = sum_ij (J_a)_ij E_ji
    out[a] = sys[a].cwiseProduct(effect.transpose()).sum().real();
  }
  return out;
}

double coherency(const SpinSystem& sys, const Matrix& effect) {
  const double trace = effect.trace().real();
  const double j = sys.j();
  return mean_spin(sys, effect).squaredNorm() / (j * j * trace * trace);
}

Direction estimate_direction(const SpinSystem& sys, const Matrix& effect) {
  const Vec3 spin = mean_spin(sys, effect);
  const double trace = effect.trace().real();
  if (!(spin.norm() > 1e-12 * std::abs(trace))) {
    throw NoEstimateError("Tr(E J) vanishes; no optimal direction");
  }
  return Direction::normalized(spin);
}

Estimate estimate_direction(const SpinSystem& sys, const Matrix& effect, EstimatePolicy policy,
                            Rng& rng) {
  try {
    return {estimate_direction(sys, effect), false};
  } catch (const NoEstimateError&) {
    if (policy == EstimatePolicy::kThrow) throw;
    return {haar_direction(rng), true};
  }
}

double qubit_fidelity(const Direction& n0, const Direction& n_hat) { return 0.5 * (1.0 + n0.dot(n_hat)); }

PolarExtract extract_polar(const SpinSystem& sys, const Matrix& effect) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(effect);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("POVM element eigendecomposition failed");
  }
  const RealVector& values = solver.eigenvalues();
  const int d = static_cast<int>(values.size());
  const double top = values[d - 1];
  if (!(top > 0)) throw NotPositiveError("POVM element has no positive eigenvalue");
  if (values[0] < -1e-12 * top) {
    throw NotPositiveError("POVM element has a negative eigenvalue");
  }

  const double floor = 1e-15 * top;
  int first = 0;
  while (first < d && values[first] <= floor) ++first;
  first = std::min(first, d - 2);

  // Ascending eigenvalue k pairs with M = -J + k.
  const double j = sys.j();
  const int n = d - first;
  RealVector m(n), y(n);
  for (int k = first; k < d; ++k) {
    m[k - first] = -j + k;
    y[k - first] = std::log(std::max(values[k], floor) / top);
  }
  const double m_mean = m.mean();
  const double y_mean = y.mean();
  const RealVector dm = m.array() - m_mean;
  const double slope = dm.dot(y.array().matrix() - RealVector::Constant(n, y_mean)) / dm.squaredNorm();
  const RealVector fitted = (y_mean + slope * dm.array()).matrix();

  PolarExtract out;
  out.alpha = 0.5 * std::max(slope, 0.0);
  out.fit_residual = std::sqrt((y - fitted).squaredNorm() / n);
  out.fitted_levels = n;
  const Vec3 spin = sys.expectation(StateVector(solver.eigenvectors().col(d - 1)));
  out.axis = spin.norm() > 1e-12 ? Direction::normalized(spin) : Direction::z();
  return out;
}

double coherency_from_alpha(int n_qubits, double alpha) {
  if (n_qubits < 1) throw ConfigError("n_qubits", "must be at least 1");
  const double a2 = 2.0 * std::abs(alpha);
  if (a2 == 0.0) return 0.0;
  const int n = n_qubits;
  // 1 - x^k = -expm1(-k * 2 alpha) keeps the small-alpha ratio accurate.
  const double denom = -std::expm1(-(n + 1) * a2);
  double sum = 0;
  for (int m = 1; m <= n; ++m) {
    sum += std::exp(-m * a2) * (-std::expm1(-(n + 1 - m) * a2)) / denom;
  }
  const double ratio = 1.0 - sum / (0.5 * n);
  return ratio * ratio;
}

double coherency_asymptote(int n_qubits, double alpha) {
  return 1.0 - 2.0 / (std::exp(2.0 * alpha) * (n_qubits + 1));
}

std::pair<RealVector, RealVector> gauss_legendre(int n) {
  if (n < 1) throw ConfigError("n_theta", "must be at least 1");
  RealVector nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

double scs_resolution_check(const SpinSystem& sys, int n_theta, int n_phi) {
  if (n_phi < 1) throw ConfigError("n_phi", "must be at least 1");
  const auto [nodes, weights] = gauss_legendre(n_theta);
  const int d = sys.dim();
  Matrix total = Matrix::Zero(d, d);
  const double prefactor = d / (4 * std::numbers::pi) * (2 * std::numbers::pi / n_phi);
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::acos(nodes[i]);
    for (int k = 0; k < n_phi; ++k) {
      const double phi = 2 * std::numbers::pi * k / n_phi;
      const Vector scs = sys.coherent_state(Direction::from_angles(theta, phi)).amplitudes();
      total.noalias() += (prefactor * weights[i]) * scs * scs.adjoint();
    }
  }
  return (total - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

}  // namespace weakscs
