#include "weakscs/spin_algebra.hpp"

#include <algorithm>
#include <cmath>

#include "weakscs/errors.hpp"

namespace weakscs {

namespace {

constexpr Complex kI{0.0, 1.0};

Matrix diagonal_exponential(const ComponentBasis& basis, const Eigen::VectorXcd& factors) {
  return basis.vectors * factors.asDiagonal() * basis.vectors.adjoint();
}

}  // namespace

Direction Direction::from_unit(const Vec3& v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-12) {
    throw ConfigError("direction", "vector is not of unit length");
  }
  return Direction(v);
}

Direction Direction::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-300) {
    throw ConfigError("direction", "cannot normalize a zero vector");
  }
  return Direction(v / n);
}

Direction Direction::from_angles(double theta, double phi) {
  return Direction(Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                        std::cos(theta)));
}

double Direction::polar() const { return std::acos(std::clamp(v_.z(), -1.0, 1.0)); }

double Direction::azimuth() const { return std::atan2(v_.y(), v_.x()); }

double StateVector::normalize() {
  const double norm_sq = amp_.squaredNorm();
  if (!(norm_sq >= 1e-300)) {
    throw UnderflowError("state norm underflow (squared norm " + std::to_string(norm_sq) + ")");
  }
  amp_ /= std::sqrt(norm_sq);
  return norm_sq;
}

SpinSystem::SpinSystem(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1) {
    throw ConfigError("n_qubits", "must be at least 1");
  }
  const int d = dim();
  const double j = this->j();
  m_values_.resize(d);
  for (int k = 0; k < d; ++k) m_values_[k] = j - k;

  // Ladder elements <M+1|J+|M> = sqrt(J(J+1) - M(M+1)); basis index k holds M = J - k.
  Matrix jplus = Matrix::Zero(d, d);
  for (int k = 1; k < d; ++k) {
    const double m = m_values_[k];
    jplus(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const Matrix jminus = jplus.adjoint();
  jx_ = 0.5 * (jplus + jminus);
  jy_ = (-0.5 * kI) * (jplus - jminus);
  jz_ = m_values_.cast<Complex>().asDiagonal();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(jy_);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("Jy eigendecomposition failed");
  }
  jy_vectors_ = solver.eigenvectors();
  jy_values_ = solver.eigenvalues();
  // The spectrum is known exactly; snap away solver round-off.
  for (int k = 0; k < d; ++k) jy_values_[k] = -j + k;
}

const Matrix& SpinSystem::operator[](int axis) const {
  switch (axis) {
    case 0:
      return jx_;
    case 1:
      return jy_;
    default:
      return jz_;
  }
}

Matrix SpinSystem::component(const Direction& u) const {
  return u[0] * jx_ + u[1] * jy_ + u[2] * jz_;
}

ComponentBasis SpinSystem::diagonalize(const Direction& u) const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(component(u));
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("spin component eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix SpinSystem::apply_y_rotation(double theta) const {
  const Eigen::VectorXcd phases = (-kI * theta * jy_values_.cast<Complex>()).array().exp();
  return jy_vectors_ * phases.asDiagonal() * jy_vectors_.adjoint();
}

Matrix SpinSystem::rotation_to(const Direction& u) const {
  const double theta = u.polar();
  const double phi = u.azimuth();
  const Eigen::VectorXcd z_phases = (-kI * phi * m_values_.cast<Complex>()).array().exp();
  return z_phases.asDiagonal() * apply_y_rotation(theta);
}

ComponentBasis SpinSystem::rotated_basis(const Direction& u) const {
  // Columns of rotation_to(u) carry M = J..-J; reverse to ascending order.
  return {m_values_.reverse(), rotation_to(u).rowwise().reverse()};
}

Matrix SpinSystem::rotation(const Direction& axis, double angle) const {
  const ComponentBasis basis = rotated_basis(axis);
  return diagonal_exponential(basis, (-kI * angle * basis.eigenvalues.cast<Complex>()).array().exp());
}

Matrix SpinSystem::boost(const Direction& axis, double s) const {
  const ComponentBasis basis = rotated_basis(axis);
  return diagonal_exponential(basis, (s * basis.eigenvalues).array().exp().cast<Complex>());
}

StateVector SpinSystem::coherent_state(const Direction& u) const {
  Vector top = rotation_to(u).col(0);
  fix_phase(top);
  return StateVector(std::move(top));
}

Vec3 SpinSystem::expectation(const StateVector& state) const {
  const Vector& psi = state.amplitudes();
  Vec3 out;
  for (int a = 0; a < 3; ++a) {
    const Complex value = psi.dot((*this)[a] * psi);
    if (std::abs(value.imag()) > 1e-10) {
      throw Error("spin expectation has a non-negligible imaginary part");
    }
    out[a] = value.real();
  }
  return out;
}

SpinSystem build_spin_system(int n_qubits) { return SpinSystem(n_qubits); }

Matrix spin_component(const SpinSystem& sys, const Direction& u) { return sys.component(u); }

ComponentBasis diagonalize_component(const SpinSystem& sys, const Direction& u) {
  return sys.diagonalize(u);
}

StateVector spin_coherent_state(const SpinSystem& sys, const Direction& u) {
  return sys.coherent_state(u);
}

Vec3 expectation_spin(const SpinSystem& sys, const StateVector& state) {
  return sys.expectation(state);
}

void fix_phase(Vector& v) {
  Eigen::Index largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  const double mag = std::abs(v[largest]);
  if (mag > 0) v *= std::conj(v[largest]) / mag;
  v[largest] = Complex(v[largest].real(), 0.0);
}

Eigen::Matrix3d rotation_matrix(const Direction& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.vec()).toRotationMatrix();
}

}  // namespace weakscs
