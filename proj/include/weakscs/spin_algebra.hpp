#pragma once

#include <memory>

#include "weakscs/types.hpp"

namespace weakscs {

/// Unit vector on the sphere.
class Direction {
 public:
  /// Accepts `v` only if its Euclidean norm is 1 within 1e-12.
  static Direction from_unit(const Vec3& v);
  /// Normalizes `v`; throws ConfigError for a (near) zero vector.
  static Direction normalized(const Vec3& v);
  /// Polar angle `theta` from +z, azimuth `phi` from +x.
  static Direction from_angles(double theta, double phi);

  static Direction x() { return Direction(Vec3::UnitX()); }
  static Direction y() { return Direction(Vec3::UnitY()); }
  static Direction z() { return Direction(Vec3::UnitZ()); }

  const Vec3& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  double dot(const Direction& other) const { return v_.dot(other.v_); }
  double polar() const;
  double azimuth() const;

  Direction operator-() const { return Direction(-v_); }

 private:
  explicit Direction(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

/// Pure state of the symmetric subspace, amplitudes in the Dicke basis
/// |J,J>, |J,J-1>, ..., |J,-J>.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(Vector amplitudes) : amp_(std::move(amplitudes)) {}

  const Vector& amplitudes() const { return amp_; }
  Vector& amplitudes() { return amp_; }
  Complex operator[](Eigen::Index i) const { return amp_[i]; }
  Eigen::Index dim() const { return amp_.size(); }
  double norm() const { return amp_.norm(); }

  /// Rescales to unit norm and returns the squared norm before rescaling.
  /// Throws UnderflowError when the squared norm is below 1e-300.
  double normalize();

 private:
  Vector amp_;
};

/// Eigensystem of a spin component u.J. Column k of `vectors` is the
/// eigenvector for `eigenvalues[k]`; eigenvalues are ascending.
struct ComponentBasis {
  RealVector eigenvalues;
  Matrix vectors;
};

/// Collective spin operators of N qubits restricted to the symmetric
/// subspace (spin J = N/2, dimension 2J+1). Immutable once built and safe to
/// share between threads.
class SpinSystem {
 public:
  /// Throws ConfigError for n_qubits < 1.
  explicit SpinSystem(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  double j() const { return 0.5 * n_qubits_; }
  int dim() const { return n_qubits_ + 1; }

  const Matrix& jx() const { return jx_; }
  const Matrix& jy() const { return jy_; }
  const Matrix& jz() const { return jz_; }
  const Matrix& operator[](int axis) const;

  /// Magnetic quantum numbers in basis order: J, J-1, ..., -J.
  const RealVector& m_values() const { return m_values_; }

  /// u.J as a dense Hermitian matrix.
  Matrix component(const Direction& u) const;

  /// Eigensystem of u.J from a dense Hermitian eigensolver.
  /// Throws EigenSolverError on failure.
  ComponentBasis diagonalize(const Direction& u) const;

  /// Eigensystem of u.J built from the rotation that carries z onto u.
  /// Eigenvalues are the exact half-integers -J..J.
  ComponentBasis rotated_basis(const Direction& u) const;

  /// Unitary exp(-i phi Jz) exp(-i theta Jy) for u = (theta, phi); it maps
  /// |J,M>_z onto an eigenvector of u.J with eigenvalue M.
  Matrix rotation_to(const Direction& u) const;

  /// Unitary representation exp(-i angle a.J) of the rotation by `angle`
  /// about axis `a`.
  Matrix rotation(const Direction& axis, double angle) const;

  /// Hermitian exponential exp(s * a.J).
  Matrix boost(const Direction& axis, double s) const;

  /// |J,J>_u with the largest-magnitude amplitude made real positive.
  StateVector coherent_state(const Direction& u) const;

  /// (<Jx>, <Jy>, <Jz>) for a normalized state.
  Vec3 expectation(const StateVector& state) const;

 private:
  Matrix apply_y_rotation(double theta) const;

  int n_qubits_;
  Matrix jx_, jy_, jz_;
  RealVector m_values_;
  // Eigensystem of Jy, used to build rotations without a per-call eigensolve.
  Matrix jy_vectors_;
  RealVector jy_values_;
};

// Free-function forms of the operations above.

SpinSystem build_spin_system(int n_qubits);
Matrix spin_component(const SpinSystem& sys, const Direction& u);
ComponentBasis diagonalize_component(const SpinSystem& sys, const Direction& u);
StateVector spin_coherent_state(const SpinSystem& sys, const Direction& u);
Vec3 expectation_spin(const SpinSystem& sys, const StateVector& state);

/// Fixes the global phase so the largest-magnitude amplitude is real positive.
void fix_phase(Vector& v);

/// 3x3 rotation matrix for `angle` about `axis` (right-handed).
Eigen::Matrix3d rotation_matrix(const Direction& axis, double angle);

}  // namespace weakscs
