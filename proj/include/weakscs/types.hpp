#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

namespace weakscs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

/// Random engine used for every stochastic draw; one private instance per
/// trajectory.
using Rng = std::mt19937_64;

}  // namespace weakscs
