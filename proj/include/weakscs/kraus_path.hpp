#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "weakscs/analysis.hpp"
#include "weakscs/spin_algebra.hpp"

namespace weakscs {

/// Per-component variance of the coarse-grained record mu_I.
enum class MuVarianceMode {
  kThird,  // 1 / (3 kappa dt): mu_I = (1/l) sum m_i u_i over isotropic u_i
  kUnit,   // 1 / (kappa dt): the Gaussian weight exp(-kappa dt mu^2 / 2) taken literally
};

/// Operator-valued Kraus path dK/dt = (kappa/2) mu(t).J K driven by an
/// isotropic Gaussian mu, piecewise constant over intervals delta_t.
struct PathConfig {
  int n_qubits = 4;
  double kappa = 1.0;
  double delta_t = 0.01;
  double total_time = 1.0;
  MuVarianceMode mode = MuVarianceMode::kThird;
  int n_paths = 2000;
  /// Intervals between ensemble time points.
  int record_every = 10;
  int workers = 1;
  std::uint64_t seed = 0;

  void validate() const;
  long n_steps() const;
};

Vec3 sample_mu(Rng& rng, const PathConfig& config);

/// Exact step K <- exp((kappa delta_t / 2) mu.J) K.
void step_path(const SpinSystem& sys, KrausAccumulator& path, const Vec3& mu, const PathConfig& config);

/// State of one path at an ensemble time point.
struct PathPoint {
  double alpha = 0;     // >= 0
  Vec3 axis = Vec3::UnitZ();
  Vec3 alpha_vector = Vec3::Zero();  // alpha * axis
  double drift_angle = 0;  // rotation angle of the polar unitary over the last interval
  double fit_residual = 0;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares of y on x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct PathStats {
  std::vector<double> times;                   // t at each time point
  std::vector<std::vector<PathPoint>> points;  // [time point][path]
  /// Ensemble variance of the alpha vector per Cartesian component,
  /// averaged over the three components.
  std::vector<double> component_variance;
  /// Ensemble mean of the alpha vector components, averaged over components.
  std::vector<double> component_mean;
  std::vector<double> mean_alpha;         // E[alpha]
  std::vector<double> alpha_variance;     // Var(alpha) of the scalar alpha >= 0
  std::vector<double> mean_square_alpha;  // E[alpha^2]
  std::vector<double> mean_drift_angle;
  LinearFit variance_fit;  // component_variance against t
  double max_fit_residual = 0;
};

/// Integrates config.n_paths independent paths. Path p draws from an engine
/// seeded with derive_seed(config.seed, p).
PathStats run_paths(const PathConfig& config);

/// Operator-norm deviation of (1/l) sum_i (u_i.J)^2 from J(J+1)/3.
double grouped_isotropy_check(const SpinSystem& sys, std::span<const Direction> directions);

/// Unitary factor U of the restricted polar form K = U exp(alpha n.J).
Matrix polar_unitary(const Matrix& kraus);

/// Angle of the SO(3) rotation represented by the unitary `u`.
double rotation_angle(const SpinSystem& sys, const Matrix& u);

}  // namespace weakscs
