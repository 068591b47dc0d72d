#include "weakscs/kraus_path.hpp"

#include <cmath>

#include "weakscs/errors.hpp"
#include "weakscs/parallel.hpp"
#include "weakscs/seeding.hpp"

namespace weakscs {

void PathConfig::validate() const {
  if (n_qubits < 1) throw ConfigError("n_qubits", "must be at least 1");
  if (!std::isfinite(kappa) || kappa <= 0) throw ConfigError("kappa", "must be positive");
  if (!std::isfinite(delta_t) || delta_t <= 0) throw ConfigError("delta_t", "must be positive");
  if (!std::isfinite(total_time) || total_time < 0) throw ConfigError("total_time", "must be nonnegative");
  const double ratio = total_time / delta_t;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("total_time", "must be a multiple of delta_t");
  }
  if (n_paths < 1) throw ConfigError("n_paths", "must be at least 1");
  if (record_every < 1) throw ConfigError("record_every", "must be at least 1");
}

long PathConfig::n_steps() const { return std::lround(total_time / delta_t); }

Vec3 sample_mu(Rng& rng, const PathConfig& config) {
  const double kdt = config.kappa * config.delta_t;
  const double variance = config.mode == MuVarianceMode::kThird ? 1.0 / (3.0 * kdt) : 1.0 / kdt;
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  const double x = normal(rng);
  const double y = normal(rng);
  const double z = normal(rng);
  return {x, y, z};
}

void step_path(const SpinSystem& sys, KrausAccumulator& path, const Vec3& mu, const PathConfig& config) {
  const double magnitude = mu.norm();
  if (magnitude == 0.0) return;
  const ComponentBasis basis = sys.rotated_basis(Direction::normalized(mu));
  const double s = 0.5 * config.kappa * config.delta_t * magnitude;
  const double top = s * sys.j();
  const RealVector factors = (s * basis.eigenvalues.array() - top).exp();
  path.accumulate_diagonal(basis, factors, top);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ConfigError("fit", "need at least two matching points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

Matrix polar_unitary(const Matrix& kraus) {
  const Matrix effect = kraus.adjoint() * kraus;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (effect + effect.adjoint()));
  if (solver.info() != Eigen::Success) throw EigenSolverError("polar decomposition failed");
  const RealVector inv_sqrt = solver.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return kraus * solver.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

double rotation_angle(const SpinSystem& sys, const Matrix& u) {
  const double j = sys.j();
  const double norm = j * (j + 1) * (2 * j + 1) / 3.0;  // Tr(J_a^2)
  double trace = 0;
  for (int a = 0; a < 3; ++a) {
    trace += (sys[a] * u * sys[a] * u.adjoint()).trace().real() / norm;
  }
  return std::acos(std::clamp(0.5 * (trace - 1.0), -1.0, 1.0));
}

double grouped_isotropy_check(const SpinSystem& sys, std::span<const Direction> directions) {
  if (directions.empty()) throw ConfigError("directions", "need at least one direction");
  const int d = sys.dim();
  Matrix average = Matrix::Zero(d, d);
  for (const Direction& u : directions) {
    const Matrix ju = sys.component(u);
    average.noalias() += ju * ju;
  }
  average /= static_cast<double>(directions.size());
  const double j = sys.j();
  average.diagonal().array() -= j * (j + 1) / 3.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (average + average.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

PathStats run_paths(const PathConfig& config) {
  config.validate();
  const SpinSystem sys(config.n_qubits);
  const long n_steps = config.n_steps();

  std::vector<long> record_steps;
  for (long s = config.record_every; s <= n_steps; s += config.record_every) record_steps.push_back(s);
  if (n_steps > 0 && (record_steps.empty() || record_steps.back() != n_steps)) record_steps.push_back(n_steps);

  PathStats stats;
  const std::size_t n_times = record_steps.size();
  for (long s : record_steps) stats.times.push_back(s * config.delta_t);
  stats.points.assign(n_times, std::vector<PathPoint>(config.n_paths));

  parallel_for(static_cast<std::size_t>(config.n_paths), config.workers, [&](std::size_t p) {
    Rng rng(derive_seed(config.seed, p));
    KrausAccumulator path(sys.dim());
    Matrix previous_unitary;
    std::size_t next_point = 0;
    for (long s = 1; s <= n_steps; ++s) {
      const bool record = next_point < n_times && record_steps[next_point] == s;
      const bool before_record = next_point < n_times && record_steps[next_point] == s + 1;
      if (record && s == 1) previous_unitary = Matrix::Identity(sys.dim(), sys.dim());
      step_path(sys, path, sample_mu(rng, config), config);
      if (before_record) previous_unitary = polar_unitary(path.matrix());
      if (record) {
        const PolarExtract polar = extract_polar(sys, povm_element(path));
        const Matrix unitary = polar_unitary(path.matrix());
        PathPoint& point = stats.points[next_point][p];
        point.alpha = polar.alpha;
        point.axis = polar.axis.vec();
        point.alpha_vector = polar.alpha * polar.axis.vec();
        point.fit_residual = polar.fit_residual;
        point.drift_angle = rotation_angle(sys, previous_unitary.adjoint() * unitary);
        ++next_point;
      }
    }
  });

  const double n = config.n_paths;
  for (std::size_t t = 0; t < n_times; ++t) {
    Vec3 sum = Vec3::Zero(), sum_sq = Vec3::Zero();
    double a = 0, a2 = 0, drift = 0;
    for (const PathPoint& point : stats.points[t]) {
      sum += point.alpha_vector;
      sum_sq += point.alpha_vector.cwiseAbs2();
      a += point.alpha;
      a2 += point.alpha * point.alpha;
      drift += point.drift_angle;
      stats.max_fit_residual = std::max(stats.max_fit_residual, point.fit_residual);
    }
    const Vec3 mean = sum / n;
    // Unbiased per-component variance, averaged over the three components.
    const Vec3 var = (sum_sq - n * mean.cwiseAbs2()) / std::max(1.0, n - 1);
    stats.component_mean.push_back(mean.mean());
    stats.component_variance.push_back(var.mean());
    stats.mean_alpha.push_back(a / n);
    stats.mean_square_alpha.push_back(a2 / n);
    stats.alpha_variance.push_back((a2 - a * a / n) / std::max(1.0, n - 1));
    stats.mean_drift_angle.push_back(drift / n);
  }
  if (n_times >= 2) stats.variance_fit = fit_line(stats.times, stats.component_variance);
  return stats;
}

}  // namespace weakscs
