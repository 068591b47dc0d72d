// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "weakscs/continuous.hpp"
#include "weakscs/errors.hpp"
#include "weakscs/kraus_path.hpp"
#include "weakscs/runner.hpp"
#include "weakscs/sequential.hpp"
#include "weakscs/weak_measurement.hpp"

using namespace weakscs;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs `body` and reports it; exceptions count as failures.
void criterion(const std::string& name, const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, " [%.1fs]", seconds);
  report(name, pass, detail + buf);
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

fs::path out_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("weakscs_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool coherency_convergence(std::string& detail) {
  ExperimentConfig c = default_config(ExperimentKind::kSequential);
  c.n_qubits = 50;
  c.kappa_dt = 1e-4;
  c.n_steps = 5000;
  c.n_trajectories = 50;
  c.initial_direction = Vec3(0, 0, 1);
  c.polar_diagnostics = false;
  c.diagnostics_stride = 500;
  c.out_dir = out_dir("coherency");
  const ExperimentResult r = run_experiment(c);
  const auto& row = r.summary["rows"][0];
  const double min_c = row["min_final_coherency"];
  const double median_c = row["median_final_coherency"];
  detail = fmt("N=50 L=5000 50 trajectories: min C=%.6f (>=0.99), median C=%.6f (>=0.999)", min_c, median_c);
  return min_c >= 0.99 && median_c >= 0.999;
}

bool bound_sweep(std::string& detail) {
  ExperimentConfig c = default_config(ExperimentKind::kSweep);
  c.sweep_protocol = SweepProtocol::kSequential;
  c.n_qubits_grid = {2, 6, 10, 20, 30, 50};
  c.n_trajectories = 200;
  c.kappa_dt = 1e-4;
  c.n_steps = 10000;
  c.diagnostics_stride = 10000;
  c.polar_diagnostics = false;
  c.out_dir = out_dir("sweep");
  const ExperimentResult r = run_experiment(c);
  bool pass = true;
  for (const SweepRow& row : r.rows) {
    const double lo = std::max(0.0, row.bound - 3 * row.standard_error);
    const double hi = 2 * row.bound;
    const bool ok = row.mean_infidelity >= lo && row.mean_infidelity <= hi;
    pass = pass && ok;
    detail += fmt("N=%d %.4f+-%.4f in [%.4f, %.4f]%s; ", row.n_qubits, row.mean_infidelity, row.standard_error, lo,
                  hi, ok ? "" : " OUT");
  }
  return pass;
}

bool continuous_parity(std::string& detail) {
  ExperimentConfig c = default_config(ExperimentKind::kSweep);
  c.sweep_protocol = SweepProtocol::kContinuous;
  c.n_qubits_grid = {2, 6, 10};
  c.n_trajectories = 100;
  c.kappa = 1.0;
  c.total_time = 1.0;
  c.dwell = 0.02;
  c.rabi_over_kappa = 20 * std::numbers::pi;
  c.polar_diagnostics = false;
  c.out_dir = out_dir("continuous");
  const ExperimentResult r = run_experiment(c);
  bool pass = true;
  for (const SweepRow& row : r.rows) {
    const double ratio = row.mean_infidelity / row.bound;
    const bool ok = ratio >= 0.5 && ratio <= 2.0;
    pass = pass && ok;
    detail += fmt("N=%d %.4f+-%.4f bound %.4f ratio %.2f%s; ", row.n_qubits, row.mean_infidelity,
                  row.standard_error, row.bound, ratio, ok ? "" : " OUT");
  }
  return pass;
}

bool alpha_diffusion(MuVarianceMode mode, double expected, std::string& detail) {
  PathConfig c;
  c.n_qubits = 4;
  c.kappa = 1.0;
  c.delta_t = 0.01;
  c.total_time = 1.0;
  c.mode = mode;
  c.n_paths = 2000;
  c.record_every = 10;
  c.seed = 2024;
  c.workers = 0;
  const PathStats s = run_paths(c);
  const double rel = s.variance_fit.slope / expected - 1;
  detail = fmt("component variance slope %.5f vs %.5f (%+.1f%%, tol 10%%), R^2=%.5f (>0.99); "
               "Var|alpha| slope %.5f, E[alpha^2](T)=%.4f",
               s.variance_fit.slope, expected, 100 * rel, s.variance_fit.r_squared,
               fit_line(s.times, s.alpha_variance).slope, s.mean_square_alpha.back());
  return std::abs(rel) <= 0.10 && s.variance_fit.r_squared > 0.99;
}

bool resolution(std::string& detail) {
  bool pass = true;
  for (int n : {1, 2, 5, 10}) {
    const int n_theta = std::max(50, n + 2);
    const int n_phi = std::max(100, 2 * n + 2);
    const double dev = scs_resolution_check(SpinSystem(n), n_theta, n_phi);
    pass = pass && dev < 1e-8;
    detail += fmt("N=%d dev=%.2e; ", n, dev);
  }
  return pass;
}

bool closed_form(std::string& detail) {
  double worst = 0;
  for (int n = 1; n <= 50; ++n) {
    const SpinSystem sys(n);
    const Direction axis = Direction::from_angles(0.9, 2.3);
    for (double alpha : {1e-6, 0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0}) {
      const Matrix e = oracle::expm(Complex(2 * alpha) * sys.component(axis));
      worst = std::max(worst, std::abs(coherency_from_alpha(n, alpha) - coherency(sys, e)));
    }
  }
  double worst_asym = 0;
  std::string outside;
  for (int n = 1; n <= 30; ++n) {
    const double start = 0.5 * std::log(100.0 * n);
    double worst_n = 0;
    for (double alpha = start + 1e-9; alpha <= start + 8; alpha += 0.1) {
      const double c = coherency_from_alpha(n, alpha);
      worst_n = std::max(worst_n, std::abs(c - coherency_asymptote(n, alpha)) / c);
    }
    if (worst_n >= 1e-2) outside += fmt(" N=%d:%.2e", n, worst_n);
    worst_asym = std::max(worst_asym, worst_n);
  }
  detail = fmt("N=1..50, alpha up to 5: max |closed form - direct| = %.2e (<1e-10); "
               "N=1..30, 2alpha > ln(100N): max relative asymptote gap = %.2e (<1e-2)",
               worst, worst_asym);
  if (!outside.empty()) detail += "; outside 1%:" + outside;
  return worst < 1e-10 && worst_asym < 1e-2;
}

// Quick property checks; each returns an empty string on success.
bool properties(std::string& detail) {
  std::vector<std::string> failed;
  auto check = [&](const std::string& name, bool ok) {
    if (!ok) failed.push_back(name);
  };
  Rng rng(77);

  {
    const auto [x, w] = oracle::gauss_hermite(80);
    double worst = 0;
    for (int n : {1, 3, 8}) {
      const SpinSystem sys(n);
      const double kdt = 0.05;
      const Direction u = haar_direction(rng);
      Matrix total = Matrix::Zero(sys.dim(), sys.dim());
      for (int i = 0; i < x.size(); ++i) {
        const double m = x[i] / std::sqrt(kdt / 2);
        const Matrix k = kraus_operator(sys, u, m, WeakMeasSettings(kdt));
        total += (w[i] * std::exp(x[i] * x[i]) / std::sqrt(kdt / 2)) * (k.adjoint() * k);
      }
      worst = std::max(worst, (total - Matrix::Identity(sys.dim(), sys.dim())).cwiseAbs().maxCoeff());
    }
    check("povm_completeness", worst < 1e-8);
  }

  {
    const SpinSystem sys(5);
    const WeakMeasSettings s(0.1);
    bool ok = true;
    for (int t = 0; t < 10; ++t) {
      const StateVector psi = sys.coherent_state(haar_direction(rng));
      const Direction u = haar_direction(rng);
      const Direction axis = haar_direction(rng);
      const Matrix rot = sys.rotation(axis, 1.1);
      const Direction ru = Direction::normalized(rotation_matrix(axis, 1.1) * u.vec());
      const OutcomeMixture a = outcome_mixture(sys, psi, u, s);
      const OutcomeMixture b = outcome_mixture(sys, StateVector(rot * psi.amplitudes()), ru, s);
      for (double m : {-3.0, -0.5, 0.0, 1.7, 4.0}) ok = ok && std::abs(a.density(m) - b.density(m)) < 1e-12;
    }
    check("rotational_covariance", ok);
  }

  {
    bool ok = true;
    for (int t = 0; t < 5; ++t) {
      SequentialConfig c;
      c.n_qubits = 6;
      c.kappa_dt = 5e-3;
      c.n_steps = 400;
      c.diagnostics_stride = 40;
      const TrajectoryOutcome out = run_sequential(c, rng);
      ok = ok && std::abs(out.final_state.norm() - 1) < 1e-12;
      Eigen::SelfAdjointEigenSolver<Matrix> solver(out.povm);
      ok = ok && solver.eigenvalues().minCoeff() > -1e-14;
      for (const Snapshot& snap : out.diagnostics) ok = ok && snap.coherency <= 1 + 1e-12 && snap.coherency >= 0;
    }
    check("normalization_psd_coherency", ok);
  }

  {
    const SpinSystem sys(7);
    bool ok = true;
    for (int t = 0; t < 10; ++t) {
      const Matrix e = povm_element(sys.boost(haar_direction(rng), 0.4));
      const Direction n = estimate_direction(sys, e);
      ok = ok && (estimate_direction(sys, 3.0 * e).vec() - n.vec()).norm() < 1e-12;
      const Direction axis = haar_direction(rng);
      const Matrix u = sys.rotation(axis, 2.0);
      ok = ok && (estimate_direction(sys, u * e * u.adjoint()).vec() - rotation_matrix(axis, 2.0) * n.vec()).norm() < 1e-10;
    }
    check("estimator_invariance_equivariance", ok);
  }

  {
    ContinuousConfig c;
    c.n_qubits = 4;
    c.total_time = 0.1;
    c.dwell = 0.01;
    c.seed = 3;
    const TrajectoryOutcome run = run_continuous(c);
    Rng unused(0);
    const TrajectoryOutcome replay = replay_continuous(c, run.initial_direction, run.record, unused);
    check("sse_record_replay", (run.povm - replay.povm).cwiseAbs().maxCoeff() < 1e-10);
  }

  {
    ExperimentConfig c = default_config(ExperimentKind::kSweep);
    c.sweep_protocol = SweepProtocol::kBoth;
    c.n_qubits_grid = {2, 5};
    c.n_trajectories = 4;
    c.n_steps = 200;
    c.diagnostics_stride = 50;
    c.kappa_dt = 1e-3;
    c.total_time = 0.04;
    c.polar_diagnostics = true;
    c.workers = 1;
    c.out_dir = out_dir("rerun_a");
    ExperimentConfig d = c;
    d.workers = 3;
    d.out_dir = out_dir("rerun_b");
    run_experiment(c);
    run_experiment(d);
    check("byte_identical_reruns", slurp(c.out_dir / "trajectories.csv") == slurp(d.out_dir / "trajectories.csv"));
  }

  detail = failed.empty() ? "all property checks hold" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return failed.empty();
}

}  // namespace

int main() {
  criterion("coherency_convergence", coherency_convergence);
  criterion("mp_bound_sweep", bound_sweep);
  criterion("continuous_parity", continuous_parity);
  criterion("alpha_diffusion_third", [](std::string& d) { return alpha_diffusion(MuVarianceMode::kThird, 1.0 / 12, d); });
  criterion("alpha_diffusion_unit", [](std::string& d) { return alpha_diffusion(MuVarianceMode::kUnit, 0.25, d); });
  criterion("scs_resolution_of_identity", resolution);
  criterion("closed_form_coherency", closed_form);
  criterion("property_suites", properties);
  std::printf("%d criteria failed\n", failures);
  return failures > 0 ? 1 : 0;
}
