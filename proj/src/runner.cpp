#include "weakscs/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>

#include "weakscs/errors.hpp"
#include "weakscs/parallel.hpp"
#include "weakscs/seeding.hpp"

namespace weakscs {

namespace {

using nlohmann::json;

template <class Enum>
Enum parse_enum(const std::string& key, const std::string& value,
                const std::vector<std::pair<std::string, Enum>>& names) {
  for (const auto& [name, e] : names) {
    if (name == value) return e;
  }
  std::string allowed;
  for (const auto& [name, e] : names) allowed += (allowed.empty() ? "" : ", ") + name;
  throw ConfigError(key, "unknown value '" + value + "' (expected one of: " + allowed + ")");
}

const std::vector<std::pair<std::string, ExperimentKind>> kExperimentNames = {
    {"sequential", ExperimentKind::kSequential}, {"continuous", ExperimentKind::kContinuous},
    {"sweep", ExperimentKind::kSweep},           {"krauspath", ExperimentKind::kKrausPath},
    {"validate", ExperimentKind::kValidate}};

const std::vector<std::pair<std::string, SweepProtocol>> kProtocolNames = {
    {"sequential", SweepProtocol::kSequential},
    {"continuous", SweepProtocol::kContinuous},
    {"both", SweepProtocol::kBoth}};

const std::vector<std::pair<std::string, MuVarianceMode>> kModeNames = {{"third", MuVarianceMode::kThird},
                                                                        {"unit", MuVarianceMode::kUnit}};

template <class Enum>
std::string enum_name(Enum e, const std::vector<std::pair<std::string, Enum>>& names) {
  for (const auto& [name, value] : names) {
    if (value == e) return name;
  }
  return "unknown";
}

using Setter = std::function<void(ExperimentConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment",
       [](ExperimentConfig& c, const json& v) {
         c.experiment = parse_enum("experiment", v.get<std::string>(), kExperimentNames);
       }},
      {"master_seed", [](ExperimentConfig& c, const json& v) { c.master_seed = v.get<std::uint64_t>(); }},
      {"n_trajectories", [](ExperimentConfig& c, const json& v) { c.n_trajectories = v.get<int>(); }},
      {"workers", [](ExperimentConfig& c, const json& v) { c.workers = v.get<int>(); }},
      {"out_dir", [](ExperimentConfig& c, const json& v) { c.out_dir = v.get<std::string>(); }},
      {"n_qubits", [](ExperimentConfig& c, const json& v) { c.n_qubits = v.get<int>(); }},
      {"initial_direction",
       [](ExperimentConfig& c, const json& v) {
         if (v.is_null()) {
           c.initial_direction.reset();
           return;
         }
         const auto xyz = v.get<std::vector<double>>();
         if (xyz.size() != 3) throw ConfigError("initial_direction", "expected [x, y, z] or null");
         c.initial_direction = Vec3(xyz[0], xyz[1], xyz[2]);
       }},
      {"polar_diagnostics", [](ExperimentConfig& c, const json& v) { c.polar_diagnostics = v.get<bool>(); }},
      {"diagnostics_stride", [](ExperimentConfig& c, const json& v) { c.diagnostics_stride = v.get<long>(); }},
      {"kappa_dt", [](ExperimentConfig& c, const json& v) { c.kappa_dt = v.get<double>(); }},
      {"n_steps", [](ExperimentConfig& c, const json& v) { c.n_steps = v.get<long>(); }},
      {"kappa", [](ExperimentConfig& c, const json& v) { c.kappa = v.get<double>(); }},
      {"dt",
       [](ExperimentConfig& c, const json& v) {
         if (v.is_null()) {
           c.dt.reset();
         } else {
           c.dt = v.get<double>();
         }
       }},
      {"total_time", [](ExperimentConfig& c, const json& v) { c.total_time = v.get<double>(); }},
      {"rabi_over_kappa", [](ExperimentConfig& c, const json& v) { c.rabi_over_kappa = v.get<double>(); }},
      {"dwell", [](ExperimentConfig& c, const json& v) { c.dwell = v.get<double>(); }},
      {"continuous_stride", [](ExperimentConfig& c, const json& v) { c.continuous_stride = v.get<long>(); }},
      {"n_qubits_grid", [](ExperimentConfig& c, const json& v) { c.n_qubits_grid = v.get<std::vector<int>>(); }},
      {"sweep_protocol",
       [](ExperimentConfig& c, const json& v) {
         c.sweep_protocol = parse_enum("sweep_protocol", v.get<std::string>(), kProtocolNames);
       }},
      {"delta_t", [](ExperimentConfig& c, const json& v) { c.delta_t = v.get<double>(); }},
      {"mu_mode",
       [](ExperimentConfig& c, const json& v) {
         c.mu_mode = parse_enum("mu_mode", v.get<std::string>(), kModeNames);
       }},
      {"path_record_every", [](ExperimentConfig& c, const json& v) { c.path_record_every = v.get<int>(); }},
      {"validate_grid", [](ExperimentConfig& c, const json& v) { c.validate_grid = v.get<std::vector<int>>(); }},
      {"quadrature_theta", [](ExperimentConfig& c, const json& v) { c.quadrature_theta = v.get<int>(); }},
      {"quadrature_phi", [](ExperimentConfig& c, const json& v) { c.quadrature_phi = v.get<int>(); }},
  };
  return table;
}

double mean_of(const std::vector<double>& v) {
  double total = 0;
  for (double x : v) total += x;
  return v.empty() ? 0.0 : total / static_cast<double>(v.size());
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

constexpr const char* kTrajectoryHeader =
    "config_hash,protocol,n_qubits,trajectory_id,seed,step,t_kappa,coherency,alpha,fit_residual,"
    "nhat_x,nhat_y,nhat_z,fidelity\n";

void append_trajectory_rows(std::string& csv, const std::string& hash, const std::string& protocol,
                            int n_qubits, std::size_t id, std::uint64_t seed, const TrajectoryOutcome& t) {
  const std::string prefix = hash + "," + protocol + "," + std::to_string(n_qubits) + "," + std::to_string(id) +
                             "," + std::to_string(seed) + ",";
  for (std::size_t k = 0; k < t.diagnostics.size(); ++k) {
    const Snapshot& s = t.diagnostics[k];
    csv += prefix + std::to_string(s.step) + "," + format_double(s.t_kappa) + "," + format_double(s.coherency) +
           "," + format_double(s.alpha) + "," + format_double(s.fit_residual) + ",";
    if (k + 1 == t.diagnostics.size()) {
      const Vec3& n = t.estimate.direction.vec();
      csv += format_double(n.x()) + "," + format_double(n.y()) + "," + format_double(n.z()) + "," +
             format_double(t.fidelity);
    } else {
      csv += ",,,";
    }
    csv += "\n";
  }
}

json row_to_json(const SweepRow& row) {
  return {{"protocol", row.protocol},
          {"n_qubits", row.n_qubits},
          {"trajectories", row.trajectories},
          {"mean_infidelity", row.mean_infidelity},
          {"standard_error", row.standard_error},
          {"bound", row.bound},
          {"fallback_estimates", row.fallback_estimates}};
}

struct Batch {
  std::string protocol;
  int n_qubits = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<TrajectoryOutcome> outcomes;
};

Batch run_batch(const ExperimentConfig& config, const std::string& protocol, int n_qubits, std::uint64_t tag) {
  Batch batch;
  batch.protocol = protocol;
  batch.n_qubits = n_qubits;
  const auto n = static_cast<std::size_t>(config.n_trajectories);
  batch.seeds.resize(n);
  batch.outcomes.resize(n);
  for (std::size_t i = 0; i < n; ++i) batch.seeds[i] = trajectory_seed(config.master_seed, tag, i);
  if (protocol == "sequential") {
    const SequentialConfig base = config.sequential_config(n_qubits);
    parallel_for(n, config.workers, [&](std::size_t i) {
      SequentialConfig c = base;
      c.seed = batch.seeds[i];
      batch.outcomes[i] = run_sequential(c);
    });
  } else {
    const ContinuousConfig base = config.continuous_config(n_qubits);
    parallel_for(n, config.workers, [&](std::size_t i) {
      ContinuousConfig c = base;
      c.seed = batch.seeds[i];
      batch.outcomes[i] = run_continuous(c);
    });
  }
  return batch;
}

json coherency_summary(const std::vector<TrajectoryOutcome>& outcomes) {
  std::vector<double> finals;
  for (const auto& t : outcomes) finals.push_back(t.diagnostics.back().coherency);
  std::sort(finals.begin(), finals.end());
  if (finals.empty()) return json::object();
  const std::size_t n = finals.size();
  const double median = n % 2 ? finals[n / 2] : 0.5 * (finals[n / 2 - 1] + finals[n / 2]);
  return {{"min_final_coherency", finals.front()},
          {"median_final_coherency", median},
          {"max_final_coherency", finals.back()}};
}

}  // namespace

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::kSequential:
      c.n_qubits = 50;
      c.n_steps = 5000;
      c.n_trajectories = 50;
      break;
    case ExperimentKind::kContinuous:
      c.n_qubits = 10;
      c.n_trajectories = 100;
      break;
    case ExperimentKind::kSweep:
      c.n_trajectories = 400;
      c.diagnostics_stride = c.n_steps;
      c.polar_diagnostics = false;
      break;
    case ExperimentKind::kKrausPath:
      c.n_qubits = 4;
      c.n_trajectories = 2000;
      break;
    case ExperimentKind::kValidate:
      break;
  }
  return c;
}

ExperimentKind parse_experiment(const std::string& name) {
  return parse_enum("experiment", name, kExperimentNames);
}

std::string to_string(ExperimentKind kind) { return enum_name(kind, kExperimentNames); }
std::string to_string(SweepProtocol protocol) { return enum_name(protocol, kProtocolNames); }
std::string to_string(MuVarianceMode mode) { return enum_name(mode, kModeNames); }

void ExperimentConfig::validate() const {
  if (n_trajectories < 1) throw ConfigError("n_trajectories", "must be at least 1");
  if (workers < 0) throw ConfigError("workers", "must be nonnegative");
  if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
  switch (experiment) {
    case ExperimentKind::kSequential:
      sequential_config(n_qubits).validate();
      break;
    case ExperimentKind::kContinuous:
      continuous_config(n_qubits).validate();
      break;
    case ExperimentKind::kSweep:
      if (n_qubits_grid.empty()) throw ConfigError("n_qubits_grid", "must not be empty");
      for (int n : n_qubits_grid) {
        if (n < 1) throw ConfigError("n_qubits_grid", "entries must be at least 1");
        if (sweep_protocol != SweepProtocol::kContinuous) sequential_config(n).validate();
        if (sweep_protocol != SweepProtocol::kSequential) continuous_config(n).validate();
      }
      break;
    case ExperimentKind::kKrausPath:
      path_config().validate();
      break;
    case ExperimentKind::kValidate:
      if (validate_grid.empty()) throw ConfigError("validate_grid", "must not be empty");
      for (int n : validate_grid) {
        if (n < 1) throw ConfigError("validate_grid", "entries must be at least 1");
      }
      if (quadrature_theta < 0) throw ConfigError("quadrature_theta", "must be nonnegative");
      if (quadrature_phi < 0) throw ConfigError("quadrature_phi", "must be nonnegative");
      break;
  }
}

SequentialConfig ExperimentConfig::sequential_config(int n) const {
  SequentialConfig c;
  c.n_qubits = n;
  c.kappa_dt = kappa_dt;
  c.n_steps = n_steps;
  if (initial_direction) c.initial_direction = Direction::normalized(*initial_direction);
  if (diagnostics_stride > std::numeric_limits<int>::max()) {
    throw ConfigError("diagnostics_stride", "too large");
  }
  c.diagnostics_stride = static_cast<int>(diagnostics_stride);
  c.polar_diagnostics = polar_diagnostics;
  c.keep_record = false;
  c.estimate_policy = EstimatePolicy::kRandomFallback;
  return c;
}

ContinuousConfig ExperimentConfig::continuous_config(int n) const {
  ContinuousConfig c;
  c.n_qubits = n;
  c.kappa = kappa;
  c.dt = dt;
  c.total_time = total_time;
  c.rabi_over_kappa = rabi_over_kappa;
  c.dwell = dwell;
  if (initial_direction) c.initial_direction = Direction::normalized(*initial_direction);
  c.diagnostics_stride = continuous_stride;
  c.polar_diagnostics = polar_diagnostics;
  c.keep_record = false;
  c.estimate_policy = EstimatePolicy::kRandomFallback;
  return c;
}

PathConfig ExperimentConfig::path_config() const {
  PathConfig c;
  c.n_qubits = n_qubits;
  c.kappa = kappa;
  c.delta_t = delta_t;
  c.total_time = total_time;
  c.mode = mu_mode;
  c.n_paths = n_trajectories;
  c.record_every = path_record_every;
  c.seed = master_seed;
  c.workers = workers;
  return c;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown configuration key");
    try {
      it->second(base, value);
    } catch (const json::exception& e) {
      throw ConfigError(key, std::string("wrong type: ") + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j, std::move(base));
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["master_seed"] = c.master_seed;
  j["n_trajectories"] = c.n_trajectories;
  j["workers"] = c.workers;
  j["out_dir"] = c.out_dir.string();
  j["n_qubits"] = c.n_qubits;
  j["initial_direction"] =
      c.initial_direction ? json(std::vector<double>{c.initial_direction->x(), c.initial_direction->y(),
                                                     c.initial_direction->z()})
                          : json(nullptr);
  j["polar_diagnostics"] = c.polar_diagnostics;
  j["diagnostics_stride"] = c.diagnostics_stride;
  j["kappa_dt"] = c.kappa_dt;
  j["n_steps"] = c.n_steps;
  j["kappa"] = c.kappa;
  j["dt"] = c.dt ? json(*c.dt) : json(nullptr);
  j["total_time"] = c.total_time;
  j["rabi_over_kappa"] = c.rabi_over_kappa;
  j["dwell"] = c.dwell;
  j["continuous_stride"] = c.continuous_stride;
  j["n_qubits_grid"] = c.n_qubits_grid;
  j["sweep_protocol"] = to_string(c.sweep_protocol);
  j["delta_t"] = c.delta_t;
  j["mu_mode"] = to_string(c.mu_mode);
  j["path_record_every"] = c.path_record_every;
  j["validate_grid"] = c.validate_grid;
  j["quadrature_theta"] = c.quadrature_theta;
  j["quadrature_phi"] = c.quadrature_phi;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("workers");
  j.erase("out_dir");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index) {
  return derive_seed(derive_seed(master_seed, tag), index);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

SweepRow summarize(const std::string& protocol, int n_qubits, const std::vector<TrajectoryOutcome>& outcomes) {
  SweepRow row;
  row.protocol = protocol;
  row.n_qubits = n_qubits;
  row.trajectories = static_cast<int>(outcomes.size());
  row.bound = 1.0 / (n_qubits + 2.0);
  std::vector<double> infidelity;
  for (const auto& t : outcomes) {
    infidelity.push_back(1.0 - t.fidelity);
    if (t.estimate.fallback) ++row.fallback_estimates;
  }
  row.mean_infidelity = mean_of(infidelity);
  if (infidelity.size() > 1) {
    double ss = 0;
    for (double x : infidelity) ss += (x - row.mean_infidelity) * (x - row.mean_infidelity);
    const double n = static_cast<double>(infidelity.size());
    row.standard_error = std::sqrt(ss / (n - 1) / n);
  }
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(config.out_dir);
  const std::string hash = config_hash(config);

  ExperimentResult result;
  json& summary = result.summary;
  summary["experiment"] = to_string(config.experiment);
  summary["config_hash"] = hash;
  summary["master_seed"] = config.master_seed;

  const auto config_path = config.out_dir / "config.json";
  write_file(config_path, to_json(config).dump(2) + "\n");
  result.files.push_back(config_path);

  switch (config.experiment) {
    case ExperimentKind::kSequential:
    case ExperimentKind::kContinuous:
    case ExperimentKind::kSweep: {
      std::vector<std::pair<std::string, int>> jobs;
      if (config.experiment == ExperimentKind::kSweep) {
        for (int n : config.n_qubits_grid) {
          if (config.sweep_protocol != SweepProtocol::kContinuous) jobs.emplace_back("sequential", n);
          if (config.sweep_protocol != SweepProtocol::kSequential) jobs.emplace_back("continuous", n);
        }
      } else {
        jobs.emplace_back(to_string(config.experiment), config.n_qubits);
      }
      std::string csv = kTrajectoryHeader;
      json rows = json::array();
      for (const auto& [protocol, n] : jobs) {
        // Tag = N for sequential, N + 2^20 for continuous.
        const std::uint64_t tag = static_cast<std::uint64_t>(n) + (protocol == "continuous" ? (1ULL << 20) : 0);
        const Batch batch = run_batch(config, protocol, n, tag);
        for (std::size_t i = 0; i < batch.outcomes.size(); ++i) {
          append_trajectory_rows(csv, hash, protocol, n, i, batch.seeds[i], batch.outcomes[i]);
        }
        SweepRow row = summarize(protocol, n, batch.outcomes);
        json row_json = row_to_json(row);
        row_json.update(coherency_summary(batch.outcomes));
        if (protocol == "continuous") {
          const ContinuousPlan p = plan(config.continuous_config(n));
          row_json["dt"] = p.dt;
          row_json["dwell_snapped"] = p.dwell;
          row_json["dwell_shift"] = p.dwell_shift;
        }
        rows.push_back(row_json);
        result.rows.push_back(row);
      }
      summary["rows"] = rows;
      const auto path = config.out_dir / "trajectories.csv";
      write_file(path, csv);
      result.files.push_back(path);
      break;
    }
    case ExperimentKind::kKrausPath: {
      const PathConfig pc = config.path_config();
      const PathStats stats = run_paths(pc);
      std::string csv =
          "config_hash,path_id,seed,t_kappa,alpha,alpha_x,alpha_y,alpha_z,drift_angle,fit_residual\n";
      for (std::size_t p = 0; p < static_cast<std::size_t>(pc.n_paths); ++p) {
        const std::string prefix = hash + "," + std::to_string(p) + "," + std::to_string(derive_seed(pc.seed, p)) + ",";
        for (std::size_t t = 0; t < stats.times.size(); ++t) {
          const PathPoint& pt = stats.points[t][p];
          csv += prefix + format_double(stats.times[t] * pc.kappa) + "," + format_double(pt.alpha) + "," +
                 format_double(pt.alpha_vector.x()) + "," + format_double(pt.alpha_vector.y()) + "," +
                 format_double(pt.alpha_vector.z()) + "," + format_double(pt.drift_angle) + "," +
                 format_double(pt.fit_residual) + "\n";
        }
      }
      const auto path = config.out_dir / "paths.csv";
      write_file(path, csv);
      result.files.push_back(path);
      std::vector<double> t_kappa;
      for (double t : stats.times) t_kappa.push_back(t * pc.kappa);
      summary["mu_mode"] = to_string(pc.mode);
      summary["t_kappa"] = t_kappa;
      summary["component_variance"] = stats.component_variance;
      summary["component_mean"] = stats.component_mean;
      summary["mean_alpha"] = stats.mean_alpha;
      summary["alpha_variance"] = stats.alpha_variance;
      summary["mean_square_alpha"] = stats.mean_square_alpha;
      summary["mean_drift_angle"] = stats.mean_drift_angle;
      summary["variance_slope_per_kappa"] = stats.variance_fit.slope / pc.kappa;
      summary["variance_r_squared"] = stats.variance_fit.r_squared;
      summary["expected_slope_per_kappa"] = pc.mode == MuVarianceMode::kThird ? 1.0 / 12.0 : 0.25;
      summary["max_fit_residual"] = stats.max_fit_residual;
      break;
    }
    case ExperimentKind::kValidate: {
      std::string csv = "config_hash,n_qubits,n_theta,n_phi,deviation\n";
      json rows = json::array();
      for (int n : config.validate_grid) {
        const int n_theta = config.quadrature_theta > 0 ? config.quadrature_theta : std::max(50, n + 2);
        const int n_phi = config.quadrature_phi > 0 ? config.quadrature_phi : std::max(100, 2 * n + 2);
        const double deviation = scs_resolution_check(SpinSystem(n), n_theta, n_phi);
        csv += hash + "," + std::to_string(n) + "," + std::to_string(n_theta) + "," + std::to_string(n_phi) + "," +
               format_double(deviation) + "\n";
        rows.push_back({{"n_qubits", n}, {"n_theta", n_theta}, {"n_phi", n_phi}, {"deviation", deviation}});
      }
      summary["rows"] = rows;
      const auto path = config.out_dir / "validation.csv";
      write_file(path, csv);
      result.files.push_back(path);
      break;
    }
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary["runtime"] = {{"seconds", seconds}, {"workers", resolve_workers(config.workers)}};
  const auto summary_path = config.out_dir / "summary.json";
  write_file(summary_path, summary.dump(2) + "\n");
  result.files.push_back(summary_path);
  return result;
}

}  // namespace weakscs
