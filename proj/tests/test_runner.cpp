#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "weakscs/errors.hpp"
#include "weakscs/parallel.hpp"
#include "weakscs/runner.hpp"
#include "weakscs/seeding.hpp"

using namespace weakscs;
namespace fs = std::filesystem;

namespace {

// Reference SplitMix64 generator; derive_seed(m, i) is its (i+1)-th output
// when seeded with m.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("weakscs_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string field_of(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

ExperimentConfig tiny_sequential(const fs::path& out) {
  ExperimentConfig c = default_config(ExperimentKind::kSequential);
  c.n_qubits = 3;
  c.n_steps = 40;
  c.kappa_dt = 1e-2;
  c.diagnostics_stride = 15;
  c.n_trajectories = 4;
  c.out_dir = out;
  return c;
}

int run_cli(const std::string& args, const fs::path& stderr_path = "/dev/null") {
  const std::string cmd = std::string(WEAKSCS_CLI) + " " + args + " > /dev/null 2> " + stderr_path.string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Seeding, MatchesSplitMix64Reference) {
  SplitMix64 gen{0};
  EXPECT_EQ(gen.next(), 0xE220A8397B1DCDAFULL);
  for (std::uint64_t master : {0ULL, 1ULL, 42ULL, 0xFFFFFFFFFFFFFFFFULL}) {
    SplitMix64 ref{master};
    for (std::uint64_t i = 0; i < 1000; ++i) EXPECT_EQ(derive_seed(master, i), ref.next());
  }
}

TEST(Seeding, NoCollisionsOverAMillionIndices) {
  std::vector<std::uint64_t> seeds(1000000);
  for (std::uint64_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(7, i);
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
}

TEST(Seeding, TrajectoryStreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  std::size_t total = 0;
  for (std::uint64_t n = 1; n <= 60; ++n) {
    for (std::uint64_t tag : {n, n + (std::uint64_t{1} << 20)}) {
      for (std::uint64_t i = 0; i < 500; ++i) {
        seen.insert(trajectory_seed(1, tag, i));
        ++total;
      }
    }
  }
  EXPECT_EQ(seen.size(), total);
}

TEST(Parallel, CoversEveryIndexAndRethrows) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 1000);
  EXPECT_THROW(parallel_for(100, 3, [](std::size_t i) {
                 if (i == 57) throw UnderflowError("boom");
               }),
               UnderflowError);
  EXPECT_EQ(resolve_workers(5), 5);
  EXPECT_GE(resolve_workers(0), 1);
}

TEST(Config, UnknownKeysAndWrongTypesNameTheField) {
  EXPECT_EQ(field_of({{"n_qubits", 4}}), "");
  EXPECT_EQ(field_of({{"n_qbits", 4}}), "n_qbits");
  EXPECT_EQ(field_of({{"n_qubits", "four"}}), "n_qubits");
  EXPECT_EQ(field_of({{"kappa_dt", true}}), "kappa_dt");
  EXPECT_EQ(field_of({{"experiment", "tomography"}}), "experiment");
  EXPECT_EQ(field_of({{"mu_mode", "half"}}), "mu_mode");
  EXPECT_EQ(field_of({{"initial_direction", {1, 0}}}), "initial_direction");
  EXPECT_EQ(field_of(nlohmann::json::array()), "config");
}

TEST(Config, ValidationNamesField) {
  auto invalid = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  EXPECT_EQ(invalid([](ExperimentConfig&) {}), "");
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.n_trajectories = 0; }), "n_trajectories");
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.n_qubits = 0; }), "n_qubits");
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.kappa_dt = 0; }), "kappa_dt");
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.workers = -1; }), "workers");
  EXPECT_EQ(invalid([](ExperimentConfig& c) {
              c.experiment = ExperimentKind::kSweep;
              c.n_qubits_grid = {};
            }),
            "n_qubits_grid");
  EXPECT_EQ(invalid([](ExperimentConfig& c) {
              c.experiment = ExperimentKind::kKrausPath;
              c.total_time = 0.015;
            }),
            "total_time");
}

TEST(Config, JsonRoundTripAndHash) {
  ExperimentConfig c = default_config(ExperimentKind::kSweep);
  c.initial_direction = Vec3(0, 0, 1);
  c.dt = 1e-5;
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);

  ExperimentConfig other = c;
  other.workers = 7;
  other.out_dir = "elsewhere";
  EXPECT_EQ(config_hash(other), config_hash(c));
  other.master_seed = 2;
  EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Config, LoadFromFile) {
  const fs::path dir = scratch("load");
  fs::create_directories(dir);
  std::ofstream(dir / "good.json") << R"({"experiment": "krauspath", "n_qubits": 6, "mu_mode": "unit"})";
  std::ofstream(dir / "bad.json") << R"({"experiment": )";
  const ExperimentConfig c = load_config(dir / "good.json");
  EXPECT_EQ(c.experiment, ExperimentKind::kKrausPath);
  EXPECT_EQ(c.n_qubits, 6);
  EXPECT_EQ(c.mu_mode, MuVarianceMode::kUnit);
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Defaults, PerExperiment) {
  const ExperimentConfig seq = default_config(ExperimentKind::kSequential);
  EXPECT_EQ(seq.n_qubits, 50);
  EXPECT_EQ(seq.n_steps, 5000);
  EXPECT_EQ(seq.n_trajectories, 50);
  const ExperimentConfig sweep = default_config(ExperimentKind::kSweep);
  EXPECT_EQ(sweep.n_qubits_grid, (std::vector<int>{2, 6, 10, 20, 30, 50}));
  const ExperimentConfig path = default_config(ExperimentKind::kKrausPath);
  EXPECT_EQ(path.n_qubits, 4);
  EXPECT_EQ(path.n_trajectories, 2000);
  EXPECT_DOUBLE_EQ(path.delta_t, 0.01);
  EXPECT_EQ(parse_experiment("validate"), ExperimentKind::kValidate);
  EXPECT_THROW(parse_experiment("nope"), ConfigError);
}

TEST(Format, DoublesAndNan) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::nan("")), "");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Summarize, MeanAndStandardError) {
  std::vector<TrajectoryOutcome> outcomes(4);
  const double fid[] = {1.0, 0.5, 0.75, 0.75};
  for (int i = 0; i < 4; ++i) outcomes[i].fidelity = fid[i];
  outcomes[2].estimate.fallback = true;
  const SweepRow row = summarize("sequential", 6, outcomes);
  EXPECT_DOUBLE_EQ(row.mean_infidelity, 0.25);
  EXPECT_NEAR(row.standard_error, std::sqrt((0.0625 + 0.0625) / 3 / 4), 1e-15);
  EXPECT_DOUBLE_EQ(row.bound, 0.125);
  EXPECT_EQ(row.fallback_estimates, 1);
}

TEST(Output, TrajectoryCsvLayout) {
  const fs::path out = scratch("csv");
  const ExperimentConfig c = tiny_sequential(out);
  const ExperimentResult result = run_experiment(c);
  const auto rows = read_csv(out / "trajectories.csv");
  ASSERT_FALSE(rows.empty());
  const std::vector<std::string> header = {"config_hash", "protocol", "n_qubits", "trajectory_id", "seed",
                                           "step", "t_kappa", "coherency", "alpha", "fit_residual",
                                           "nhat_x", "nhat_y", "nhat_z", "fidelity"};
  EXPECT_EQ(rows[0], header);
  // Snapshots at steps 0, 15, 30, 40 for each of 4 trajectories.
  ASSERT_EQ(rows.size(), 1u + 4 * 4);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    ASSERT_EQ(rows[r].size(), header.size()) << r;
    EXPECT_EQ(rows[r][0], config_hash(c));
    EXPECT_EQ(rows[r][1], "sequential");
    EXPECT_EQ(rows[r][2], "3");
    const bool last = rows[r][5] == "40";
    EXPECT_EQ(rows[r][13].empty(), !last);
    EXPECT_EQ(std::stoull(rows[r][4]), trajectory_seed(c.master_seed, 3, std::stoul(rows[r][3])));
  }
  const nlohmann::json summary = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["config_hash"], config_hash(c));
  EXPECT_EQ(summary["rows"][0]["trajectories"], 4);
  EXPECT_TRUE(summary["runtime"].contains("seconds"));
  const nlohmann::json written = nlohmann::json::parse(slurp(out / "config.json"));
  EXPECT_EQ(config_hash(config_from_json(written)), config_hash(c));
  EXPECT_EQ(result.rows.size(), 1u);
}

TEST(Output, PolarOffLeavesAlphaEmpty) {
  const fs::path out = scratch("nopolar");
  ExperimentConfig c = tiny_sequential(out);
  c.polar_diagnostics = false;
  run_experiment(c);
  const auto rows = read_csv(out / "trajectories.csv");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_TRUE(rows[r][8].empty());
    EXPECT_TRUE(rows[r][9].empty());
  }
}

TEST(Output, ByteIdenticalAcrossWorkerCounts) {
  ExperimentConfig a = tiny_sequential(scratch("w1"));
  a.workers = 1;
  ExperimentConfig b = a;
  b.workers = 4;
  b.out_dir = scratch("w4");
  run_experiment(a);
  run_experiment(b);
  EXPECT_EQ(slurp(a.out_dir / "trajectories.csv"), slurp(b.out_dir / "trajectories.csv"));

  ExperimentConfig p = default_config(ExperimentKind::kKrausPath);
  p.n_trajectories = 12;
  p.total_time = 0.1;
  p.workers = 1;
  p.out_dir = scratch("p1");
  ExperimentConfig q = p;
  q.workers = 3;
  q.out_dir = scratch("p3");
  run_experiment(p);
  run_experiment(q);
  const std::string csv = slurp(p.out_dir / "paths.csv");
  EXPECT_EQ(csv, slurp(q.out_dir / "paths.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "config_hash,path_id,seed,t_kappa,alpha,alpha_x,alpha_y,alpha_z,drift_angle,fit_residual");
}

TEST(Output, ContinuousAndSweepRows) {
  ExperimentConfig c = default_config(ExperimentKind::kSweep);
  c.sweep_protocol = SweepProtocol::kBoth;
  c.n_qubits_grid = {1, 2};
  c.n_trajectories = 3;
  c.n_steps = 50;
  c.diagnostics_stride = 50;
  c.kappa_dt = 1e-2;
  c.total_time = 0.04;
  c.out_dir = scratch("sweep");
  const ExperimentResult result = run_experiment(c);
  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_EQ(result.rows[1].protocol, "continuous");
  EXPECT_TRUE(result.summary["rows"][1].contains("dwell_shift"));
  const auto rows = read_csv(c.out_dir / "trajectories.csv");
  std::set<std::string> protocols;
  for (std::size_t r = 1; r < rows.size(); ++r) protocols.insert(rows[r][1]);
  EXPECT_EQ(protocols, (std::set<std::string>{"sequential", "continuous"}));
}

TEST(Output, ValidationCsv) {
  ExperimentConfig c = default_config(ExperimentKind::kValidate);
  c.validate_grid = {1, 3};
  c.out_dir = scratch("validate");
  run_experiment(c);
  const auto rows = read_csv(c.out_dir / "validation.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"config_hash", "n_qubits", "n_theta", "n_phi", "deviation"}));
  EXPECT_LT(std::stod(rows[2][4]), 1e-8);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path err = dir / "stderr.txt";
  EXPECT_EQ(run_cli("validate --grid 1,2 --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "validation.csv"));

  EXPECT_EQ(run_cli("sequential --bogus-flag", err), 2);
  EXPECT_EQ(run_cli("", err), 2);

  std::ofstream(dir / "bad.json") << R"({"n_qbits": 3})";
  EXPECT_EQ(run_cli("sequential --config " + (dir / "bad.json").string(), err), 2);
  const nlohmann::json message = nlohmann::json::parse(slurp(err));
  EXPECT_EQ(message["error"], "config");
  EXPECT_EQ(message["field"], "n_qbits");

  EXPECT_EQ(run_cli("validate --grid 1,x --out " + (dir / "g").string(), err), 2);
  EXPECT_EQ(nlohmann::json::parse(slurp(err))["field"], "grid");

  std::ofstream(dir / "plain_file") << "x";
  EXPECT_EQ(run_cli("validate --grid 1 --out " + (dir / "plain_file" / "sub").string(), err), 3);
  EXPECT_EQ(nlohmann::json::parse(slurp(err))["error"], "io");
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path dir = scratch("cli_override");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"n_qubits": 2, "n_steps": 20, "kappa_dt": 0.01, "n_trajectories": 2, "master_seed": 5})";
  ASSERT_EQ(run_cli("sequential --config " + (dir / "cfg.json").string() + " --seed 9 --out " + (dir / "o").string()), 0);
  const nlohmann::json written = nlohmann::json::parse(slurp(dir / "o" / "config.json"));
  EXPECT_EQ(written["master_seed"], 9);
  EXPECT_EQ(written["n_qubits"], 2);
  EXPECT_EQ(written["n_steps"], 20);
}
