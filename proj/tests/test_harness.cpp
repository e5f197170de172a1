// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phaselab/harness.hpp"
#include "phaselab/solvers.hpp"

using namespace phaselab;

namespace {

ExperimentConfig base_config() {
  ExperimentConfig config;
  config.dims = {{10, 200}};
  config.fractions = {0.02};
  config.model = MeasurementModel(2);
  config.noise.noise_model = NoiseModel::adversarial_large;
  config.noise.scale = 1.0;
  config.solver.method = Method::polyak;
  config.solver.max_iters = 500;
  config.solver.fstar_mode = FStarMode::known;
  config.trials = 3;
  config.master_seed = 12345;
  config.success_tol = 1e-5;
  return config;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

bool records_equal_modulo_walltime(const TrialRecord& a, const TrialRecord& b) {
  return a.n == b.n && a.m == b.m && a.s == b.s && a.trial == b.trial && a.seed == b.seed &&
         a.success == b.success && a.final_dist == b.final_dist && a.final_obj == b.final_obj &&
         a.residual_l0 == b.residual_l0 && a.l0_coincides == b.l0_coincides &&
         a.iterations == b.iterations;
}

}  // namespace

TEST_CASE("trial seeds separate cells and trials") {
  const std::uint64_t base = trial_seed(1, 10, 200, 0.02, 0);
  CHECK(base != trial_seed(1, 10, 200, 0.02, 1));
  CHECK(base != trial_seed(1, 10, 201, 0.02, 0));
  CHECK(base != trial_seed(1, 11, 200, 0.02, 0));
  CHECK(base != trial_seed(1, 10, 200, 0.021, 0));
  CHECK(base != trial_seed(2, 10, 200, 0.02, 0));
  CHECK(base == trial_seed(1, 10, 200, 0.02, 0));
}

TEST_CASE("run_trial is deterministic") {
  const ExperimentConfig config = base_config();
  const Cell cell{10, 200, 0.02};
  const TrialRecord a = run_trial(config, cell, 1);
  const TrialRecord b = run_trial(config, cell, 1);
  CHECK(records_equal_modulo_walltime(a, b));
}

TEST_CASE("noiseless trials succeed with near-zero objective") {
  ExperimentConfig config = base_config();
  config.dims = {{5, 50}};
  config.fractions = {0.0};
  const Cell cell{5, 50, 0.0};
  int successes = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const TrialRecord r = run_trial(config, cell, trial);
    if (r.success) {
      ++successes;
      CHECK(r.l0_coincides);  // residual l0 <= floor(s*m) = 0 at the solution
      // Objective collapses to rounding noise relative to the measurement mass.
      CorruptionSpec spec = config.noise;
      spec.fraction = 0.0;
      const ProblemInstance inst = plant_instance(cell.m, cell.n, config.model, spec, r.seed);
      CHECK(r.final_obj <= 1e-8 * inst.b.values.cwiseAbs().sum());
    }
  }
  CHECK(successes >= 48);
}

TEST_CASE("successful trials witness the l0/l1 coincidence") {
  const ExperimentConfig config = base_config();
  const Cell cell{10, 200, 0.02};
  for (int trial = 0; trial < 10; ++trial) {
    const TrialRecord r = run_trial(config, cell, trial);
    if (r.success) {
      CHECK(r.residual_l0 <= 4);  // floor(0.02 * 200)
      CHECK(r.l0_coincides);
    }
  }
}

TEST_CASE("success flag is consistent with the recomputed distance") {
  const ExperimentConfig config = base_config();
  const Cell cell{10, 200, 0.02};
  const TrialRecord r = run_trial(config, cell, 2);

  // Replay the trial from its seed and recompute the distance.
  CorruptionSpec spec = config.noise;
  spec.fraction = cell.s;
  const ProblemInstance inst = plant_instance(cell.m, cell.n, config.model, spec, r.seed);
  SolverConfig solver = config.solver;
  solver.tol_dist = 1e-5 * config.success_tol * inst.xstar.norm();  // run_trial's polish rule
  solver.fstar_value = eval_objective(inst.A, inst.b, inst.xstar);
  const SolveTrace trace = solve(inst, solver, spectral_init(inst.A, inst.b));
  CHECK(dist_to_sign_pair(trace.final_x, inst.xstar) == r.final_dist);
  CHECK(r.success == (r.final_dist <= config.success_tol * inst.xstar.norm()));
}

TEST_CASE("run_grid with one cell and one trial wraps run_trial") {
  ExperimentConfig config = base_config();
  config.trials = 1;
  const GridResult grid = run_grid(config);
  REQUIRE(grid.cells.size() == 1);
  const CellResult& c = grid.cells.front();
  CHECK(c.trials == 1);
  REQUIRE(c.records.size() == 1);
  const TrialRecord direct = run_trial(config, c.cell, 0);
  CHECK(records_equal_modulo_walltime(c.records.front(), direct));
  CHECK(c.rate == (c.records.front().success ? 1.0 : 0.0));
}

TEST_CASE("serial and parallel grids write identical CSV bytes") {
  TempDir dir("phaselab_test_grid");
  ExperimentConfig config = base_config();
  config.dims = {{8, 120}, {10, 200}};
  config.fractions = {0.0, 0.05};
  config.trials = 4;

  config.threads = 1;
  const GridResult serial = run_grid(config);
  write_results(serial, dir.file("serial.csv"), dir.file("serial.json"));

  config.threads = 8;
  const GridResult parallel = run_grid(config);
  write_results(parallel, dir.file("parallel.csv"), dir.file("parallel.json"));

  CHECK(slurp(dir.file("serial.csv")) == slurp(dir.file("parallel.csv")));
}

TEST_CASE("reruns are byte-identical up to the manifest timestamp") {
  TempDir dir("phaselab_test_rerun");
  ExperimentConfig config = base_config();
  config.trials = 2;

  const GridResult a = run_grid(config);
  write_results(a, dir.file("a.csv"), dir.file("a.json"));
  const GridResult b = run_grid(config);
  write_results(b, dir.file("b.csv"), dir.file("b.json"));

  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));

  nlohmann::json ja = nlohmann::json::parse(slurp(dir.file("a.json")));
  nlohmann::json jb = nlohmann::json::parse(slurp(dir.file("b.json")));
  CHECK(ja.contains("timestamp"));
  ja.erase("timestamp");
  jb.erase("timestamp");
  CHECK(ja == jb);
  CHECK(ja.at("cells").size() == 1);
  CHECK(ja.at("cells")[0].at("seed_list").size() == 2);
}

TEST_CASE("empty grid writes a header-only CSV") {
  TempDir dir("phaselab_test_empty");
  GridResult grid;
  grid.config = base_config();
  write_results(grid, dir.file("empty.csv"), dir.file("empty.json"));
  CHECK(slurp(dir.file("empty.csv")) == "n,m,s,trials,successes,rate,mean_final_dist,mean_iters\n");
}

TEST_CASE("rate column is the exact shortest-round-trip quotient") {
  TempDir dir("phaselab_test_rate");
  ExperimentConfig config = base_config();
  config.dims = {{5, 60}};
  config.fractions = {0.0};
  config.trials = 3;
  const GridResult grid = run_grid(config);
  write_results(grid, dir.file("r.csv"), dir.file("r.json"));

  const std::string csv = slurp(dir.file("r.csv"));
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  REQUIRE(std::getline(lines, row));
  std::vector<std::string> fields;
  std::istringstream fs(row);
  std::string field;
  while (std::getline(fs, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() == 8);
  const CellResult& c = grid.cells.front();
  CHECK(fields[5] == format_double(static_cast<double>(c.successes) /
                                   static_cast<double>(c.trials)));
  // Shortest round trip: parsing the field recovers the double exactly.
  CHECK(std::stod(fields[6]) == c.mean_final_dist);
}

TEST_CASE("success rate is nonincreasing in s up to 2/trials slack") {
  // Grid calibrated to straddle the transition at this oversampling.
  ExperimentConfig config = base_config();
  config.dims = {{10, 80}};
  config.fractions = {0.0, 0.1, 0.25, 0.35, 0.45};
  config.trials = 10;
  config.threads = 4;
  const GridResult grid = run_grid(config);
  REQUIRE(grid.cells.size() == 5);
  const double slack = 2.0 / static_cast<double>(config.trials);
  for (std::size_t i = 1; i < grid.cells.size(); ++i) {
    CHECK(grid.cells[i].rate <= grid.cells[i - 1].rate + slack);
  }
  // The grid straddles the transition: easy end succeeds, hard end fails.
  CHECK(grid.cells.front().rate >= 0.8);
  CHECK(grid.cells.back().rate <= 0.5);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig config = base_config();
  config.dims = {{10, 200}, {20, 600}};
  config.fractions = {0.0, 0.1};
  config.threads = 4;
  const nlohmann::json j = experiment_config_to_json(config);
  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(back.dims == config.dims);
  CHECK(back.fractions == config.fractions);
  CHECK(back.model.p == config.model.p);
  CHECK(back.trials == config.trials);
  CHECK(back.master_seed == config.master_seed);
  CHECK(back.success_tol == config.success_tol);
  CHECK(back.threads == config.threads);
  CHECK(to_string(back.noise.noise_model) == to_string(config.noise.noise_model));
  CHECK(to_string(back.solver.method) == to_string(config.solver.method));
}

TEST_CASE("config validation rejects bad grids") {
  ExperimentConfig config = base_config();
  config.dims.clear();
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = base_config();
  config.fractions = {1.0};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = base_config();
  config.trials = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = base_config();
  config.success_tol = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("format_double is shortest round trip") {
  for (double v : {0.0, 1.0, 0.1, 1e-5, 2.0 / 3.0, 123456.789, 1e300, -3.5e-12}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
}
