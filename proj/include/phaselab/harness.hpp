// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "phaselab/instance.hpp"
#include "phaselab/solvers.hpp"

namespace phaselab {

struct Cell {
  Index n = 0;
  Index m = 0;
  double s = 0.0;
};

struct ExperimentConfig {
  std::vector<std::pair<Index, Index>> dims;  // (n, m)
  std::vector<double> fractions;              // corruption fractions s
  MeasurementModel model{2};
  CorruptionSpec noise;  // fraction field overridden per cell
  SolverConfig solver;
  int trials = 1;
  std::uint64_t master_seed = 0;
  double success_tol = 1e-5;  // tau, relative to ||x*||
  std::string out_dir = ".";
  int threads = 1;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

struct TrialRecord {
  Index n = 0;
  Index m = 0;
  double s = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  double final_dist = 0.0;
  double final_obj = 0.0;
  Index residual_l0 = 0;    // zero-threshold 1e-8 * max|b|
  bool l0_coincides = false;  // residual_l0 <= floor(s*m)
  int iterations = 0;
  double wall_time_s = 0.0;  // diagnostic only, excluded from persistence
};

struct CellResult {
  Cell cell;
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  double mean_final_dist = 0.0;
  double mean_iters = 0.0;
  std::vector<TrialRecord> records;
};

struct GridResult {
  std::vector<CellResult> cells;
  ExperimentConfig config;
};

/// Per-trial seed: the 64-bit mixer folded over (master, n, m,
/// round(s*1e6), trial).
std::uint64_t trial_seed(std::uint64_t master, Index n, Index m, double s, int trial);

TrialRecord run_trial(const ExperimentConfig& config, const Cell& cell, int trial_index);

/// All cells x trials; schedule-independent results, parallel over
/// config.threads workers.
GridResult run_grid(const ExperimentConfig& config);

/// CSV with header n,m,s,trials,successes,rate,mean_final_dist,mean_iters
/// (shortest round-trip floats, rows sorted by (n, m, s)) plus a JSON
/// manifest echoing the config, seeds per cell, and an isolated timestamp.
void write_results(const GridResult& grid, const std::string& csv_path,
                   const std::string& manifest_path);

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double value);

}  // namespace phaselab
