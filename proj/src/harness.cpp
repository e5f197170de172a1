// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#include "phaselab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "phaselab/rng.hpp"

namespace phaselab {

void ExperimentConfig::validate() const {
  if (dims.empty()) throw std::invalid_argument("ExperimentConfig: dims must be nonempty");
  if (fractions.empty()) {
    throw std::invalid_argument("ExperimentConfig: fractions must be nonempty");
  }
  if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  if (!(success_tol > 0.0)) {
    throw std::invalid_argument("ExperimentConfig: success_tol must be positive");
  }
  if (threads < 1) throw std::invalid_argument("ExperimentConfig: threads must be >= 1");
  for (const auto& [n, m] : dims) {
    if (n < 1 || m < 1) throw std::invalid_argument("ExperimentConfig: dims must be >= 1");
  }
  for (double s : fractions) {
    if (!(s >= 0.0 && s < 1.0)) {
      throw std::invalid_argument("ExperimentConfig: fractions must lie in [0, 1)");
    }
  }
  solver.validate();
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  config.dims.clear();
  for (const auto& d : j.at("dims")) {
    if (d.is_array()) {
      config.dims.emplace_back(d.at(0).get<Index>(), d.at(1).get<Index>());
    } else {
      config.dims.emplace_back(d.at("n").get<Index>(), d.at("m").get<Index>());
    }
  }
  config.fractions = j.at("fractions").get<std::vector<double>>();
  config.model = MeasurementModel(j.value("p", 2));
  if (j.contains("noise")) {
    const auto& nj = j.at("noise");
    config.noise.noise_model = noise_model_from_string(nj.value("model", "replace_zero"));
    config.noise.scale = nj.value("scale", 1.0);
  }
  if (j.contains("solver")) {
    const auto& sj = j.at("solver");
    config.solver.method = method_from_string(sj.value("method", "polyak"));
    config.solver.max_iters = sj.value("max_iters", 1000);
    config.solver.tol_obj = sj.value("tol_obj", 0.0);
    config.solver.lambda0 = sj.value("lambda0", 1.0);
    config.solver.decay = sj.value("decay", 0.98);
    config.solver.inner_tol = sj.value("inner_tol", 1e-10);
    config.solver.inner_max_iters = sj.value("inner_max_iters", 0);
    config.solver.prox_t = sj.value("prox_t", 0.0);
    const std::string fstar = sj.value("fstar", "known");
    if (fstar == "known") {
      config.solver.fstar_mode = FStarMode::known;
    } else if (fstar == "zero") {
      config.solver.fstar_mode = FStarMode::zero;
    } else {
      throw std::invalid_argument("ExperimentConfig: fstar must be 'known' or 'zero'");
    }
  }
  config.trials = j.at("trials").get<int>();
  config.master_seed = j.at("master_seed").get<std::uint64_t>();
  config.success_tol = j.value("success_tol", 1e-5);
  config.out_dir = j.value("out_dir", ".");
  config.threads = j.value("threads", 1);
  config.validate();
  return config;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& config) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& [n, m] : config.dims) dims.push_back({{"n", n}, {"m", m}});
  nlohmann::json solver{{"method", to_string(config.solver.method)},
                        {"max_iters", config.solver.max_iters},
                        {"tol_obj", config.solver.tol_obj},
                        {"lambda0", config.solver.lambda0},
                        {"decay", config.solver.decay},
                        {"inner_tol", config.solver.inner_tol},
                        {"inner_max_iters", config.solver.inner_max_iters},
                        {"prox_t", config.solver.prox_t},
                        {"fstar", config.solver.fstar_mode == FStarMode::known ? "known" : "zero"}};
  return {{"dims", dims},
          {"fractions", config.fractions},
          {"p", config.model.p},
          {"noise", {{"model", to_string(config.noise.noise_model)}, {"scale", config.noise.scale}}},
          {"solver", solver},
          {"trials", config.trials},
          {"master_seed", config.master_seed},
          {"success_tol", config.success_tol},
          {"out_dir", config.out_dir},
          {"threads", config.threads}};
}

std::uint64_t trial_seed(std::uint64_t master, Index n, Index m, double s, int trial) {
  std::uint64_t seed = master;
  seed = rng::combine(seed, static_cast<std::uint64_t>(n));
  seed = rng::combine(seed, static_cast<std::uint64_t>(m));
  seed = rng::combine(seed, static_cast<std::uint64_t>(std::llround(s * 1e6)));
  seed = rng::combine(seed, static_cast<std::uint64_t>(trial));
  return seed;
}

TrialRecord run_trial(const ExperimentConfig& config, const Cell& cell, int trial_index) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  CorruptionSpec spec = config.noise;
  spec.fraction = cell.s;
  const std::uint64_t seed = trial_seed(config.master_seed, cell.n, cell.m, cell.s, trial_index);

  TrialRecord record;
  record.n = cell.n;
  record.m = cell.m;
  record.s = cell.s;
  record.trial = trial_index;
  record.seed = seed;
  try {
    const ProblemInstance inst = plant_instance(cell.m, cell.n, config.model, spec, seed);
    const Vector x0 = spectral_init(inst.A, inst.b);

    SolverConfig solver = config.solver;
    const double xnorm = inst.xstar.norm();
    // Polish well past the success threshold: the residual-support count is
    // only meaningful at convergence, not at the stopping boundary.
    if (solver.tol_dist <= 0.0) solver.tol_dist = 1e-5 * config.success_tol * xnorm;
    if (solver.fstar_mode == FStarMode::known) {
      solver.fstar_value = eval_objective(inst.A, inst.b, inst.xstar);
    }
    if (solver.method == Method::geometric && solver.lambda0 <= 0.0) {
      solver.lambda0 = x0.norm();
    }

    const SolveTrace trace = solve(inst, solver, x0);
    record.final_dist = trace.final_dist;
    record.final_obj = trace.final_objective;
    record.iterations = trace.iterations;
    record.success = trace.final_dist <= config.success_tol * xnorm;

    const Vector r = residual(inst.A, inst.b, trace.final_x);
    const double threshold = 1e-8 * inst.b.values.cwiseAbs().maxCoeff();
    record.residual_l0 = (r.cwiseAbs().array() > threshold).count();
    const auto planted = static_cast<Index>(
        std::floor(cell.s * static_cast<double>(cell.m)));
    record.l0_coincides = record.residual_l0 <= planted;
  } catch (const std::exception& e) {
    throw std::runtime_error("run_trial failed at cell (n=" + std::to_string(cell.n) +
                             ", m=" + std::to_string(cell.m) + ", s=" + format_double(cell.s) +
                             ", trial=" + std::to_string(trial_index) + "): " + e.what());
  }
  record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

GridResult run_grid(const ExperimentConfig& config) {
  config.validate();

  std::vector<Cell> cells;
  for (const auto& [n, m] : config.dims) {
    for (double s : config.fractions) cells.push_back({n, m, s});
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.m != b.m) return a.m < b.m;
    return a.s < b.s;
  });

  // Preallocated slots keyed by (cell, trial) make the result independent of
  // the execution schedule.
  std::vector<std::vector<TrialRecord>> records(cells.size(),
                                                std::vector<TrialRecord>(config.trials));
  const std::size_t total_tasks = cells.size() * static_cast<std::size_t>(config.trials);
  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    while (true) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= total_tasks || failed.load()) return;
      const std::size_t cell_idx = task / static_cast<std::size_t>(config.trials);
      const int trial = static_cast<int>(task % static_cast<std::size_t>(config.trials));
      try {
        records[cell_idx][static_cast<std::size_t>(trial)] =
            run_trial(config, cells[cell_idx], trial);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failure_message = e.what();
        failed.store(true);
        return;
      }
    }
  };

  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int workers = std::min<int>(config.threads, static_cast<int>(total_tasks));
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error(failure_message);

  GridResult grid;
  grid.config = config;
  grid.cells.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CellResult cr;
    cr.cell = cells[i];
    cr.trials = config.trials;
    double dist_sum = 0.0;
    double iter_sum = 0.0;
    for (const TrialRecord& r : records[i]) {
      if (r.success) ++cr.successes;
      dist_sum += r.final_dist;
      iter_sum += r.iterations;
    }
    cr.rate = static_cast<double>(cr.successes) / static_cast<double>(cr.trials);
    cr.mean_final_dist = dist_sum / static_cast<double>(cr.trials);
    cr.mean_iters = iter_sum / static_cast<double>(cr.trials);
    cr.records = std::move(records[i]);
    grid.cells.push_back(std::move(cr));
  }
  return grid;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_results(const GridResult& grid, const std::string& csv_path,
                   const std::string& manifest_path) {
  {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("write_results: cannot open " + csv_path);
    csv << "n,m,s,trials,successes,rate,mean_final_dist,mean_iters\n";
    for (const CellResult& c : grid.cells) {
      csv << c.cell.n << ',' << c.cell.m << ',' << format_double(c.cell.s) << ',' << c.trials
          << ',' << c.successes << ',' << format_double(c.rate) << ','
          << format_double(c.mean_final_dist) << ',' << format_double(c.mean_iters) << '\n';
    }
    if (!csv) throw std::runtime_error("write_results: failed writing " + csv_path);
  }

  nlohmann::json manifest;
  manifest["schema"] = "phaselab.grid-manifest/1";
  manifest["version"] = "1.0.0";
  manifest["master_seed"] = grid.config.master_seed;
  manifest["config"] = experiment_config_to_json(grid.config);
  nlohmann::json cells = nlohmann::json::array();
  for (const CellResult& c : grid.cells) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(c.records.size());
    for (const TrialRecord& r : c.records) seeds.push_back(r.seed);
    cells.push_back({{"n", c.cell.n}, {"m", c.cell.m}, {"s", c.cell.s}, {"seed_list", seeds}});
  }
  manifest["cells"] = cells;
  {
    // Timestamp lives in exactly one key so reruns differ only here.
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest["timestamp"] = stamp;
  }
  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) throw std::runtime_error("write_results: cannot open " + manifest_path);
  mf << manifest.dump(2) << '\n';
  if (!mf) throw std::runtime_error("write_results: failed writing " + manifest_path);
}

}  // namespace phaselab
