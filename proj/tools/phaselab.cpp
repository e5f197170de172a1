// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0
//
// Command-line front end: instance generation, solving, property
// certification, the e(s) curve, phase-transition sweeps, and the
// deterministic inequality suites. Key scalars are printed on stdout as
// `RESULT key=value` lines for scripting; errors are one line on stderr.
// Exit codes: 0 success, 1 validation error, 2 runtime/numerical error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "phaselab/harness.hpp"
#include "phaselab/instance.hpp"
#include "phaselab/model.hpp"
#include "phaselab/properties.hpp"
#include "phaselab/quadrature.hpp"
#include "phaselab/rng.hpp"
#include "phaselab/solvers.hpp"

namespace {

using namespace phaselab;

bool g_quiet = false;

void result_line(const std::string& key, const std::string& value) {
  if (!g_quiet) std::cout << "RESULT " << key << "=" << value << "\n";
}

void result_line(const std::string& key, double value) {
  result_line(key, format_double(value));
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

struct GenOptions {
  Index m = 200;
  Index n = 10;
  int p = 2;
  double s = 0.0;
  std::string noise = "adversarial_large";
  double scale = 1.0;
  std::uint64_t seed = 1;
  std::string out = "instance.json";
};

int run_gen(const GenOptions& opt) {
  CorruptionSpec spec;
  spec.fraction = opt.s;
  spec.noise_model = noise_model_from_string(opt.noise);
  spec.scale = opt.scale;
  const ProblemInstance inst =
      plant_instance(opt.m, opt.n, MeasurementModel(opt.p), spec, opt.seed);
  write_text(opt.out, instance_to_json(inst).dump(2) + "\n");
  result_line("instance", opt.out);
  result_line("planted_l0", static_cast<double>(inst.support.size()));
  result_line("fstar", eval_objective(inst.A, inst.b, inst.xstar));
  return 0;
}

struct SolveOptions {
  std::string instance_path;
  std::string method = "polyak";
  int max_iters = 1000;
  double tol_dist_rel = 1e-5;
  std::string fstar = "known";
  double lambda0 = 0.0;
  double decay = 0.98;
  double inner_tol = 1e-10;
  std::string out = "trace.json";
};

int run_solve(const SolveOptions& opt) {
  const ProblemInstance inst = instance_from_json(load_json(opt.instance_path));
  const Vector x0 = spectral_init(inst.A, inst.b);

  SolverConfig config;
  config.method = method_from_string(opt.method);
  config.max_iters = opt.max_iters;
  config.tol_dist = opt.tol_dist_rel * inst.xstar.norm();
  config.decay = opt.decay;
  config.inner_tol = opt.inner_tol;
  config.lambda0 = opt.lambda0 > 0.0 ? opt.lambda0 : x0.norm();
  if (opt.fstar == "known") {
    config.fstar_mode = FStarMode::known;
    config.fstar_value = eval_objective(inst.A, inst.b, inst.xstar);
  } else if (opt.fstar == "zero") {
    config.fstar_mode = FStarMode::zero;
  } else {
    throw std::invalid_argument("--fstar must be 'known' or 'zero'");
  }

  const SolveTrace trace = solve(inst, config, x0);
  const double m = static_cast<double>(inst.A.rows());
  const bool success = trace.final_dist <= config.tol_dist;

  nlohmann::json summary{{"schema", "phaselab.trace/1"},
                         {"method", to_string(config.method)},
                         {"termination", to_string(trace.termination)},
                         {"iterations", trace.iterations},
                         {"final_objective", trace.final_objective},
                         {"final_objective_per_m", trace.final_objective / m},
                         {"final_dist", trace.final_dist},
                         {"success", success},
                         {"wall_time_s", trace.wall_time_s},
                         {"objective_history", trace.objective},
                         {"dist_history", trace.dist},
                         {"seed", inst.seed},
                         {"config",
                          {{"instance", opt.instance_path},
                           {"method", opt.method},
                           {"max_iters", opt.max_iters},
                           {"tol_dist_rel", opt.tol_dist_rel},
                           {"fstar", opt.fstar},
                           {"lambda0", config.lambda0},
                           {"decay", opt.decay},
                           {"inner_tol", opt.inner_tol}}}};
  write_text(opt.out, summary.dump(2) + "\n");
  result_line("success", success ? "true" : "false");
  result_line("termination", to_string(trace.termination));
  result_line("final_dist", trace.final_dist);
  result_line("final_objective", trace.final_objective);
  result_line("iterations", static_cast<double>(trace.iterations));
  return 0;
}

struct PropsOptions {
  Index m = 2000;
  Index n = 10;
  int p = 2;
  double s = 0.01;
  std::string noise = "adversarial_large";
  double scale = 1.0;
  double epsilon = 0.1;
  int pairs = 200;
  int ascent_steps = 200;
  int probes = 200;
  std::uint64_t seed = 1;
  std::string out = ".";
};

int run_props(const PropsOptions& opt) {
  const MeasurementModel model(opt.p);
  CorruptionSpec spec;
  spec.fraction = opt.s;
  spec.noise_model = noise_model_from_string(opt.noise);
  spec.scale = opt.scale;
  const ProblemInstance inst = plant_instance(opt.m, opt.n, model, spec, opt.seed);
  const Index L = std::max<Index>(1, static_cast<Index>(inst.support.size()));

  const AgpBand band = estimate_agp_band(inst.A, model, opt.pairs,
                                         rng::combine(opt.seed, 0xa6b), opt.epsilon);
  const ArpReport arp = estimate_arp_psi(inst.A, L, model, opt.pairs, opt.ascent_steps,
                                         rng::combine(opt.seed, 0xa5b), opt.epsilon);
  const SharpnessReport sharp =
      sharpness_scan(inst, arp.psi_hat, opt.epsilon, opt.probes, rng::combine(opt.seed, 0x5a));

  const std::filesystem::path dir(opt.out);
  std::filesystem::create_directories(dir);
  write_text((dir / "agp.json").string(), to_json(band).dump(2) + "\n");
  write_text((dir / "arp.json").string(), to_json(arp).dump(2) + "\n");
  write_text((dir / "sharpness.json").string(), to_json(sharp).dump(2) + "\n");
  const nlohmann::json manifest{{"schema", "phaselab.props-manifest/1"},
                                {"seed", opt.seed},
                                {"m", opt.m},
                                {"n", opt.n},
                                {"p", opt.p},
                                {"s", opt.s},
                                {"noise", opt.noise},
                                {"scale", opt.scale},
                                {"epsilon", opt.epsilon},
                                {"pairs", opt.pairs},
                                {"ascent_steps", opt.ascent_steps},
                                {"probes", opt.probes},
                                {"L", L}};
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  result_line("mu1_hat", band.mu1_hat);
  result_line("mu2_hat", band.mu2_hat);
  result_line("agp_gap_ok", band.ratio_gap_ok ? "true" : "false");
  result_line("psi_hat", arp.psi_hat);
  if (arp.psi_pred) result_line("psi_pred", *arp.psi_pred);
  result_line("sharpness_mu_hat", sharp.mu_hat);
  if (sharp.mu_pred) result_line("sharpness_mu_pred", *sharp.mu_pred);
  return 0;
}

struct ECurveOptions {
  int points = 201;
  double tol = 1e-8;
  std::string out = "ecurve";
};

int run_ecurve(const ECurveOptions& opt) {
  const ECurveScan scan = e_curve_scan(opt.points, opt.tol);

  std::string csv_f = "s,ratio\n";
  std::string csv_sqrt = "s,ratio\n";
  for (const ECurvePoint& pt : scan.points) {
    csv_f += format_double(pt.s) + "," + format_double(pt.ratio_F) + "\n";
    csv_sqrt += format_double(pt.s) + "," + format_double(pt.ratio_sqrtF) + "\n";
  }
  write_text(opt.out + "_ratio_F.csv", csv_f);
  write_text(opt.out + "_ratio_sqrtF.csv", csv_sqrt);
  const nlohmann::json manifest{{"schema", "phaselab.ecurve-manifest/1"},
                                {"points", opt.points},
                                {"tol", opt.tol}};
  write_text(opt.out + "_manifest.json", manifest.dump(2) + "\n");

  result_line("min_ratio_F", scan.min_ratio_F);
  result_line("argmin_ratio_F", scan.argmin_ratio_F);
  result_line("min_ratio_sqrtF", scan.min_ratio_sqrtF);
  result_line("argmin_ratio_sqrtF", scan.argmin_ratio_sqrtF);
  if (!g_quiet) {
    std::cout << "min ratio_sqrtF " << (scan.min_ratio_sqrtF >= 0.77 ? ">=" : "<")
              << " 0.77 (computed " << format_double(scan.min_ratio_sqrtF) << ")\n";
  }
  return 0;
}

struct PhaseOptions {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
};

int run_phase(const PhaseOptions& opt) {
  ExperimentConfig config = experiment_config_from_json(load_json(opt.config_path));
  if (!opt.out_dir.empty()) config.out_dir = opt.out_dir;
  if (opt.threads > 0) config.threads = opt.threads;

  const GridResult grid = run_grid(config);
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  const std::string csv = (dir / "results.csv").string();
  const std::string manifest = (dir / "manifest.json").string();
  write_results(grid, csv, manifest);
  result_line("results", csv);
  result_line("manifest", manifest);
  for (const CellResult& c : grid.cells) {
    result_line("rate[n=" + std::to_string(c.cell.n) + ",m=" + std::to_string(c.cell.m) +
                    ",s=" + format_double(c.cell.s) + "]",
                c.rate);
  }
  return 0;
}

struct LemmasOptions {
  int pairs = 1000000;
  Index n = 8;
  std::uint64_t seed = 1;
  double grid_step = 1e-3;
};

int run_lemmas(const LemmasOptions& opt) {
  result_line("seed", static_cast<double>(opt.seed));
  result_line("pairs", static_cast<double>(opt.pairs));
  rng::Stream stream(opt.seed);
  int sum_diff_pass = 0;
  int rank2_pass = 0;
  for (int k = 0; k < opt.pairs; ++k) {
    Vector x(opt.n), y(opt.n);
    for (Index i = 0; i < opt.n; ++i) x[i] = stream.gaussian();
    for (Index i = 0; i < opt.n; ++i) y[i] = stream.gaussian();
    if (x.dot(y) < 0.0) y = -y;
    if (lemma_sum_diff_check(x, y)) ++sum_diff_pass;
    if (lemma_rank2_check(x, y)) ++rank2_pass;
  }
  result_line("sum_diff_pass", static_cast<double>(sum_diff_pass));
  result_line("sum_diff_fail", static_cast<double>(opt.pairs - sum_diff_pass));
  result_line("rank2_pass", static_cast<double>(rank2_pass));
  result_line("rank2_fail", static_cast<double>(opt.pairs - rank2_pass));

  double qmin = std::numeric_limits<double>::infinity();
  double argmin_t = 0.0;
  double argmin_rho = 0.0;
  const auto steps = static_cast<long>(std::llround(1.0 / opt.grid_step));
  for (long it = 0; it <= steps; ++it) {
    const double t = static_cast<double>(it) * opt.grid_step;
    for (long ir = 0; ir <= steps; ++ir) {
      const double rho = static_cast<double>(ir) * opt.grid_step;
      if (it == steps && ir == steps) continue;  // excluded singular corner
      const double q = lemma1_quotient(std::min(t, 1.0), std::min(rho, 1.0));
      if (q < qmin) {
        qmin = q;
        argmin_t = t;
        argmin_rho = rho;
      }
    }
  }
  result_line("quotient_min", qmin);
  result_line("quotient_argmin_t", argmin_t);
  result_line("quotient_argmin_rho", argmin_rho);
  const bool ok = sum_diff_pass == opt.pairs && rank2_pass == opt.pairs &&
                  qmin >= 2.0 - std::sqrt(2.0) - 1e-9;
  result_line("all_pass", ok ? "true" : "false");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: robust phase retrieval laboratory"};
  app.require_subcommand(1);
  app.add_flag("--quiet", g_quiet, "Suppress RESULT lines on stdout");

  GenOptions gen_opt;
  CLI::App* gen = app.add_subcommand("gen", "Generate a planted problem instance (JSON)");
  gen->add_option("--m", gen_opt.m, "Number of measurements")->capture_default_str();
  gen->add_option("--n", gen_opt.n, "Signal dimension")->capture_default_str();
  gen->add_option("--p", gen_opt.p, "Measurement exponent (1 or 2)")->capture_default_str();
  gen->add_option("--s", gen_opt.s, "Corruption fraction in [0, 1)")->capture_default_str();
  gen->add_option("--noise", gen_opt.noise,
                  "Noise model: replace_zero|additive_gaussian|adversarial_large")
      ->capture_default_str();
  gen->add_option("--scale", gen_opt.scale, "Noise scale")->capture_default_str();
  gen->add_option("--seed", gen_opt.seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_opt.out, "Output instance path")->capture_default_str();

  SolveOptions solve_opt;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve an instance from a spectral start");
  solve_cmd->add_option("--instance", solve_opt.instance_path, "Instance JSON path")->required();
  solve_cmd->add_option("--method", solve_opt.method, "polyak|geometric|prox_linear")
      ->capture_default_str();
  solve_cmd->add_option("--max-iters", solve_opt.max_iters, "Iteration cap")
      ->capture_default_str();
  solve_cmd->add_option("--tol-dist-rel", solve_opt.tol_dist_rel,
                        "Stop when dist(x, {x*, -x*}) <= this times ||x*||")
      ->capture_default_str();
  solve_cmd->add_option("--fstar", solve_opt.fstar, "f* mode: known|zero")->capture_default_str();
  solve_cmd->add_option("--lambda0", solve_opt.lambda0,
                        "Geometric initial step (0: from spectral scale)")
      ->capture_default_str();
  solve_cmd->add_option("--decay", solve_opt.decay, "Geometric decay q in (0, 1)")
      ->capture_default_str();
  solve_cmd->add_option("--inner-tol", solve_opt.inner_tol, "Prox-linear inner gap tolerance")
      ->capture_default_str();
  solve_cmd->add_option("--out", solve_opt.out, "Trace summary output path")
      ->capture_default_str();

  PropsOptions props_opt;
  CLI::App* props = app.add_subcommand(
      "props", "Estimate growth band, range-property psi, and sharpness on a planted instance");
  props->add_option("--m", props_opt.m, "Number of measurements")->capture_default_str();
  props->add_option("--n", props_opt.n, "Signal dimension")->capture_default_str();
  props->add_option("--p", props_opt.p, "Measurement exponent (1 or 2)")->capture_default_str();
  props->add_option("--s", props_opt.s, "Corruption fraction")->capture_default_str();
  props->add_option("--noise", props_opt.noise, "Noise model")->capture_default_str();
  props->add_option("--scale", props_opt.scale, "Noise scale")->capture_default_str();
  props->add_option("--eps", props_opt.epsilon, "Analysis epsilon for predicted constants")
      ->capture_default_str();
  props->add_option("--pairs", props_opt.pairs, "Sample pairs per estimator")
      ->capture_default_str();
  props->add_option("--ascent-steps", props_opt.ascent_steps, "Witness ascent steps")
      ->capture_default_str();
  props->add_option("--probes", props_opt.probes, "Sharpness probes")->capture_default_str();
  props->add_option("--seed", props_opt.seed, "Seed")->capture_default_str();
  props->add_option("--out", props_opt.out, "Output directory")->capture_default_str();

  ECurveOptions ecurve_opt;
  CLI::App* ecurve = app.add_subcommand("ecurve", "Tabulate e(s) and its normalized ratios");
  ecurve->add_option("--points", ecurve_opt.points, "Grid points on [-1, 1]")
      ->capture_default_str();
  ecurve->add_option("--tol", ecurve_opt.tol, "Quadrature tolerance")->capture_default_str();
  ecurve->add_option("--out", ecurve_opt.out, "Output CSV prefix")->capture_default_str();

  PhaseOptions phase_opt;
  CLI::App* phase = app.add_subcommand("phase", "Run a phase-transition grid from a JSON config");
  phase->add_option("--config", phase_opt.config_path, "Experiment config JSON")->required();
  phase->add_option("--out", phase_opt.out_dir, "Override output directory");
  phase->add_option("--threads", phase_opt.threads, "Override worker count");

  LemmasOptions lemmas_opt;
  CLI::App* lemmas = app.add_subcommand("lemmas", "Deterministic inequality sweeps");
  lemmas->add_option("--pairs", lemmas_opt.pairs, "Random pairs per inequality")
      ->capture_default_str();
  lemmas->add_option("--n", lemmas_opt.n, "Pair dimension")->capture_default_str();
  lemmas->add_option("--seed", lemmas_opt.seed, "Seed")->capture_default_str();
  lemmas->add_option("--grid-step", lemmas_opt.grid_step, "Quotient grid step")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return run_gen(gen_opt);
    if (solve_cmd->parsed()) return run_solve(solve_opt);
    if (props->parsed()) return run_props(props_opt);
    if (ecurve->parsed()) return run_ecurve(ecurve_opt);
    if (phase->parsed()) return run_phase(phase_opt);
    if (lemmas->parsed()) return run_lemmas(lemmas_opt);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: cli: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 2;
  }
}
