// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>
#include <vector>

#include "phaselab/instance.hpp"
#include "phaselab/model.hpp"

namespace phaselab {

enum class Method { polyak, geometric, prox_linear };
enum class FStarMode { known, zero };
enum class Termination { converged, max_iters, stalled };

std::string to_string(Method m);
std::string to_string(Termination t);
Method method_from_string(const std::string& s);

struct SolverConfig {
  Method method = Method::polyak;
  int max_iters = 1000;

  // Stopping: either (or both) may be enabled by setting it positive.
  // tol_dist compares dist(x, {x*, -x*}) against an absolute threshold
  // (oracle mode, planted experiments); tol_obj compares f(x) - fstar.
  double tol_dist = 0.0;
  double tol_obj = 0.0;

  FStarMode fstar_mode = FStarMode::zero;
  double fstar_value = 0.0;  // used when fstar_mode == known

  // Geometric schedule x+ = x - lambda0 q^k g/||g||.
  double lambda0 = 1.0;
  double decay = 0.98;  // q

  // Prox-linear inner problem. prox_t <= 0 selects 1/(2 lambda_max(A'A)),
  // which makes every outer model an upper bound on f_2.
  double inner_tol = 1e-10;
  int inner_max_iters = 0;  // 0: cap at 10 n log(1/inner_tol), floor 200
  double prox_t = 0.0;

  // Stall rule: this many consecutive iterations with relative objective
  // change below stall_rel_change.
  int stall_window = 200;
  double stall_rel_change = 1e-14;

  bool record_iterates = false;

  void validate() const;
};

struct SolveTrace {
  std::vector<Vector> iterates;   // populated when record_iterates
  std::vector<double> objective;  // length iterations + 1
  std::vector<double> dist;       // dist to {x*, -x*}, same length
  Termination termination = Termination::max_iters;
  int iterations = 0;
  double wall_time_s = 0.0;
  Vector final_x;
  double final_objective = 0.0;
  double final_dist = 0.0;
};

/// Direction from the leading eigenvector of the truncated, measurement-
/// weighted covariance (weights below their 90th percentile), scaled by the
/// uncorrected second-moment norm estimate over the same truncated set.
/// Throws on all-zero measurements.
Vector spectral_init(const Matrix& A, const Measurements& b);

SolveTrace solve_polyak(const ProblemInstance& instance, const SolverConfig& config,
                        const Vector& x0);
SolveTrace solve_geometric(const ProblemInstance& instance, const SolverConfig& config,
                           const Vector& x0);
/// p = 2 only: outer iterations minimize the linearized-inside-the-norm model
/// plus a proximal quadratic, to a certified model-objective gap.
SolveTrace solve_prox_linear(const ProblemInstance& instance, const SolverConfig& config,
                             const Vector& x0);

SolveTrace solve(const ProblemInstance& instance, const SolverConfig& config, const Vector& x0);

}  // namespace phaselab
