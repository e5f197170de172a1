// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#include "phaselab/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace phaselab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double resolve_fstar(const SolverConfig& config) {
  if (config.fstar_mode == FStarMode::zero) return 0.0;
  if (!std::isfinite(config.fstar_value)) {
    throw std::invalid_argument("solver: fstar must be finite in known mode");
  }
  return config.fstar_value;
}

struct TraceBuilder {
  SolveTrace trace;
  const ProblemInstance* instance;
  bool record_iterates;

  void push(const Vector& x, double f) {
    trace.objective.push_back(f);
    trace.dist.push_back(dist_to_sign_pair(x, instance->xstar));
    if (record_iterates) trace.iterates.push_back(x);
  }

  SolveTrace finish(Vector x, Termination term, int iterations, Clock::time_point start) {
    trace.termination = term;
    trace.iterations = iterations;
    trace.final_objective = trace.objective.back();
    trace.final_dist = trace.dist.back();
    trace.final_x = std::move(x);
    trace.wall_time_s = seconds_since(start);
    return std::move(trace);
  }
};

bool criterion_met(const SolverConfig& config, double f, double fstar, double dist) {
  if (config.tol_dist > 0.0 && dist <= config.tol_dist) return true;
  if (config.tol_obj > 0.0 && f - fstar <= config.tol_obj) return true;
  return false;
}

struct StallDetector {
  int window;
  double rel_change;
  int run = 0;
  double prev = 0.0;
  bool primed = false;

  bool update(double f) {
    if (primed && std::abs(f - prev) <= rel_change * std::max(1.0, std::abs(f))) {
      ++run;
    } else {
      run = 0;
    }
    prev = f;
    primed = true;
    return run >= window;
  }
};

// Soft-threshold, the proximal map of the l1 norm.
Vector shrink(const Vector& v, double kappa) {
  return v.array().sign() * (v.array().abs() - kappa).max(0.0);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::polyak: return "polyak";
    case Method::geometric: return "geometric";
    case Method::prox_linear: return "prox_linear";
  }
  throw std::logic_error("unreachable method");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::stalled: return "stalled";
  }
  throw std::logic_error("unreachable termination");
}

Method method_from_string(const std::string& s) {
  if (s == "polyak") return Method::polyak;
  if (s == "geometric") return Method::geometric;
  if (s == "prox_linear") return Method::prox_linear;
  throw std::invalid_argument("unknown method: " + s);
}

void SolverConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("SolverConfig: max_iters must be >= 0");
  if (tol_dist < 0.0 || tol_obj < 0.0) {
    throw std::invalid_argument("SolverConfig: tolerances must be nonnegative");
  }
  if (method == Method::geometric) {
    if (!(lambda0 >= 0.0)) throw std::invalid_argument("SolverConfig: lambda0 must be >= 0");
    if (!(decay > 0.0 && decay < 1.0)) {
      throw std::invalid_argument("SolverConfig: decay q must lie in (0, 1)");
    }
  }
  if (method == Method::prox_linear) {
    if (!(inner_tol > 0.0)) throw std::invalid_argument("SolverConfig: inner_tol must be > 0");
    if (inner_max_iters < 0) {
      throw std::invalid_argument("SolverConfig: inner_max_iters must be >= 0");
    }
  }
}

Vector spectral_init(const Matrix& A, const Measurements& b) {
  const Index m = A.rows();
  const Index n = A.cols();
  if (b.values.size() != m) throw std::invalid_argument("spectral_init: dimension mismatch");
  if (b.values.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("spectral_init: degenerate measurements");
  }

  // Weights: b for p=2, b^2 for p=1; both estimate |a'x*|^2 scale.
  Vector w = b.model.p == 2 ? b.values : Vector(b.values.array().square().matrix());

  // Nearest-rank 90th percentile cutoff; duplication-invariant.
  std::vector<double> sorted(w.data(), w.data() + m);
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.9 * static_cast<double>(m))) - 1;
  const double cutoff = sorted[rank];

  Vector wmask = Vector::Zero(m);
  double kept_mass = 0.0;
  for (Index i = 0; i < m; ++i) {
    if (w[i] <= cutoff) {
      wmask[i] = w[i];
      kept_mass += w[i];
    }
  }
  if (wmask.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("spectral_init: degenerate measurements");
  }

  // Power method on D = (1/m) sum_kept w_i a_i a_i'.
  const double invm = 1.0 / static_cast<double>(m);
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (int it = 0; it < 200; ++it) {
    Vector u = invm * (A.transpose() * wmask.cwiseProduct(A * v));
    const double lambda = v.dot(u);
    const double unorm = u.norm();
    if (unorm == 0.0) break;
    const double resid = (u - lambda * v).norm();
    v = u / unorm;
    if (resid <= 1e-10 * std::abs(lambda)) break;
  }
  // Canonical sign: largest-magnitude component positive.
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;

  const double scale = std::sqrt(std::max(0.0, kept_mass * invm));
  return scale * v;
}

SolveTrace solve_polyak(const ProblemInstance& instance, const SolverConfig& config,
                        const Vector& x0) {
  config.validate();
  const auto start = Clock::now();
  const double fstar = resolve_fstar(config);

  TraceBuilder tb{.trace = {}, .instance = &instance, .record_iterates = config.record_iterates};
  Vector x = x0;
  double f = eval_objective(instance.A, instance.b, x);
  tb.push(x, f);
  StallDetector stall{config.stall_window, config.stall_rel_change};

  int k = 0;
  for (; k < config.max_iters; ++k) {
    if (criterion_met(config, f, fstar, tb.trace.dist.back())) {
      return tb.finish(std::move(x), Termination::converged, k, start);
    }
    const Vector g = subgradient(instance.A, instance.b, x);
    const double gn2 = g.squaredNorm();
    if (gn2 == 0.0) {
      const Termination term =
          f > fstar ? Termination::stalled : Termination::converged;
      return tb.finish(std::move(x), term, k, start);
    }
    x -= ((f - fstar) / gn2) * g;
    f = eval_objective(instance.A, instance.b, x);
    tb.push(x, f);
    if (stall.update(f)) {
      return tb.finish(std::move(x), Termination::stalled, k + 1, start);
    }
  }
  const Termination term = criterion_met(config, f, fstar, tb.trace.dist.back())
                               ? Termination::converged
                               : Termination::max_iters;
  return tb.finish(std::move(x), term, k, start);
}

SolveTrace solve_geometric(const ProblemInstance& instance, const SolverConfig& config,
                           const Vector& x0) {
  config.validate();
  const auto start = Clock::now();
  const double fstar = resolve_fstar(config);

  TraceBuilder tb{.trace = {}, .instance = &instance, .record_iterates = config.record_iterates};
  Vector x = x0;
  double f = eval_objective(instance.A, instance.b, x);
  tb.push(x, f);
  StallDetector stall{config.stall_window, config.stall_rel_change};

  double step = config.lambda0;
  int k = 0;
  for (; k < config.max_iters; ++k) {
    if (criterion_met(config, f, fstar, tb.trace.dist.back())) {
      return tb.finish(std::move(x), Termination::converged, k, start);
    }
    const Vector g = subgradient(instance.A, instance.b, x);
    const double gn = g.norm();
    if (gn > 0.0 && step > 0.0) x -= (step / gn) * g;
    step *= config.decay;
    f = eval_objective(instance.A, instance.b, x);
    tb.push(x, f);
    if (stall.update(f)) {
      return tb.finish(std::move(x), Termination::stalled, k + 1, start);
    }
  }
  const Termination term = criterion_met(config, f, fstar, tb.trace.dist.back())
                               ? Termination::converged
                               : Termination::max_iters;
  return tb.finish(std::move(x), term, k, start);
}

namespace {

// Minimizes the prox-linear model in the displacement d:
//   P(d) = ||c + G d||_1 + (1/2t) ||d||^2,  G = 2 diag(z) A,
// by ADMM with an LLT solve per sweep. Stops when the Fenchel gap
//   P(d) - [lam'c - (t/2) ||G'lam||^2],  lam = clip(rho u, [-1,1]),
// certifies the model-objective gap <= inner_tol (absolute).
Vector minimize_prox_model(const Matrix& A, const Vector& z, const Vector& c, double t,
                           double inner_tol, int max_sweeps) {
  const Index n = A.cols();
  const Matrix G = 2.0 * z.asDiagonal() * A;
  const Matrix GtG = G.transpose() * G;
  const double gmax = GtG.isZero(0.0)
                          ? 0.0
                          : Eigen::SelfAdjointEigenSolver<Matrix>(GtG).eigenvalues().maxCoeff();
  if (gmax <= 0.0) return Vector::Zero(n);  // model is ||c||_1 + quadratic, minimized at d = 0

  const double rho = 1.0 / (t * gmax);
  Matrix H = GtG * rho;
  H.diagonal().array() += 1.0 / t;
  const Eigen::LLT<Matrix> llt(H);

  Vector d = Vector::Zero(n);
  Vector y = c;
  Vector u = Vector::Zero(c.size());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    d = llt.solve(rho * (G.transpose() * (y - c - u)));
    const Vector gd_c = G * d + c;
    y = shrink(gd_c + u, 1.0 / rho);
    u += gd_c - y;

    if (sweep % 5 == 4 || sweep == max_sweeps - 1) {
      const Vector lam = (rho * u).cwiseMax(-1.0).cwiseMin(1.0);
      const double primal = gd_c.lpNorm<1>() + d.squaredNorm() / (2.0 * t);
      const double dual = lam.dot(c) - 0.5 * t * (G.transpose() * lam).squaredNorm();
      if (primal - dual <= inner_tol) break;
    }
  }
  return d;
}

}  // namespace

SolveTrace solve_prox_linear(const ProblemInstance& instance, const SolverConfig& config,
                             const Vector& x0) {
  config.validate();
  if (instance.model.p != 2) {
    throw std::invalid_argument("solve_prox_linear: prox-linear requires smooth inner map (p=2)");
  }
  const auto start = Clock::now();
  const double fstar = resolve_fstar(config);
  const Matrix& A = instance.A;

  double t = config.prox_t;
  if (!(t > 0.0)) {
    const double lmax =
        Eigen::SelfAdjointEigenSolver<Matrix>(A.transpose() * A).eigenvalues().maxCoeff();
    t = 1.0 / (2.0 * lmax);
  }
  const int inner_cap =
      config.inner_max_iters > 0
          ? config.inner_max_iters
          : std::max(200, static_cast<int>(10.0 * static_cast<double>(A.cols()) *
                                           std::log(1.0 / config.inner_tol)));

  TraceBuilder tb{.trace = {}, .instance = &instance, .record_iterates = config.record_iterates};
  Vector x = x0;
  double f = eval_objective(instance.A, instance.b, x);
  tb.push(x, f);
  StallDetector stall{config.stall_window, config.stall_rel_change};

  int k = 0;
  for (; k < config.max_iters; ++k) {
    if (criterion_met(config, f, fstar, tb.trace.dist.back())) {
      return tb.finish(std::move(x), Termination::converged, k, start);
    }
    const Vector z = A * x;
    const Vector c = z.array().square().matrix() - instance.b.values;
    const Vector d = minimize_prox_model(A, z, c, t, config.inner_tol, inner_cap);
    x += d;
    f = eval_objective(instance.A, instance.b, x);
    tb.push(x, f);
    if (stall.update(f)) {
      return tb.finish(std::move(x), Termination::stalled, k + 1, start);
    }
  }
  const Termination term = criterion_met(config, f, fstar, tb.trace.dist.back())
                               ? Termination::converged
                               : Termination::max_iters;
  return tb.finish(std::move(x), term, k, start);
}

SolveTrace solve(const ProblemInstance& instance, const SolverConfig& config, const Vector& x0) {
  switch (config.method) {
    case Method::polyak: return solve_polyak(instance, config, x0);
    case Method::geometric: return solve_geometric(instance, config, x0);
    case Method::prox_linear: return solve_prox_linear(instance, config, x0);
  }
  throw std::logic_error("unreachable method");
}

}  // namespace phaselab
