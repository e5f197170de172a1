// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace phaselab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Measurement exponent: p=1 observes amplitudes |a_i'x|, p=2 squared
/// magnitudes |a_i'x|^2. Only these two values are meaningful.
struct MeasurementModel {
  int p;
  explicit MeasurementModel(int exponent);
};

/// Measurement vector paired with its exponent. Entries may be negative:
/// corruption can drive b_i below zero and the l1 objective stays well
/// defined.
struct Measurements {
  Vector values;
  MeasurementModel model;
};

inline double sgn0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Componentwise |Ax|^p.
Vector forward_map(const Matrix& A, const Vector& x, MeasurementModel model);

/// |Ax|^p - b.
Vector residual(const Matrix& A, const Measurements& b, const Vector& x);

/// f_p(x) = || |Ax|^p - b ||_1 (unnormalized sum; callers divide by m when
/// they want the per-measurement value).
double eval_objective(const Matrix& A, const Measurements& b, const Vector& x);

/// A Clarke subgradient of f_p at x, with the kink convention sign(0) = 0.
Vector subgradient(const Matrix& A, const Measurements& b, const Vector& x);

/// Sign-invariant distance: phi_2 = ||xx' - yy'||_F (via the Gram identity,
/// no n-by-n matrices formed), phi_1 = min(||x+y||, ||x-y||).
double phi(const Vector& x, const Vector& y, MeasurementModel model);

/// min(||x - xstar||, ||x + xstar||).
double dist_to_sign_pair(const Vector& x, const Vector& xstar);

/// Indices of the L largest-magnitude entries of r; ties broken by lowest
/// index. Returned sorted ascending.
std::vector<Index> top_l_indices(const Vector& r, Index L);

/// l1 mass of the residual outside its L largest-magnitude entries.
double sigma_tail(const Matrix& A, const Measurements& b, const Vector& x, Index L);

}  // namespace phaselab
