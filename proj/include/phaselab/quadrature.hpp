// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <vector>

namespace phaselab {

/// One sample of e(s) = E|Z1^2 - s Z2^2|^(1/2), computed as the angular
/// integral (1/(2 sqrt(2 pi))) int_0^{2pi} |cos^2 t - s sin^2 t|^(1/2) dt,
/// with the two normalizations used for the curve plots.
struct ECurvePoint {
  double s = 0.0;
  double e_s = 0.0;
  double ratio_F = 0.0;      // e(s) / sqrt(1 + s^2)
  double ratio_sqrtF = 0.0;  // e(s) / (1 + s^2)^(1/4)
  double error_estimate = 0.0;
};

/// Adaptive quadrature with the domain split at the integrand's square-root
/// kinks (tan^2 t = 1/s for s > 0). The error estimate is certified below
/// the requested absolute tolerance.
ECurvePoint e_of_s(double s, double tol);

struct ECurveScan {
  std::vector<ECurvePoint> points;
  double min_ratio_F = 0.0;
  double argmin_ratio_F = 0.0;
  double min_ratio_sqrtF = 0.0;
  double argmin_ratio_sqrtF = 0.0;
};

/// Uniform grid over s in [-1, 1].
ECurveScan e_curve_scan(int grid_points, double tol);

}  // namespace phaselab
