// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#include "phaselab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phaselab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Kronrod 15-point rule with the embedded 7-point Gauss rule,
// abscissae/weights on [-1, 1].
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEstimate {
  double integral;
  double error;
};

template <typename F>
PanelEstimate gauss_kronrod(const F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double kronrod = kKronrodWeights[7] * f(mid);
  double gauss = kGaussWeights[3] * f(mid);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  // QUADPACK-style sharpened estimate, never below the raw difference scale.
  const double diff = std::abs(kronrod - gauss);
  const double err = std::min(diff, std::pow(200.0 * diff, 1.5));
  return {kronrod, std::max(err, 1e-300)};
}

template <typename F>
void integrate_adaptive(const F& f, double a, double b, double tol, int depth, double& total,
                        double& err_total) {
  const PanelEstimate est = gauss_kronrod(f, a, b);
  if (est.error <= tol || depth >= 52 || (b - a) <= 1e-14 * std::max(1.0, std::abs(a))) {
    total += est.integral;
    err_total += est.error;
    return;
  }
  const double mid = 0.5 * (a + b);
  integrate_adaptive(f, a, mid, 0.5 * tol, depth + 1, total, err_total);
  integrate_adaptive(f, mid, b, 0.5 * tol, depth + 1, total, err_total);
}

}  // namespace

ECurvePoint e_of_s(double s, double tol) {
  if (!(s >= -1.0 && s <= 1.0)) {
    throw std::invalid_argument("e_of_s: s must lie in [-1, 1]");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("e_of_s: tol must be positive");

  const auto integrand = [s](double theta) {
    const double c = std::cos(theta);
    const double t = std::sin(theta);
    return std::sqrt(std::abs(c * c - s * t * t));
  };

  // Quarter-circle boundaries, plus the kink angles theta* with
  // tan^2 theta* = 1/s when s > 0 (the integrand loses smoothness there).
  std::vector<double> cuts = {0.0, 0.5 * kPi, kPi, 1.5 * kPi, 2.0 * kPi};
  if (s > 0.0) {
    const double theta_star = std::atan(1.0 / std::sqrt(s));
    cuts.push_back(theta_star);
    cuts.push_back(kPi - theta_star);
    cuts.push_back(kPi + theta_star);
    cuts.push_back(2.0 * kPi - theta_star);
  }
  std::sort(cuts.begin(), cuts.end());

  const double norm = 2.0 * std::sqrt(2.0 * kPi);
  const double raw_tol = tol * norm;  // budget on the unnormalized integral
  double integral = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    const double panel_tol = raw_tol * (cuts[i + 1] - cuts[i]) / (2.0 * kPi);
    integrate_adaptive(integrand, cuts[i], cuts[i + 1], panel_tol, 0, integral, err);
  }

  ECurvePoint out;
  out.s = s;
  out.e_s = integral / norm;
  out.ratio_F = out.e_s / std::sqrt(1.0 + s * s);
  out.ratio_sqrtF = out.e_s / std::pow(1.0 + s * s, 0.25);
  out.error_estimate = err / norm;
  return out;
}

ECurveScan e_curve_scan(int grid_points, double tol) {
  if (grid_points < 3) throw std::invalid_argument("e_curve_scan: grid_points must be >= 3");
  ECurveScan scan;
  scan.points.reserve(static_cast<std::size_t>(grid_points));
  scan.min_ratio_F = scan.min_ratio_sqrtF = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double s = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    ECurvePoint pt = e_of_s(s, tol);
    if (pt.ratio_F < scan.min_ratio_F) {
      scan.min_ratio_F = pt.ratio_F;
      scan.argmin_ratio_F = s;
    }
    if (pt.ratio_sqrtF < scan.min_ratio_sqrtF) {
      scan.min_ratio_sqrtF = pt.ratio_sqrtF;
      scan.argmin_ratio_sqrtF = s;
    }
    scan.points.push_back(pt);
  }
  return scan;
}

}  // namespace phaselab
