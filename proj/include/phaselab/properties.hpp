// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <json.hpp>

#include "phaselab/instance.hpp"
#include "phaselab/model.hpp"

namespace phaselab {

struct WitnessPair {
  Vector x;
  Vector y;
  double ratio = 0.0;
};

/// Empirical two-sided growth band: extremes of
///   ||  |Ax|^p - |Ay|^p ||_1 / (m phi_p(x, y))
/// over stratified sample pairs, with the idealized constants at a given
/// epsilon for comparison.
struct AgpBand {
  int p = 2;
  double epsilon = 0.0;
  double mu1_hat = 0.0;
  double mu2_hat = 0.0;
  double mu1_pred = 0.0;
  double mu2_pred = 0.0;
  WitnessPair lo;
  WitnessPair hi;
  int num_pairs = 0;
  bool ratio_gap_ok = false;  // mu2_hat < 2 mu1_hat
};

/// Empirical range-property estimate: sup over sampled pairs of the exact
/// per-pair top-L mass ratio, refined by random ascent. A lower bound on the
/// true psi.
struct ArpReport {
  int p = 2;
  Index L = 0;
  double psi_hat = 0.0;
  std::optional<double> psi_pred;
  WitnessPair witness;
  int num_pairs = 0;
  int ascent_steps = 0;
};

struct SharpnessReport {
  int p = 2;
  double mu_hat = 0.0;
  std::optional<double> mu_pred;
  Vector worst_probe;
  double worst_dist = 0.0;
  int num_probes = 0;
  int certified_probes = 0;  // probes passing the reverse-triangle certificate
};

struct PsiPrediction {
  double value = 0.0;
  bool below_one = false;
};

struct ReverseTriangleResult {
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool arp_holds_at_T = false;
  double arp_ratio_at_T = 0.0;
};

/// || |Ax|^p - |Ay|^p ||_1 / (m phi_p(x,y)). Throws when x = +-y.
double agp_ratio(const Matrix& A, const Vector& x, const Vector& y, MeasurementModel model);

AgpBand estimate_agp_band(const Matrix& A, MeasurementModel model, int num_pairs,
                          std::uint64_t seed, double epsilon);

/// Exact per-pair sup over |T| <= L of ||r_T||_1 / ||r_Tc||_1 with
/// r = |Ax|^p - |Ay|^p: T is the top-L magnitude set. +infinity when the
/// complement mass is zero.
double arp_ratio_exact_T(const Matrix& A, const Vector& x, const Vector& y, Index L,
                         MeasurementModel model);

ArpReport estimate_arp_psi(const Matrix& A, Index L, MeasurementModel model, int num_pairs,
                           int ascent_steps, std::uint64_t seed, double epsilon = 0.05);

/// Predicted psi at analysis parameters (epsilon, s = L/m):
///   p=2: (sqrt(2)(1+e) - 0.9(1-e)(1-s)) / (0.9(1-e)(1-s))
///   p=1: ((1+e) - (2-sqrt(2))(1-e)(1-s)) / ((2-sqrt(2))(1-e)(1-s))
/// Throws naming the violated admissibility bound.
PsiPrediction predicted_psi(int p, double epsilon, double s);

/// Checks || |Ax|^p - |Ay|^p ||_1 <= (1+psi)/(1-psi) (f(x) - f(y) + 2 sigma_L(y)),
/// with T fixed as the top-L set of |  |Ay|^p - b | and the per-pair range
/// inequality at that T verified alongside.
ReverseTriangleResult reverse_triangle_check(const Matrix& A, const Measurements& b,
                                             const Vector& x, const Vector& y, Index L,
                                             double psi);

SharpnessReport sharpness_scan(const ProblemInstance& instance, double psi_hat, double epsilon,
                               int num_probes, std::uint64_t seed);

/// Extremes over unit directions h of (1/m) sum |a_i'h| normalized by
/// sqrt(2/pi). Returns (min_ratio, max_ratio).
std::pair<double, double> mean_abs_gauss_check(const Matrix& A, int num_dirs, std::uint64_t seed);

/// ||x+y|| + (sqrt(2)-1)||x-y|| >= ||x|| + ||y||, requiring x'y >= 0.
bool lemma_sum_diff_check(const Vector& x, const Vector& y);

/// q(t, rho) = (sqrt(t^2-2rt+1) + sqrt(t^2+2rt+1) - 1 - t) / sqrt(t^2-2rt+1).
double lemma1_quotient(double t, double rho);

/// sqrt(2) ||xx' - yy'||_F >= ||x+y|| ||x-y||.
bool lemma_rank2_check(const Vector& x, const Vector& y);

nlohmann::json to_json(const AgpBand& band);
nlohmann::json to_json(const ArpReport& report);
nlohmann::json to_json(const SharpnessReport& report);

}  // namespace phaselab
