// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#include "phaselab/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "phaselab/rng.hpp"

namespace phaselab {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

Vector gaussian_vector(rng::Stream& s, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = s.gaussian();
  return v;
}

// Stratified pair sampler shared by the growth- and range-property
// estimators: independent pairs probe generic geometry, near-sign pairs the
// phi -> 0 limit, orthonormal pairs the worst-case growth geometry.
std::pair<Vector, Vector> sample_pair(rng::Stream& s, Index n, int stratum) {
  switch (stratum % 3) {
    case 0: {
      return {gaussian_vector(s, n), gaussian_vector(s, n)};
    }
    case 1: {
      Vector x = gaussian_vector(s, n);
      const double sign = s.coin() ? 1.0 : -1.0;
      Vector delta = gaussian_vector(s, n);
      Vector y = sign * x + (1e-3 * x.norm() / std::sqrt(static_cast<double>(n))) * delta;
      return {std::move(x), std::move(y)};
    }
    default: {
      Vector x = gaussian_vector(s, n);
      x.normalize();
      Vector g = gaussian_vector(s, n);
      Vector y = g - x.dot(g) * x;
      double len = y.norm();
      while (len < 1e-12) {  // resample a degenerate draw
        g = gaussian_vector(s, n);
        y = g - x.dot(g) * x;
        len = y.norm();
      }
      y /= len;
      return {std::move(x), std::move(y)};
    }
  }
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json witness_to_json(const WitnessPair& w) {
  return {{"x", to_std(w.x)}, {"y", to_std(w.y)}, {"ratio", w.ratio}};
}

}  // namespace

double agp_ratio(const Matrix& A, const Vector& x, const Vector& y, MeasurementModel model) {
  const double denom = phi(x, y, model);
  if (denom == 0.0) {
    throw std::domain_error("agp_ratio: ratio undefined at sign pair (x = +-y)");
  }
  const double num = (forward_map(A, x, model) - forward_map(A, y, model)).lpNorm<1>();
  return num / (static_cast<double>(A.rows()) * denom);
}

AgpBand estimate_agp_band(const Matrix& A, MeasurementModel model, int num_pairs,
                          std::uint64_t seed, double epsilon) {
  if (num_pairs < 1) throw std::invalid_argument("estimate_agp_band: num_pairs must be >= 1");
  const Index n = A.cols();
  rng::Stream pairs = rng::Stream(seed).substream(1);
  rng::Stream refine = rng::Stream(seed).substream(2);

  AgpBand band;
  band.p = model.p;
  band.epsilon = epsilon;
  band.num_pairs = num_pairs;
  band.mu1_hat = std::numeric_limits<double>::infinity();
  band.mu2_hat = -std::numeric_limits<double>::infinity();

  for (int k = 0; k < num_pairs; ++k) {
    auto [x, y] = sample_pair(pairs, n, k);
    if (phi(x, y, model) == 0.0) continue;
    const double r = agp_ratio(A, x, y, model);
    if (r < band.mu1_hat) band.lo = {x, y, r}, band.mu1_hat = r;
    if (r > band.mu2_hat) band.hi = {x, y, r}, band.mu2_hat = r;
  }

  // Local refinement: random-direction perturbations, accepted when they
  // push the extreme further.
  const auto refine_witness = [&](WitnessPair& w, bool maximize) {
    for (int step = 0; step < 100; ++step) {
      Vector xc = w.x + 0.02 * w.x.norm() * gaussian_vector(refine, n) /
                            std::sqrt(static_cast<double>(n));
      Vector yc = w.y + 0.02 * w.y.norm() * gaussian_vector(refine, n) /
                            std::sqrt(static_cast<double>(n));
      if (phi(xc, yc, model) == 0.0) continue;
      const double r = agp_ratio(A, xc, yc, model);
      if ((maximize && r > w.ratio) || (!maximize && r < w.ratio)) {
        w = {std::move(xc), std::move(yc), r};
      }
    }
  };
  refine_witness(band.lo, false);
  refine_witness(band.hi, true);
  band.mu1_hat = band.lo.ratio;
  band.mu2_hat = band.hi.ratio;

  if (model.p == 2) {
    band.mu1_pred = 0.9 * (1.0 - epsilon);
    band.mu2_pred = kSqrt2 * (1.0 + epsilon);
  } else {
    band.mu1_pred = kSqrt2OverPi * (2.0 - kSqrt2 - epsilon);
    band.mu2_pred = kSqrt2OverPi * (1.0 + epsilon);
  }
  band.ratio_gap_ok = band.mu2_hat < 2.0 * band.mu1_hat;
  return band;
}

double arp_ratio_exact_T(const Matrix& A, const Vector& x, const Vector& y, Index L,
                         MeasurementModel model) {
  if (L < 1 || L >= A.rows()) {
    throw std::invalid_argument("arp_ratio_exact_T: L must lie in [1, m)");
  }
  const Vector r = forward_map(A, x, model) - forward_map(A, y, model);
  const std::vector<Index> top = top_l_indices(r, L);
  double head = 0.0;
  std::size_t h = 0;
  double tail = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    if (h < top.size() && top[h] == i) {
      head += std::abs(r[i]);
      ++h;
    } else {
      tail += std::abs(r[i]);
    }
  }
  if (tail == 0.0) return std::numeric_limits<double>::infinity();
  return head / tail;
}

ArpReport estimate_arp_psi(const Matrix& A, Index L, MeasurementModel model, int num_pairs,
                           int ascent_steps, std::uint64_t seed, double epsilon) {
  if (L < 1 || L >= A.rows()) {
    throw std::invalid_argument("estimate_arp_psi: L must lie in [1, m)");
  }
  if (num_pairs < 1) throw std::invalid_argument("estimate_arp_psi: num_pairs must be >= 1");
  const Index n = A.cols();
  rng::Stream pairs = rng::Stream(seed).substream(1);
  rng::Stream ascent = rng::Stream(seed).substream(2);

  ArpReport report;
  report.p = model.p;
  report.L = L;
  report.num_pairs = num_pairs;
  report.ascent_steps = ascent_steps;
  report.psi_hat = -std::numeric_limits<double>::infinity();

  for (int k = 0; k < num_pairs; ++k) {
    auto [x, y] = sample_pair(pairs, n, k);
    const double r = arp_ratio_exact_T(A, x, y, L, model);
    if (r > report.psi_hat) report.witness = {std::move(x), std::move(y), r}, report.psi_hat = r;
  }

  // Coordinate-wise random ascent on the witness.
  for (int step = 0; step < ascent_steps; ++step) {
    WitnessPair cand = report.witness;
    Vector& v = ascent.coin() ? cand.x : cand.y;
    const Index coord = static_cast<Index>(ascent.below(static_cast<std::uint64_t>(n)));
    v[coord] += 0.05 * std::max(v.norm(), 1e-12) * ascent.gaussian();
    const double r = arp_ratio_exact_T(A, cand.x, cand.y, L, model);
    if (r > report.psi_hat) {
      cand.ratio = r;
      report.witness = std::move(cand);
      report.psi_hat = r;
    }
  }

  const double s = static_cast<double>(L) / static_cast<double>(A.rows());
  try {
    report.psi_pred = predicted_psi(model.p, epsilon, s).value;
  } catch (const std::domain_error&) {
    report.psi_pred.reset();
  }
  return report;
}

PsiPrediction predicted_psi(int p, double epsilon, double s) {
  if (p != 1 && p != 2) throw std::invalid_argument("predicted_psi: p must be 1 or 2");
  if (!(s >= 0.0 && s < 1.0)) {
    throw std::domain_error("predicted_psi: s must lie in [0, 1)");
  }
  if (p == 2) {
    const double bound = (1.8 - kSqrt2) / (1.8 + kSqrt2);
    if (!(epsilon > 0.0 && epsilon < bound)) {
      throw std::domain_error(
          "predicted_psi: epsilon must satisfy 0 < epsilon < (1.8 - sqrt(2))/(1.8 + sqrt(2))");
    }
    const double lower = 0.9 * (1.0 - epsilon) * (1.0 - s);
    const double value = (kSqrt2 * (1.0 + epsilon) - lower) / lower;
    return {value, value < 1.0};
  }
  const double two_minus_sqrt2 = 2.0 - kSqrt2;
  if (!(epsilon > 0.0 && (1.0 + epsilon) / (2.0 * two_minus_sqrt2 * (1.0 - epsilon)) < 1.0)) {
    throw std::domain_error(
        "predicted_psi: epsilon must satisfy (1+eps)/(2(2-sqrt(2))(1-eps)) < 1");
  }
  const double s_bound = 1.0 - (1.0 + epsilon) / (2.0 * two_minus_sqrt2 * (1.0 - epsilon));
  if (!(s > 0.0 && s < s_bound)) {
    throw std::domain_error(
        "predicted_psi: s must satisfy 0 < s < 1 - (1+eps)/(2(2-sqrt(2))(1-eps))");
  }
  const double lower = two_minus_sqrt2 * (1.0 - epsilon) * (1.0 - s);
  const double value = ((1.0 + epsilon) - lower) / lower;
  return {value, value < 1.0};
}

ReverseTriangleResult reverse_triangle_check(const Matrix& A, const Measurements& b,
                                             const Vector& x, const Vector& y, Index L,
                                             double psi) {
  if (!(psi > 0.0 && psi < 1.0)) {
    throw std::invalid_argument("reverse_triangle_check: psi must lie in (0, 1)");
  }
  const Vector ry = residual(A, b, y);
  const std::vector<Index> T = top_l_indices(ry, L);
  const Vector diff = forward_map(A, x, b.model) - forward_map(A, y, b.model);

  double head = 0.0;
  std::size_t h = 0;
  double tail = 0.0;
  for (Index i = 0; i < diff.size(); ++i) {
    if (h < T.size() && T[h] == i) {
      head += std::abs(diff[i]);
      ++h;
    } else {
      tail += std::abs(diff[i]);
    }
  }

  ReverseTriangleResult out;
  out.arp_ratio_at_T = tail > 0.0 ? head / tail
                                  : (head > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  out.arp_holds_at_T = head <= psi * tail * (1.0 + 1e-12);
  out.lhs = head + tail;
  const double fx = eval_objective(A, b, x);
  const double fy = eval_objective(A, b, y);
  out.rhs = (1.0 + psi) / (1.0 - psi) * (fx - fy + 2.0 * sigma_tail(A, b, y, L));
  out.pass = out.lhs <= out.rhs + 1e-9 * std::abs(out.rhs);
  out.slack = out.rhs - out.lhs;
  return out;
}

SharpnessReport sharpness_scan(const ProblemInstance& instance, double psi_hat, double epsilon,
                               int num_probes, std::uint64_t seed) {
  if (num_probes < 1) throw std::invalid_argument("sharpness_scan: num_probes must be >= 1");
  const Index n = instance.A.cols();
  const double m = static_cast<double>(instance.A.rows());
  const double fstar = eval_objective(instance.A, instance.b, instance.xstar);
  const double xnorm = instance.xstar.norm();
  const Index L = static_cast<Index>(instance.support.size());

  rng::Stream probes = rng::Stream(seed).substream(7);
  static constexpr double kRadii[] = {0.01, 0.1, 1.0, 10.0};

  SharpnessReport report;
  report.p = instance.model.p;
  report.num_probes = num_probes;
  report.mu_hat = std::numeric_limits<double>::infinity();

  const bool psi_ok = psi_hat > 0.0 && psi_hat < 1.0;
  for (int k = 0; k < num_probes; ++k) {
    Vector x;
    const int stratum = k % 9;
    if (stratum < 8) {
      const double radius = kRadii[stratum % 4] * xnorm;
      const Vector center = (stratum < 4) ? instance.xstar : Vector(-instance.xstar);
      Vector dir = gaussian_vector(probes, n);
      double len = dir.norm();
      while (len == 0.0) {
        dir = gaussian_vector(probes, n);
        len = dir.norm();
      }
      x = center + (radius / len) * dir;
    } else {
      x = xnorm * gaussian_vector(probes, n);
    }
    const double d = dist_to_sign_pair(x, instance.xstar);
    if (d < 1e-10) continue;  // avoid the 0/0 probe
    const double ratio = (eval_objective(instance.A, instance.b, x) - fstar) / (m * d);
    if (ratio < report.mu_hat) {
      report.mu_hat = ratio;
      report.worst_probe = x;
      report.worst_dist = d;
    }
    if (psi_ok && L >= 1 && L < instance.A.rows()) {
      const auto cert =
          reverse_triangle_check(instance.A, instance.b, x, instance.xstar, L, psi_hat);
      if (cert.pass && cert.arp_holds_at_T) ++report.certified_probes;
    }
  }

  if (psi_ok) {
    const double factor = (1.0 - psi_hat) / (1.0 + psi_hat);
    if (instance.model.p == 2) {
      report.mu_pred = factor * 0.45 * kSqrt2 * (1.0 - epsilon) * xnorm;
    } else {
      report.mu_pred = factor * kSqrt2OverPi * (2.0 - kSqrt2 - epsilon);
    }
  }
  return report;
}

std::pair<double, double> mean_abs_gauss_check(const Matrix& A, int num_dirs, std::uint64_t seed) {
  if (num_dirs < 1) throw std::invalid_argument("mean_abs_gauss_check: num_dirs must be >= 1");
  const Index n = A.cols();
  const double m = static_cast<double>(A.rows());
  rng::Stream dirs = rng::Stream(seed).substream(1);
  rng::Stream refine = rng::Stream(seed).substream(2);

  const auto ratio_of = [&](const Vector& h) {
    return (A * h).lpNorm<1>() / (m * kSqrt2OverPi * h.norm());
  };

  Vector lo_dir, hi_dir;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_dirs; ++k) {
    Vector h = gaussian_vector(dirs, n);
    if (h.norm() == 0.0) continue;
    h.normalize();
    const double r = ratio_of(h);
    if (r < lo) lo = r, lo_dir = h;
    if (r > hi) hi = r, hi_dir = h;
  }

  const auto refine_dir = [&](Vector& h, double& best, bool maximize) {
    for (int step = 0; step < 100; ++step) {
      Vector cand = h + 0.05 * gaussian_vector(refine, n) / std::sqrt(static_cast<double>(n));
      const double len = cand.norm();
      if (len == 0.0) continue;
      cand /= len;
      const double r = ratio_of(cand);
      if ((maximize && r > best) || (!maximize && r < best)) {
        best = r;
        h = std::move(cand);
      }
    }
  };
  refine_dir(lo_dir, lo, false);
  refine_dir(hi_dir, hi, true);
  return {lo, hi};
}

bool lemma_sum_diff_check(const Vector& x, const Vector& y) {
  if (x.dot(y) < 0.0) {
    throw std::invalid_argument("lemma_sum_diff_check: requires x'y >= 0 (flip y first)");
  }
  const double lhs = (x + y).norm() + (kSqrt2 - 1.0) * (x - y).norm();
  const double rhs = x.norm() + y.norm();
  return lhs >= rhs - 1e-12 * rhs;
}

double lemma1_quotient(double t, double rho) {
  if (!(t >= 0.0 && t <= 1.0 && rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("lemma1_quotient: (t, rho) must lie in [0,1]^2");
  }
  const double minus = t * t - 2.0 * rho * t + 1.0;
  if (minus <= 0.0) {
    throw std::domain_error("lemma1_quotient: denominator vanishes at (t, rho) = (1, 1)");
  }
  const double plus = t * t + 2.0 * rho * t + 1.0;
  return (std::sqrt(minus) + std::sqrt(plus) - 1.0 - t) / std::sqrt(minus);
}

bool lemma_rank2_check(const Vector& x, const Vector& y) {
  const double lhs = kSqrt2 * phi(x, y, MeasurementModel(2));
  const double rhs = (x + y).norm() * (x - y).norm();
  return lhs >= rhs - 1e-12 * std::max(lhs, rhs);
}

nlohmann::json to_json(const AgpBand& band) {
  return {{"p", band.p},
          {"epsilon", band.epsilon},
          {"mu1_hat", band.mu1_hat},
          {"mu2_hat", band.mu2_hat},
          {"mu1_pred", band.mu1_pred},
          {"mu2_pred", band.mu2_pred},
          {"witness_lo", witness_to_json(band.lo)},
          {"witness_hi", witness_to_json(band.hi)},
          {"num_pairs", band.num_pairs},
          {"ratio_gap_ok", band.ratio_gap_ok}};
}

nlohmann::json to_json(const ArpReport& report) {
  nlohmann::json j{{"p", report.p},
                   {"L", report.L},
                   {"psi_hat", report.psi_hat},
                   {"witness", witness_to_json(report.witness)},
                   {"num_pairs", report.num_pairs},
                   {"ascent_steps", report.ascent_steps}};
  if (report.psi_pred) j["psi_pred"] = *report.psi_pred;
  return j;
}

nlohmann::json to_json(const SharpnessReport& report) {
  nlohmann::json j{{"p", report.p},
                   {"mu_hat", report.mu_hat},
                   {"worst_probe", to_std(report.worst_probe)},
                   {"worst_dist", report.worst_dist},
                   {"num_probes", report.num_probes},
                   {"certified_probes", report.certified_probes}};
  if (report.mu_pred) j["mu_pred"] = *report.mu_pred;
  return j;
}

}  // namespace phaselab
