// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "phaselab/instance.hpp"
#include "phaselab/model.hpp"
#include "phaselab/properties.hpp"
#include "phaselab/rng.hpp"

using namespace phaselab;

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2OverPi = 0.79788456080286535588;

Vector random_vector(rng::Stream& s, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = s.gaussian();
  return v;
}

// Exhaustive oracle: maximize ||r_T||_1 / ||r_Tc||_1 over every subset of
// size exactly L, by bitmask enumeration.
double arp_brute_force(const Matrix& A, const Vector& x, const Vector& y, Index L,
                       MeasurementModel model) {
  const Vector r = forward_map(A, x, model) - forward_map(A, y, model);
  const int m = static_cast<int>(r.size());
  double best = -std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != static_cast<int>(L)) continue;
    double head = 0.0;
    double tail = 0.0;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) {
        head += std::abs(r[i]);
      } else {
        tail += std::abs(r[i]);
      }
    }
    const double ratio = tail == 0.0 ? std::numeric_limits<double>::infinity() : head / tail;
    best = std::max(best, ratio);
  }
  return best;
}

}  // namespace

TEST_CASE("agp_ratio concentration at y = 0") {
  const Matrix A = sample_matrix(20000, 5, 301);
  rng::Stream s(303);
  const Vector x = random_vector(s, 5);
  const Vector zero = Vector::Zero(5);

  // p=2: ratio estimates E Z^2 = 1.
  CHECK(std::abs(agp_ratio(A, x, zero, MeasurementModel(2)) - 1.0) < 0.03);
  // p=1: ratio estimates E|Z| = sqrt(2/pi).
  CHECK(std::abs(agp_ratio(A, x, zero, MeasurementModel(1)) - kSqrt2OverPi) < 0.02);
}

TEST_CASE("agp_ratio at orthonormal pairs estimates 4/(pi sqrt(2))") {
  const Matrix A = sample_matrix(20000, 5, 307);
  const Vector x = (Vector(5) << 1, 0, 0, 0, 0).finished();
  const Vector y = (Vector(5) << 0, 1, 0, 0, 0).finished();
  const double expected = 0.9003163161571061;  // E|Z1^2 - Z2^2| / sqrt(2) = 4/(pi sqrt(2))
  CHECK(std::abs(agp_ratio(A, x, y, MeasurementModel(2)) - expected) < 0.02);
}

TEST_CASE("agp_ratio rejects sign pairs") {
  const Matrix A = sample_matrix(10, 3, 1);
  rng::Stream s(2);
  const Vector x = random_vector(s, 3);
  CHECK_THROWS_AS(agp_ratio(A, x, x, MeasurementModel(1)), std::domain_error);
  CHECK_THROWS_AS(agp_ratio(A, x, Vector(-x), MeasurementModel(2)), std::domain_error);
}

TEST_CASE("estimate_agp_band stays inside the idealized bands") {
  const Matrix A = sample_matrix(5000, 10, 311);
  {
    const AgpBand band = estimate_agp_band(A, MeasurementModel(2), 200, 313, 0.1);
    CHECK(band.mu1_hat >= 0.9 * 0.9);
    CHECK(band.mu2_hat <= kSqrt2 * 1.1);
    CHECK(band.mu1_pred == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(band.mu2_pred == doctest::Approx(kSqrt2 * 1.1).epsilon(1e-12));
    CHECK(band.ratio_gap_ok);  // mu2_hat < 2 mu1_hat
    // Witnesses reproduce their ratios.
    CHECK(agp_ratio(A, band.lo.x, band.lo.y, MeasurementModel(2)) ==
          doctest::Approx(band.mu1_hat).epsilon(1e-12));
    CHECK(agp_ratio(A, band.hi.x, band.hi.y, MeasurementModel(2)) ==
          doctest::Approx(band.mu2_hat).epsilon(1e-12));
  }
  {
    const AgpBand band = estimate_agp_band(A, MeasurementModel(1), 200, 317, 0.1);
    CHECK(band.mu1_hat >= kSqrt2OverPi * (2.0 - kSqrt2) * 0.9);
    CHECK(band.mu2_hat <= kSqrt2OverPi * 1.1);
    CHECK(band.ratio_gap_ok);
  }
}

TEST_CASE("arp_ratio_exact_T hand examples") {
  {
    const Matrix A = Matrix::Ones(3, 1);  // three copies of the 1-d identity
    const Vector x = Vector::Ones(1);
    const Vector y = Vector::Zero(1);
    CHECK(arp_ratio_exact_T(A, x, y, 1, MeasurementModel(1)) == doctest::Approx(0.5));
  }
  {
    const Matrix A = Matrix::Identity(4, 4);
    Vector x = Vector::Zero(4);
    x[0] = 1.0;
    const Vector y = Vector::Zero(4);
    CHECK(std::isinf(arp_ratio_exact_T(A, x, y, 1, MeasurementModel(1))));
  }
  {
    // Uniform residual magnitudes: ratio L/(m-L).
    const Matrix A = Matrix::Identity(4, 4);
    const Vector x = Vector::Ones(4);
    const Vector y = Vector::Zero(4);
    CHECK(arp_ratio_exact_T(A, x, y, 1, MeasurementModel(1)) == doctest::Approx(1.0 / 3.0));
    CHECK(arp_ratio_exact_T(A, x, y, 2, MeasurementModel(1)) == doctest::Approx(1.0));
  }
  const Matrix A = sample_matrix(6, 2, 331);
  rng::Stream s(333);
  const Vector x = random_vector(s, 2);
  const Vector y = random_vector(s, 2);
  CHECK_THROWS_AS(arp_ratio_exact_T(A, x, y, 0, MeasurementModel(1)), std::invalid_argument);
  CHECK_THROWS_AS(arp_ratio_exact_T(A, x, y, 6, MeasurementModel(1)), std::invalid_argument);
}

TEST_CASE("arp_ratio_exact_T equals the exhaustive subset maximum") {
  rng::Stream s(337);
  for (Index m : {5, 8}) {
    for (Index L : {1, 2}) {
      const Matrix A = sample_matrix(m, 3, 341 + static_cast<std::uint64_t>(m));
      for (int rep = 0; rep < 20; ++rep) {
        const Vector x = random_vector(s, 3);
        const Vector y = random_vector(s, 3);
        for (int p : {1, 2}) {
          const double fast = arp_ratio_exact_T(A, x, y, L, MeasurementModel(p));
          const double brute = arp_brute_force(A, x, y, L, MeasurementModel(p));
          CHECK(fast == doctest::Approx(brute).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("arp ratio is invariant under joint scaling") {
  const Matrix A = sample_matrix(40, 4, 347);
  rng::Stream s(349);
  const Vector x = random_vector(s, 4);
  const Vector y = random_vector(s, 4);
  for (int p : {1, 2}) {
    const double base = arp_ratio_exact_T(A, x, y, 5, MeasurementModel(p));
    for (double c : {-3.0, 0.25, 10.0}) {
      const double scaled = arp_ratio_exact_T(A, Vector(c * x), Vector(c * y), 5,
                                              MeasurementModel(p));
      CHECK(scaled == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("estimate_arp_psi stays below one on well-conditioned Gaussian designs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix A = sample_matrix(2000, 10, 10000 + seed);
    const ArpReport report = estimate_arp_psi(A, 20, MeasurementModel(2), 60, 60, seed, 0.05);
    CHECK(report.psi_hat < 1.0);
    CHECK(report.psi_hat > 0.0);
    // The witness reproduces the reported ratio.
    CHECK(arp_ratio_exact_T(A, report.witness.x, report.witness.y, 20, MeasurementModel(2)) ==
          doctest::Approx(report.psi_hat).epsilon(1e-12));
  }
}

TEST_CASE("estimate_arp_psi exceeds one when the complement is a single row") {
  const Matrix A = sample_matrix(50, 5, 353);
  const ArpReport report = estimate_arp_psi(A, 49, MeasurementModel(2), 40, 0, 7, 0.05);
  CHECK(report.psi_hat > 1.0);
  // p=2 admits the prediction at any s < 1, but the value is far above one.
  REQUIRE(report.psi_pred.has_value());
  CHECK(*report.psi_pred > 1.0);

  const ArpReport p1 = estimate_arp_psi(A, 49, MeasurementModel(1), 40, 0, 7, 0.05);
  CHECK_FALSE(p1.psi_pred.has_value());  // s = 0.98 violates the p=1 admissibility bound
}

TEST_CASE("predicted_psi formulas and admissibility bounds") {
  {
    const PsiPrediction pred = predicted_psi(2, 0.1, 0.01);
    const double lower = 0.9 * 0.9 * 0.99;
    CHECK(pred.value == doctest::Approx((kSqrt2 * 1.1 - lower) / lower).epsilon(1e-12));
    CHECK(std::abs(pred.value - 0.94) < 2e-3);
    CHECK(pred.below_one);
  }
  {
    const PsiPrediction pred = predicted_psi(1, 0.05, 0.05);
    const double lower = (2.0 - kSqrt2) * 0.95 * 0.95;
    CHECK(pred.value == doctest::Approx((1.05 - lower) / lower).epsilon(1e-12));
    CHECK(std::abs(pred.value - 0.9861) < 1e-3);
    CHECK(pred.below_one);
  }
  // p=2 epsilon bound (1.8 - sqrt(2))/(1.8 + sqrt(2)) ~ 0.1200.
  CHECK_THROWS_AS(predicted_psi(2, 0.2, 0.01), std::domain_error);
  CHECK_NOTHROW(predicted_psi(2, 0.119, 0.0));
  // p=1 s bound 1 - (1+eps)/(2(2-sqrt(2))(1-eps)) ~ 0.0566 at eps = 0.05.
  CHECK_THROWS_AS(predicted_psi(1, 0.05, 0.06), std::domain_error);
  CHECK_NOTHROW(predicted_psi(1, 0.05, 0.056));
  CHECK_THROWS_AS(predicted_psi(3, 0.05, 0.01), std::invalid_argument);
}

TEST_CASE("reverse triangle bound at y = x and on planted probes") {
  CorruptionSpec spec;
  spec.fraction = 0.01;
  spec.noise_model = NoiseModel::adversarial_large;
  const ProblemInstance inst = plant_instance(2000, 10, MeasurementModel(2), spec, 401);
  const Index L = static_cast<Index>(inst.support.size());
  REQUIRE(L == 20);

  rng::Stream s(403);
  const Vector x = random_vector(s, 10);
  {
    const auto res = reverse_triangle_check(inst.A, inst.b, x, x, L, 0.5);
    CHECK(res.pass);
    CHECK(res.lhs == 0.0);
    CHECK(res.rhs >= 0.0);
  }

  const ArpReport arp = estimate_arp_psi(inst.A, L, inst.model, 60, 60, 405, 0.05);
  REQUIRE(arp.psi_hat < 1.0);
  const double fstar = eval_objective(inst.A, inst.b, inst.xstar);

  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Vector probe = random_vector(s, 10);
    const auto res = reverse_triangle_check(inst.A, inst.b, probe, inst.xstar, L, arp.psi_hat);
    if (!res.arp_holds_at_T) continue;
    CHECK(res.pass);
    // Global minimality witness through the same inequality: sigma_L(x*) = 0,
    // so f(probe) >= f(x*) up to rounding.
    CHECK(eval_objective(inst.A, inst.b, probe) >=
          fstar - 1e-9 * std::max(1.0, fstar));
    ++checked;
  }
  CHECK(checked == 100);

  CHECK_THROWS_AS(reverse_triangle_check(inst.A, inst.b, x, x, L, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(reverse_triangle_check(inst.A, inst.b, x, x, L, 1.0), std::invalid_argument);
}

TEST_CASE("global-minimizer residual bound at candidate solutions") {
  // || |Ax|^p - |Ax*|^p ||_1 <= 2 (1+psi)/(1-psi) sigma_L(x) with x a
  // candidate minimizer (here x = x* and sign flips / tiny perturbations).
  CorruptionSpec spec;
  spec.fraction = 0.01;
  spec.noise_model = NoiseModel::adversarial_large;
  const ProblemInstance inst = plant_instance(1000, 8, MeasurementModel(2), spec, 407);
  const Index L = static_cast<Index>(inst.support.size());
  const ArpReport arp = estimate_arp_psi(inst.A, L, inst.model, 60, 60, 409, 0.05);
  REQUIRE(arp.psi_hat < 1.0);

  for (const double flip : {1.0, -1.0}) {
    const Vector cand = flip * inst.xstar;
    const double lhs =
        (forward_map(inst.A, cand, inst.model) - forward_map(inst.A, inst.xstar, inst.model))
            .lpNorm<1>();
    const double rhs = 2.0 * (1.0 + arp.psi_hat) / (1.0 - arp.psi_hat) *
                       sigma_tail(inst.A, inst.b, cand, L);
    CHECK(lhs <= rhs + 1e-9 * std::max(1.0, rhs));
  }
}

TEST_CASE("sharpness scan is positive on planted instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CorruptionSpec spec;
    spec.fraction = 0.02;
    spec.noise_model = NoiseModel::adversarial_large;
    const ProblemInstance inst = plant_instance(500, 10, MeasurementModel(2), spec, 20000 + seed);
    const SharpnessReport report = sharpness_scan(inst, 0.0, 0.1, 100, seed);
    CHECK(report.mu_hat > 0.0);
    CHECK_FALSE(report.mu_pred.has_value());  // psi outside (0,1): no prediction
    CHECK(report.worst_dist >= 1e-10);
  }
}

TEST_CASE("sharpness probe at 2 x* has a finite positive ratio") {
  CorruptionSpec spec;
  spec.fraction = 0.02;
  spec.noise_model = NoiseModel::adversarial_large;
  const ProblemInstance inst = plant_instance(500, 10, MeasurementModel(2), spec, 411);
  const double fstar = eval_objective(inst.A, inst.b, inst.xstar);
  const Vector probe = 2.0 * inst.xstar;
  const double ratio = (eval_objective(inst.A, inst.b, probe) - fstar) /
                       (static_cast<double>(inst.A.rows()) * inst.xstar.norm());
  CHECK(std::isfinite(ratio));
  CHECK(ratio > 0.0);
}

TEST_CASE("mean_abs_gauss_check concentrates around sqrt(2/pi)") {
  const Matrix A = sample_matrix(20000, 20, 421);
  const auto [lo, hi] = mean_abs_gauss_check(A, 100, 423);
  CHECK(lo >= 0.95);
  CHECK(hi <= 1.05);
  CHECK(lo <= hi);
}

TEST_CASE("mean_abs_gauss_check on a single unit row stays below the normalizer bound") {
  Matrix A = Matrix::Zero(1, 4);
  A(0, 0) = 1.0;
  const auto [lo, hi] = mean_abs_gauss_check(A, 50, 427);
  // ratio = |h_1| / sqrt(2/pi) for unit h, so the max is 1/sqrt(2/pi).
  CHECK(hi <= 1.0 / kSqrt2OverPi + 1e-12);
  CHECK(lo >= 0.0);
}

TEST_CASE("sum-difference inequality: equality cases and random sweep") {
  rng::Stream s(431);
  const Vector x = random_vector(s, 6);
  CHECK(lemma_sum_diff_check(x, x));

  const Vector e1 = (Vector(2) << 1, 0).finished();
  const Vector e2 = (Vector(2) << 0, 1).finished();
  CHECK(lemma_sum_diff_check(e1, e2));  // equality: both sides 2

  for (int rep = 0; rep < 10000; ++rep) {
    Vector a = random_vector(s, 8);
    Vector b = random_vector(s, 8);
    if (a.dot(b) < 0.0) b = -b;
    CHECK(lemma_sum_diff_check(a, b));
  }
  Vector neg = -x;
  CHECK_THROWS_AS(lemma_sum_diff_check(x, neg), std::invalid_argument);
}

TEST_CASE("rank-2 Frobenius inequality: equality cases and random sweep") {
  rng::Stream s(433);
  const Vector x = random_vector(s, 5);
  CHECK(lemma_rank2_check(x, x));  // both sides zero

  const Vector e1 = (Vector(2) << 1, 0).finished();
  const Vector e2 = (Vector(2) << 0, 1).finished();
  CHECK(lemma_rank2_check(e1, e2));  // equality: both sides 2

  for (int rep = 0; rep < 10000; ++rep) {
    const Vector a = random_vector(s, 8);
    const Vector b = random_vector(s, 8);
    CHECK(lemma_rank2_check(a, b));
  }
}

TEST_CASE("norm quotient values and coarse grid minimum") {
  CHECK(lemma1_quotient(1.0, 0.0) == doctest::Approx(2.0 - kSqrt2).epsilon(1e-12));
  for (double rho : {0.0, 0.3, 1.0}) {
    CHECK(lemma1_quotient(0.0, rho) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lemma1_quotient(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(lemma1_quotient(1.5, 0.0), std::invalid_argument);

  double qmin = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= 100; ++it) {
    for (int ir = 0; ir <= 100; ++ir) {
      if (it == 100 && ir == 100) continue;
      qmin = std::min(qmin, lemma1_quotient(it / 100.0, ir / 100.0));
    }
  }
  CHECK(qmin >= 2.0 - kSqrt2 - 1e-9);
}

TEST_CASE("report serialization includes every field") {
  const Matrix A = sample_matrix(200, 4, 439);
  const AgpBand band = estimate_agp_band(A, MeasurementModel(2), 30, 441, 0.1);
  const nlohmann::json jb = to_json(band);
  for (const char* key : {"p", "epsilon", "mu1_hat", "mu2_hat", "mu1_pred", "mu2_pred",
                          "witness_lo", "witness_hi", "num_pairs", "ratio_gap_ok"}) {
    CHECK(jb.contains(key));
  }
  const ArpReport arp = estimate_arp_psi(A, 5, MeasurementModel(2), 30, 10, 443, 0.05);
  const nlohmann::json ja = to_json(arp);
  for (const char* key : {"p", "L", "psi_hat", "witness", "num_pairs", "ascent_steps"}) {
    CHECK(ja.contains(key));
  }
}
