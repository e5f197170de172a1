// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#include "phaselab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace phaselab {

namespace {

void require_cols_match(const Matrix& A, const Vector& x, const char* where) {
  if (A.cols() != x.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch, matrix has " +
                                std::to_string(A.cols()) + " columns but vector has length " +
                                std::to_string(x.size()));
  }
}

void require_rows_match(const Matrix& A, const Measurements& b, const char* where) {
  if (A.rows() != b.values.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch, matrix has " +
                                std::to_string(A.rows()) + " rows but measurements have length " +
                                std::to_string(b.values.size()));
  }
}

void require_equal_length(const Vector& x, const Vector& y, const char* where) {
  if (x.size() != y.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch, " +
                                std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
}

}  // namespace

MeasurementModel::MeasurementModel(int exponent) : p(exponent) {
  if (p != 1 && p != 2) {
    throw std::invalid_argument("MeasurementModel: exponent must be 1 or 2, got " +
                                std::to_string(p));
  }
}

Vector forward_map(const Matrix& A, const Vector& x, MeasurementModel model) {
  require_cols_match(A, x, "forward_map");
  Vector z = A * x;
  if (model.p == 1) return z.cwiseAbs();
  return z.array().square().matrix();
}

Vector residual(const Matrix& A, const Measurements& b, const Vector& x) {
  require_rows_match(A, b, "residual");
  return forward_map(A, x, b.model) - b.values;
}

double eval_objective(const Matrix& A, const Measurements& b, const Vector& x) {
  return residual(A, b, x).lpNorm<1>();
}

Vector subgradient(const Matrix& A, const Measurements& b, const Vector& x) {
  require_cols_match(A, x, "subgradient");
  require_rows_match(A, b, "subgradient");
  const Vector z = A * x;
  Vector coeff(z.size());
  if (b.model.p == 1) {
    for (Index i = 0; i < z.size(); ++i) {
      coeff[i] = sgn0(std::abs(z[i]) - b.values[i]) * sgn0(z[i]);
    }
  } else {
    for (Index i = 0; i < z.size(); ++i) {
      coeff[i] = sgn0(z[i] * z[i] - b.values[i]) * 2.0 * z[i];
    }
  }
  return A.transpose() * coeff;
}

double phi(const Vector& x, const Vector& y, MeasurementModel model) {
  require_equal_length(x, y, "phi");
  if (model.p == 1) {
    return std::min((x + y).norm(), (x - y).norm());
  }
  const double xx = x.squaredNorm();
  const double yy = y.squaredNorm();
  const double xy = x.dot(y);
  return std::sqrt(std::max(0.0, xx * xx + yy * yy - 2.0 * xy * xy));
}

double dist_to_sign_pair(const Vector& x, const Vector& xstar) {
  require_equal_length(x, xstar, "dist_to_sign_pair");
  return std::min((x - xstar).norm(), (x + xstar).norm());
}

std::vector<Index> top_l_indices(const Vector& r, Index L) {
  if (L < 0 || L > r.size()) {
    throw std::invalid_argument("top_l_indices: L out of range [0, " + std::to_string(r.size()) +
                                "], got " + std::to_string(L));
  }
  std::vector<Index> order(static_cast<std::size_t>(r.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&r](Index a, Index b) {
    return std::abs(r[a]) > std::abs(r[b]);
  });
  order.resize(static_cast<std::size_t>(L));
  std::sort(order.begin(), order.end());
  return order;
}

double sigma_tail(const Matrix& A, const Measurements& b, const Vector& x, Index L) {
  const Vector r = residual(A, b, x);
  if (L < 0 || L > r.size()) {
    throw std::invalid_argument("sigma_tail: L out of range [0, " + std::to_string(r.size()) +
                                "], got " + std::to_string(L));
  }
  const std::vector<Index> head = top_l_indices(r, L);
  double tail = 0.0;
  std::size_t h = 0;
  for (Index i = 0; i < r.size(); ++i) {
    if (h < head.size() && head[h] == i) {
      ++h;
      continue;
    }
    tail += std::abs(r[i]);
  }
  return tail;
}

}  // namespace phaselab
