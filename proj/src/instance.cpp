// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#include "phaselab/instance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "phaselab/rng.hpp"

namespace phaselab {

namespace {

// Sub-stream tags: each generation purpose draws from its own derived key so
// draw counts in one purpose never shift another.
constexpr std::uint64_t kTagMatrix = 0x6d617472;   // "matr"
constexpr std::uint64_t kTagSignal = 0x7369676e;   // "sign"
constexpr std::uint64_t kTagSupport = 0x73757070;  // "supp"
constexpr std::uint64_t kTagNoise = 0x6e6f6973;    // "nois"

std::vector<double> vector_to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_std(const std::vector<double>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = v[i];
  return out;
}

}  // namespace

namespace rng {

std::vector<std::int64_t> sample_distinct(Stream& stream, std::uint64_t m, std::uint64_t k) {
  std::vector<std::int64_t> out;
  out.reserve(k);
  for (std::uint64_t j = m - k; j < m; ++j) {
    const std::uint64_t t = stream.below(j + 1);
    if (std::find(out.begin(), out.end(), static_cast<std::int64_t>(t)) != out.end()) {
      out.push_back(static_cast<std::int64_t>(j));
    } else {
      out.push_back(static_cast<std::int64_t>(t));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rng

std::string to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::replace_zero: return "replace_zero";
    case NoiseModel::additive_gaussian: return "additive_gaussian";
    case NoiseModel::adversarial_large: return "adversarial_large";
  }
  throw std::logic_error("unreachable noise model");
}

std::string to_string(SupportModel m) {
  return m == SupportModel::uniform_random ? "uniform_random" : "fixed";
}

NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "replace_zero") return NoiseModel::replace_zero;
  if (s == "additive_gaussian") return NoiseModel::additive_gaussian;
  if (s == "adversarial_large") return NoiseModel::adversarial_large;
  throw std::invalid_argument("unknown noise model: " + s);
}

SupportModel support_model_from_string(const std::string& s) {
  if (s == "uniform_random") return SupportModel::uniform_random;
  if (s == "fixed") return SupportModel::fixed;
  throw std::invalid_argument("unknown support model: " + s);
}

void CorruptionSpec::validate(Index m) const {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("CorruptionSpec: fraction must lie in [0, 1), got " +
                                std::to_string(fraction));
  }
  if (noise_model != NoiseModel::replace_zero && !(scale > 0.0)) {
    throw std::invalid_argument("CorruptionSpec: scale must be positive, got " +
                                std::to_string(scale));
  }
  if (support == SupportModel::fixed) {
    std::vector<Index> sorted = fixed_support;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("CorruptionSpec: fixed support indices must be distinct");
    }
    for (Index i : sorted) {
      if (i < 0 || (m >= 0 && i >= m)) {
        throw std::invalid_argument("CorruptionSpec: fixed support index " + std::to_string(i) +
                                    " out of range");
      }
    }
  }
}

Matrix sample_matrix(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) {
    throw std::invalid_argument("sample_matrix: dimensions must be >= 1");
  }
  rng::Stream s(seed);
  Matrix A(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) A(i, j) = s.gaussian();
  }
  return A;
}

Vector sample_signal(Index n, double norm, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_signal: n must be >= 1");
  if (!(norm > 0.0)) {
    throw std::invalid_argument("sample_signal: norm must be positive, got " +
                                std::to_string(norm));
  }
  rng::Stream s(seed);
  Vector v(n);
  double len = 0.0;
  do {
    for (Index i = 0; i < n; ++i) v[i] = s.gaussian();
    len = v.norm();
  } while (len == 0.0);
  return v * (norm / len);
}

ProblemInstance plant_instance(Index m, Index n, MeasurementModel model,
                               const CorruptionSpec& spec, std::uint64_t seed) {
  spec.validate(m);
  std::vector<Index> support;
  if (spec.support == SupportModel::fixed) {
    support = spec.fixed_support;
    std::sort(support.begin(), support.end());
  } else {
    const auto L = static_cast<std::uint64_t>(std::floor(spec.fraction * static_cast<double>(m)));
    if (static_cast<Index>(L) >= m) {
      throw std::invalid_argument("plant_instance: corruption count floor(s*m) must be < m");
    }
    rng::Stream sup(rng::combine(seed, kTagSupport));
    for (std::int64_t i : rng::sample_distinct(sup, static_cast<std::uint64_t>(m), L)) {
      support.push_back(static_cast<Index>(i));
    }
  }
  if (static_cast<Index>(support.size()) >= m) {
    throw std::invalid_argument("plant_instance: corruption support must leave clean rows");
  }

  ProblemInstance inst{.A = sample_matrix(m, n, rng::combine(seed, kTagMatrix)),
                       .xstar = sample_signal(n, 1.0, rng::combine(seed, kTagSignal)),
                       .model = model,
                       .b = Measurements{Vector(), model},
                       .support = std::move(support),
                       .noise_values = Vector(),
                       .seed = seed,
                       .corruption = spec};

  Vector b = forward_map(inst.A, inst.xstar, model);
  const double xnorm_p = std::pow(inst.xstar.norm(), model.p);
  rng::Stream noise(rng::combine(seed, kTagNoise));
  inst.noise_values.resize(static_cast<Index>(inst.support.size()));
  for (std::size_t j = 0; j < inst.support.size(); ++j) {
    const Index i = inst.support[j];
    double delta = 0.0;
    switch (spec.noise_model) {
      case NoiseModel::replace_zero:
        delta = -b[i];
        break;
      case NoiseModel::additive_gaussian:
        delta = spec.scale * noise.gaussian();
        break;
      case NoiseModel::adversarial_large: {
        const double magnitude = spec.scale * xnorm_p * noise.uniform(1.0, 2.0);
        const double sign = noise.coin() ? 1.0 : -1.0;
        delta = sign * magnitude - b[i];
        break;
      }
    }
    inst.noise_values[static_cast<Index>(j)] = delta;
    b[i] += delta;
  }
  inst.b.values = std::move(b);
  return inst;
}

nlohmann::json instance_to_json(const ProblemInstance& instance) {
  nlohmann::json j;
  j["schema"] = "phaselab.instance/1";
  j["seed"] = instance.seed;
  j["p"] = instance.model.p;
  j["m"] = instance.A.rows();
  j["n"] = instance.A.cols();
  j["corruption"] = {{"fraction", instance.corruption.fraction},
                     {"noise_model", to_string(instance.corruption.noise_model)},
                     {"scale", instance.corruption.scale},
                     {"support_model", to_string(instance.corruption.support)},
                     {"fixed_support", instance.corruption.fixed_support}};
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(instance.A.rows()));
  for (Index i = 0; i < instance.A.rows(); ++i) {
    rows.push_back(vector_to_std(instance.A.row(i).transpose()));
  }
  j["matrix"] = rows;
  j["xstar"] = vector_to_std(instance.xstar);
  j["b"] = vector_to_std(instance.b.values);
  j["support"] = instance.support;
  j["noise_values"] = vector_to_std(instance.noise_values);
  return j;
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
  if (j.value("schema", std::string()) != "phaselab.instance/1") {
    throw std::invalid_argument("instance_from_json: unrecognized schema");
  }
  const auto m = j.at("m").get<Index>();
  const auto n = j.at("n").get<Index>();
  MeasurementModel model(j.at("p").get<int>());
  CorruptionSpec spec;
  if (j.contains("corruption")) {
    const auto& cj = j.at("corruption");
    spec.fraction = cj.at("fraction").get<double>();
    spec.noise_model = noise_model_from_string(cj.at("noise_model").get<std::string>());
    spec.scale = cj.at("scale").get<double>();
    spec.support = support_model_from_string(cj.at("support_model").get<std::string>());
    spec.fixed_support = cj.at("fixed_support").get<std::vector<Index>>();
  }
  ProblemInstance inst{.A = Matrix(m, n),
                       .xstar = vector_from_std(j.at("xstar").get<std::vector<double>>()),
                       .model = model,
                       .b = Measurements{vector_from_std(j.at("b").get<std::vector<double>>()), model},
                       .support = j.at("support").get<std::vector<Index>>(),
                       .noise_values =
                           vector_from_std(j.at("noise_values").get<std::vector<double>>()),
                       .seed = j.at("seed").get<std::uint64_t>(),
                       .corruption = spec};
  const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
  if (static_cast<Index>(rows.size()) != m) {
    throw std::invalid_argument("instance_from_json: matrix row count mismatch");
  }
  for (Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != n) {
      throw std::invalid_argument("instance_from_json: matrix column count mismatch");
    }
    for (Index k = 0; k < n; ++k) inst.A(i, k) = row[static_cast<std::size_t>(k)];
  }
  return inst;
}

}  // namespace phaselab
