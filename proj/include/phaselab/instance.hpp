// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "phaselab/model.hpp"

namespace phaselab {

enum class NoiseModel { replace_zero, additive_gaussian, adversarial_large };
enum class SupportModel { uniform_random, fixed };

std::string to_string(NoiseModel m);
std::string to_string(SupportModel m);
NoiseModel noise_model_from_string(const std::string& s);
SupportModel support_model_from_string(const std::string& s);

/// How measurements get corrupted: which entries (support) and with what
/// values (noise model). fraction s gives L = floor(s*m) corrupted entries
/// under uniform_random support; a fixed support supplies the indices
/// directly.
struct CorruptionSpec {
  double fraction = 0.0;  // s in [0, 1)
  NoiseModel noise_model = NoiseModel::replace_zero;
  double scale = 1.0;  // additive_gaussian / adversarial_large magnitude
  SupportModel support = SupportModel::uniform_random;
  std::vector<Index> fixed_support;

  /// Throws std::invalid_argument on violated invariants. When m >= 0 the
  /// fixed support is also range-checked against it.
  void validate(Index m = -1) const;
};

/// A planted experiment: A, x*, exponent, measurements b with b_i = |a_i'x*|^p
/// off the corruption support T, plus the perturbations applied on T.
/// Regenerating from (m, n, model, spec, seed) is bit-exact.
struct ProblemInstance {
  Matrix A;
  Vector xstar;
  MeasurementModel model;
  Measurements b;
  std::vector<Index> support;  // T, sorted
  Vector noise_values;         // per-support additive perturbation: b[T[j]] = clean + noise_values[j]
  std::uint64_t seed = 0;
  CorruptionSpec corruption;   // generation provenance, echoed in serialization
};

/// m-by-n matrix of i.i.d. standard normal entries from the given stream key.
Matrix sample_matrix(Index m, Index n, std::uint64_t seed);

/// Uniform direction on the sphere scaled to the requested norm.
Vector sample_signal(Index n, double norm, std::uint64_t seed);

/// Plants an instance: clean measurements overwritten on T per the spec's
/// noise model. ||x*|| = 1.
ProblemInstance plant_instance(Index m, Index n, MeasurementModel model, const CorruptionSpec& spec,
                               std::uint64_t seed);

nlohmann::json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& j);

}  // namespace phaselab
