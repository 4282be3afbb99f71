#pragma once

#include <cstdint>

#include "acf/model.hpp"

namespace acf {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamConfig from(const TrainingConfig& c) {
    return {c.learning_rate, c.adam_beta1, c.adam_beta2, c.adam_eps};
  }
};

/// First/second moment estimates, laid out like the parameters they track.
struct AdamState {
  ParameterSet m;
  ParameterSet v;
  std::int64_t step = 0;

  static AdamState zeros_like(const ParameterSet& params);
};

/// One bias-corrected Adam update:
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2,
///   p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// Throws ContractViolation when shapes disagree.
void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state, const AdamConfig& config);

}  // namespace acf
