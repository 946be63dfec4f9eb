#pragma once

#include <cstdint>
#include <vector>

#include "infoshape/mlp.hpp"

namespace infoshape {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam state. Moment accumulators are shaped like the
/// parameters; t counts completed steps.
struct AdamState {
  AdamConfig config;
  Gradients m;
  Gradients v;
  std::uint64_t t = 0;

  static AdamState init(const Mlp& net, AdamConfig config);
};

/// One Adam update: theta -= lr * m_hat / (sqrt(v_hat) + eps), with the
/// standard bias corrections. Throws TrainingError on non-finite gradients.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

/// Plain elementwise step theta -= lr * g. Throws TrainingError on non-finite
/// gradients.
void sgd_step(Mlp& net, const Gradients& grads, double lr);

/// Elementwise arithmetic mean of a non-empty list of same-shaped gradients.
Gradients accumulate_grads(const std::vector<Gradients>& grad_list);

}  // namespace infoshape
