// Adam with bias correction, operating directly on the model's tensors.

#pragma once

#include <cstdint>
#include <stdexcept>

#include "tanom/error.hpp"
#include "tanom/model.hpp"

namespace tanom {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ModelParams m;  // first moments
  ModelParams v;  // second moments
  std::int64_t step = 0;
};

AdamState make_adam_state(const ModelParams& params);

// p -= lr * m_hat / (sqrt(v_hat) + eps). Throws TrainingError on non-finite
// gradients and std::invalid_argument on shape mismatch.
void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               const AdamConfig& cfg = {});

}  // namespace tanom
