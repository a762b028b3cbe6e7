#pragma once

#include "mcdist/nn/model.hpp"

namespace mcdist {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Optimizer state: bias-corrected first/second moments mirroring every
// parameter tensor.
struct AdamState {
  long step = 0;
  ModelWeights m, v;
  AdamConfig cfg;
};

AdamState make_adam_state(const ModelConfig& model_cfg, const AdamConfig& cfg);

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, ModelWeights& params,
               const ModelWeights& grads);

}  // namespace mcdist
