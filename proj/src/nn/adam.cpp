#include "mcdist/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mcdist {

AdamState make_adam_state(const ModelConfig& model_cfg, const AdamConfig& cfg) {
  AdamState state;
  state.m = make_weights(model_cfg);
  state.v = make_weights(model_cfg);
  state.cfg = cfg;
  return state;
}

void adam_step(AdamState& state, ModelWeights& params,
               const ModelWeights& grads) {
  auto p = tensor_views(params);
  auto g = tensor_views(grads);
  auto m = tensor_views(state.m);
  auto v = tensor_views(state.v);
  if (p.size() != g.size() || p.size() != m.size()) {
    throw std::invalid_argument("adam_step: mismatched weight structures");
  }

  ++state.step;
  const AdamConfig& c = state.cfg;
  const double m_corr = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double v_corr = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].size() != g[i].size()) {
      throw std::invalid_argument("adam_step: mismatched tensor shapes");
    }
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i].array() = c.beta2 * v[i].array() + (1.0 - c.beta2) * g[i].array().square();
    p[i].array() -= c.lr * (m[i].array() / m_corr) /
                    ((v[i].array() / v_corr).sqrt() + c.eps);
  }
}

}  // namespace mcdist
