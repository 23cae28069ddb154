#include "tanom/adam.hpp"

#include <cmath>

namespace tanom {

AdamState make_adam_state(const ModelParams& params) {
  AdamState st;
  st.m = zeros_like(params);
  st.v = zeros_like(params);
  st.step = 0;
  return st;
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               const AdamConfig& cfg) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (!grads.all_finite()) {
    throw TrainingError("adam_step: non-finite gradient");
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  ModelParams& m = state.m;
  ModelParams& v = state.v;
  const auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                          std::vector<double>& mt, std::vector<double>& vt) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      mt[i] = cfg.beta1 * mt[i] + (1.0 - cfg.beta1) * g[i];
      vt[i] = cfg.beta2 * vt[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = mt[i] / bc1;
      const double v_hat = vt[i] / bc2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  };

  update(params.conv_w, grads.conv_w, m.conv_w, v.conv_w);
  update(params.conv_b, grads.conv_b, m.conv_b, v.conv_b);
  update(params.attn1_w, grads.attn1_w, m.attn1_w, v.attn1_w);
  update(params.attn1_b, grads.attn1_b, m.attn1_b, v.attn1_b);
  update(params.attn2_w, grads.attn2_w, m.attn2_w, v.attn2_w);
  update(params.attn2_b, grads.attn2_b, m.attn2_b, v.attn2_b);
  update(params.clf1_w, grads.clf1_w, m.clf1_w, v.clf1_w);
  update(params.clf1_b, grads.clf1_b, m.clf1_b, v.clf1_b);
  update(params.clf2_w, grads.clf2_w, m.clf2_w, v.clf2_w);
  update(params.clf2_b, grads.clf2_b, m.clf2_b, v.clf2_b);

  if (!params.all_finite()) {
    throw TrainingError("adam_step: parameters became non-finite");
  }
}

}  // namespace tanom
