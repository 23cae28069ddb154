// Attention network and classifier.
//
// Per sequence: a causal temporal 1-D convolution (left zero padding, so step
// t never sees the future) feeds a two-layer head ending in a sigmoid, giving
// one attention coefficient lambda_t in (0,1) per segment. The input rows are
// pooled by those coefficients into a single vector, which a two-layer
// classifier maps to the video-level anomaly probability.
//
// Gradients are hand-derived per layer; there is no autodiff. The finite
// difference suite (gradcheck) certifies every parameter group.
//
// All math is double precision. Reductions run through the kernels module;
// the time-axis pooling sum is accumulated in increasing t.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tanom/features.hpp"

namespace tanom {

struct ModelConfig {
  int D = 16;             // input feature dimension
  int conv_kernel = 3;    // causal taps
  int conv_channels = 0;  // 0 means "same as D"
  int attn_hidden = 64;
  int clf_hidden = 32;
  std::uint64_t seed = 7;

  int channels() const { return conv_channels > 0 ? conv_channels : D; }
};

void validate(const ModelConfig& cfg);

// All learnable tensors. Also reused, zero-filled, as the gradient and the
// Adam moment containers, which keeps every per-tensor loop in one place.
struct ModelParams {
  ModelConfig cfg;
  std::vector<double> conv_w;   // [C][k][D], window-contiguous
  std::vector<double> conv_b;   // [C]
  std::vector<double> attn1_w;  // [H][C]
  std::vector<double> attn1_b;  // [H]
  std::vector<double> attn2_w;  // [H]
  std::vector<double> attn2_b;  // [1]
  std::vector<double> clf1_w;   // [G][D]
  std::vector<double> clf1_b;   // [G]
  std::vector<double> clf2_w;   // [G]
  std::vector<double> clf2_b;   // [1]

  bool all_finite() const;
  bool same_shape(const ModelParams& other) const;
};

using ParamGrads = ModelParams;

// Applies fn(name, tensor) to every tensor in declaration order.
template <typename Params, typename Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  fn("conv_w", p.conv_w);
  fn("conv_b", p.conv_b);
  fn("attn1_w", p.attn1_w);
  fn("attn1_b", p.attn1_b);
  fn("attn2_w", p.attn2_w);
  fn("attn2_b", p.attn2_b);
  fn("clf1_w", p.clf1_w);
  fn("clf1_b", p.clf1_b);
  fn("clf2_w", p.clf2_w);
  fn("clf2_b", p.clf2_b);
}

// Weights uniform in +-1/sqrt(fan_in), biases zero, deterministic in cfg.seed.
ModelParams init_params(const ModelConfig& cfg);

ModelParams zeros_like(const ModelParams& p);

// Everything forward computes, kept for exact backpropagation.
struct ForwardTrace {
  int T = 0;
  int D = 0;
  std::vector<double> x;         // [T][D] input copy
  std::vector<double> conv_pre;  // [T][C]
  std::vector<double> conv_out;  // [T][C] after ReLU
  std::vector<double> h1_pre;    // [T][H]
  std::vector<double> h1;        // [T][H] after ReLU
  std::vector<double> lambda;    // [T] attention coefficients, in (0,1)
  std::vector<double> pooled;    // [D]
  std::vector<double> z_pre;     // [G]
  std::vector<double> z;         // [G] after ReLU
  double logit = 0.0;
  double prob = 0.5;          // video-level probability, in (0,1)
  bool fixed_lambda = false;  // true when lambda was injected, not computed
};

// The attention pipeline alone: causal conv -> ReLU -> FC+ReLU -> FC+sigmoid.
std::vector<double> attention_scores(const ModelParams& params, const FeatureSequence& seq);

ForwardTrace forward(const ModelParams& params, const FeatureSequence& seq);

// Forward with the attention coefficients pinned to `lambda` instead of the
// attention head's output. Test/instrumentation hook: with a one-hot lambda
// the pooled vector is exactly one input row.
ForwardTrace forward_with_fixed_lambda(const ModelParams& params, const FeatureSequence& seq,
                                       std::span<const double> lambda);

// Classifier g on a single vector (the per-segment activation map path).
double classify_single(const ModelParams& params, std::span<const double> x);

// Accumulates d(loss)/d(params) into `grads` for one traced forward pass,
// given upstream d(loss)/d(lambda) and d(loss)/d(prob). Traces produced with
// a fixed lambda receive no attention-branch gradients.
void accumulate_grads(const ModelParams& params, const ForwardTrace& trace,
                      std::span<const double> dlambda, double dprob, ParamGrads& grads);

}  // namespace tanom
