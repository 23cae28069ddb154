#include "tanom/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tanom/kernels.hpp"
#include "tanom/rng.hpp"

namespace tanom {

namespace {

// Sigmoid clamped to the open interval so downstream logs stay finite even
// for saturating logits.
constexpr double kSigmoidEps = 1e-12;

double sigmoid(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  if (s < kSigmoidEps) return kSigmoidEps;
  if (s > 1.0 - kSigmoidEps) return 1.0 - kSigmoidEps;
  return s;
}

void check_dims(const ModelParams& params, const FeatureSequence& seq) {
  if (static_cast<int>(seq.D) != params.cfg.D) {
    throw std::invalid_argument("feature dimension " + std::to_string(seq.D) +
                                " does not match model D=" + std::to_string(params.cfg.D));
  }
  if (seq.T < 1) {
    throw std::invalid_argument("sequence must have T >= 1");
  }
}

std::vector<double> to_double(const FeatureSequence& seq) {
  std::vector<double> x(seq.data.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(seq.data[i]);
  }
  return x;
}

void fill_uniform(Rng& rng, std::vector<double>& w, int fan_in) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : w) {
    v = rng.uniform(-scale, scale);
  }
}

// Runs the attention branch, filling the trace up to `lambda`.
void run_attention(const ModelParams& p, ForwardTrace& tr) {
  const int T = tr.T, D = tr.D;
  const int C = p.cfg.channels();
  const int H = p.cfg.attn_hidden;
  const int k = p.cfg.conv_kernel;

  tr.conv_pre.assign(static_cast<std::size_t>(T) * C, 0.0);
  tr.conv_out.assign(static_cast<std::size_t>(T) * C, 0.0);
  tr.h1_pre.assign(static_cast<std::size_t>(T) * H, 0.0);
  tr.h1.assign(static_cast<std::size_t>(T) * H, 0.0);
  tr.lambda.assign(T, 0.0);

  for (int t = 0; t < T; ++t) {
    // Causal window: taps tau = 0..k-1 read row t-(k-1)+tau; rows before the
    // start are zero padding, which shows up as a shortened contiguous dot.
    const int skip = std::max(0, (k - 1) - t);
    const int src0 = t - (k - 1) + skip;
    const std::size_t win = static_cast<std::size_t>(k - skip) * D;
    const double* xwin = tr.x.data() + static_cast<std::size_t>(src0) * D;

    double* conv_pre_t = tr.conv_pre.data() + static_cast<std::size_t>(t) * C;
    double* conv_out_t = tr.conv_out.data() + static_cast<std::size_t>(t) * C;
    for (int c = 0; c < C; ++c) {
      const double* wrow = p.conv_w.data() + (static_cast<std::size_t>(c) * k + skip) * D;
      const double pre = p.conv_b[c] + kernels::dot(wrow, xwin, win);
      conv_pre_t[c] = pre;
      conv_out_t[c] = pre > 0.0 ? pre : 0.0;
    }

    double* h1_pre_t = tr.h1_pre.data() + static_cast<std::size_t>(t) * H;
    double* h1_t = tr.h1.data() + static_cast<std::size_t>(t) * H;
    for (int h = 0; h < H; ++h) {
      const double pre =
          p.attn1_b[h] + kernels::dot(p.attn1_w.data() + static_cast<std::size_t>(h) * C,
                                      conv_out_t, C);
      h1_pre_t[h] = pre;
      h1_t[h] = pre > 0.0 ? pre : 0.0;
    }

    tr.lambda[t] = sigmoid(p.attn2_b[0] + kernels::dot(p.attn2_w.data(), h1_t, H));
  }
}

// Weighted pooling and classifier; requires tr.lambda to be set.
void run_pooling_and_classifier(const ModelParams& p, ForwardTrace& tr) {
  const int T = tr.T, D = tr.D;
  const int G = p.cfg.clf_hidden;

  tr.pooled.assign(D, 0.0);
  for (int t = 0; t < T; ++t) {
    kernels::axpy(tr.lambda[t], tr.x.data() + static_cast<std::size_t>(t) * D,
                  tr.pooled.data(), D);
  }

  tr.z_pre.assign(G, 0.0);
  tr.z.assign(G, 0.0);
  for (int g = 0; g < G; ++g) {
    const double pre =
        p.clf1_b[g] + kernels::dot(p.clf1_w.data() + static_cast<std::size_t>(g) * D,
                                   tr.pooled.data(), D);
    tr.z_pre[g] = pre;
    tr.z[g] = pre > 0.0 ? pre : 0.0;
  }
  tr.logit = p.clf2_b[0] + kernels::dot(p.clf2_w.data(), tr.z.data(), G);
  tr.prob = sigmoid(tr.logit);
}

}  // namespace

void validate(const ModelConfig& cfg) {
  if (cfg.D < 1 || cfg.conv_kernel < 1 || cfg.channels() < 1 || cfg.attn_hidden < 1 ||
      cfg.clf_hidden < 1) {
    throw std::invalid_argument("all model dimensions must be >= 1");
  }
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each_tensor(*this, [&](const char*, const std::vector<double>& t) {
    for (double v : t) {
      if (!std::isfinite(v)) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

bool ModelParams::same_shape(const ModelParams& other) const {
  return conv_w.size() == other.conv_w.size() && conv_b.size() == other.conv_b.size() &&
         attn1_w.size() == other.attn1_w.size() && attn1_b.size() == other.attn1_b.size() &&
         attn2_w.size() == other.attn2_w.size() && attn2_b.size() == other.attn2_b.size() &&
         clf1_w.size() == other.clf1_w.size() && clf1_b.size() == other.clf1_b.size() &&
         clf2_w.size() == other.clf2_w.size() && clf2_b.size() == other.clf2_b.size();
}

ModelParams init_params(const ModelConfig& cfg) {
  validate(cfg);
  const int D = cfg.D, C = cfg.channels(), H = cfg.attn_hidden, G = cfg.clf_hidden,
            k = cfg.conv_kernel;

  ModelParams p;
  p.cfg = cfg;
  p.conv_w.resize(static_cast<std::size_t>(C) * k * D);
  p.conv_b.assign(C, 0.0);
  p.attn1_w.resize(static_cast<std::size_t>(H) * C);
  p.attn1_b.assign(H, 0.0);
  p.attn2_w.resize(H);
  p.attn2_b.assign(1, 0.0);
  p.clf1_w.resize(static_cast<std::size_t>(G) * D);
  p.clf1_b.assign(G, 0.0);
  p.clf2_w.resize(G);
  p.clf2_b.assign(1, 0.0);

  Rng rng(mix_seed(cfg.seed, 0x1217));
  fill_uniform(rng, p.conv_w, k * D);
  fill_uniform(rng, p.attn1_w, C);
  fill_uniform(rng, p.attn2_w, H);
  fill_uniform(rng, p.clf1_w, D);
  fill_uniform(rng, p.clf2_w, G);
  return p;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  z.cfg = p.cfg;
  z.conv_w.assign(p.conv_w.size(), 0.0);
  z.conv_b.assign(p.conv_b.size(), 0.0);
  z.attn1_w.assign(p.attn1_w.size(), 0.0);
  z.attn1_b.assign(p.attn1_b.size(), 0.0);
  z.attn2_w.assign(p.attn2_w.size(), 0.0);
  z.attn2_b.assign(p.attn2_b.size(), 0.0);
  z.clf1_w.assign(p.clf1_w.size(), 0.0);
  z.clf1_b.assign(p.clf1_b.size(), 0.0);
  z.clf2_w.assign(p.clf2_w.size(), 0.0);
  z.clf2_b.assign(p.clf2_b.size(), 0.0);
  return z;
}

std::vector<double> attention_scores(const ModelParams& params, const FeatureSequence& seq) {
  check_dims(params, seq);
  ForwardTrace tr;
  tr.T = static_cast<int>(seq.T);
  tr.D = static_cast<int>(seq.D);
  tr.x = to_double(seq);
  run_attention(params, tr);
  return std::move(tr.lambda);
}

ForwardTrace forward(const ModelParams& params, const FeatureSequence& seq) {
  check_dims(params, seq);
  ForwardTrace tr;
  tr.T = static_cast<int>(seq.T);
  tr.D = static_cast<int>(seq.D);
  tr.x = to_double(seq);
  run_attention(params, tr);
  run_pooling_and_classifier(params, tr);
  return tr;
}

ForwardTrace forward_with_fixed_lambda(const ModelParams& params, const FeatureSequence& seq,
                                       std::span<const double> lambda) {
  check_dims(params, seq);
  if (lambda.size() != seq.T) {
    throw std::invalid_argument("fixed lambda length does not match T");
  }
  ForwardTrace tr;
  tr.T = static_cast<int>(seq.T);
  tr.D = static_cast<int>(seq.D);
  tr.x = to_double(seq);
  tr.lambda.assign(lambda.begin(), lambda.end());
  tr.fixed_lambda = true;
  run_pooling_and_classifier(params, tr);
  return tr;
}

double classify_single(const ModelParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.cfg.D) {
    throw std::invalid_argument("classify_single: vector length does not match model D");
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("classify_single: non-finite input");
    }
  }
  const int G = params.cfg.clf_hidden;
  std::vector<double> z(G);
  for (int g = 0; g < G; ++g) {
    const double pre =
        params.clf1_b[g] +
        kernels::dot(params.clf1_w.data() + static_cast<std::size_t>(g) * params.cfg.D,
                     x.data(), x.size());
    z[g] = pre > 0.0 ? pre : 0.0;
  }
  return sigmoid(params.clf2_b[0] + kernels::dot(params.clf2_w.data(), z.data(), G));
}

void accumulate_grads(const ModelParams& params, const ForwardTrace& tr,
                      std::span<const double> dlambda, double dprob, ParamGrads& grads) {
  if (params.cfg.D != grads.cfg.D || params.conv_w.size() != grads.conv_w.size() ||
      params.attn1_w.size() != grads.attn1_w.size() ||
      params.clf1_w.size() != grads.clf1_w.size()) {
    throw std::invalid_argument("gradient container shape does not match params");
  }
  if (static_cast<int>(dlambda.size()) != tr.T) {
    throw std::invalid_argument("upstream dlambda length does not match trace T");
  }

  const int T = tr.T, D = tr.D;
  const int C = params.cfg.channels();
  const int H = params.cfg.attn_hidden;
  const int G = params.cfg.clf_hidden;
  const int k = params.cfg.conv_kernel;

  // Classifier head.
  const double dlogit = dprob * tr.prob * (1.0 - tr.prob);
  kernels::axpy(dlogit, tr.z.data(), grads.clf2_w.data(), G);
  grads.clf2_b[0] += dlogit;

  std::vector<double> dpooled(D, 0.0);
  for (int g = 0; g < G; ++g) {
    const double dz = dlogit * params.clf2_w[g];
    const double dz_pre = tr.z_pre[g] > 0.0 ? dz : 0.0;
    if (dz_pre != 0.0) {
      kernels::axpy(dz_pre, tr.pooled.data(),
                    grads.clf1_w.data() + static_cast<std::size_t>(g) * D, D);
      grads.clf1_b[g] += dz_pre;
      kernels::axpy(dz_pre, params.clf1_w.data() + static_cast<std::size_t>(g) * D,
                    dpooled.data(), D);
    }
  }

  // Pooling routes the classifier gradient into each lambda_t.
  std::vector<double> dlam(dlambda.begin(), dlambda.end());
  for (int t = 0; t < T; ++t) {
    dlam[t] += kernels::dot(dpooled.data(), tr.x.data() + static_cast<std::size_t>(t) * D, D);
  }

  if (tr.fixed_lambda) {
    return;  // lambda was injected; there is no attention branch to unwind
  }

  // Attention head, unwound per time step.
  std::vector<double> dh1(H), dh1_pre(H), dconv(C);
  for (int t = 0; t < T; ++t) {
    const double lam = tr.lambda[t];
    const double dlogit2 = dlam[t] * lam * (1.0 - lam);
    if (dlogit2 == 0.0) {
      continue;
    }
    const double* h1_t = tr.h1.data() + static_cast<std::size_t>(t) * H;
    const double* h1_pre_t = tr.h1_pre.data() + static_cast<std::size_t>(t) * H;
    const double* conv_out_t = tr.conv_out.data() + static_cast<std::size_t>(t) * C;
    const double* conv_pre_t = tr.conv_pre.data() + static_cast<std::size_t>(t) * C;

    kernels::axpy(dlogit2, h1_t, grads.attn2_w.data(), H);
    grads.attn2_b[0] += dlogit2;

    for (int h = 0; h < H; ++h) {
      dh1[h] = dlogit2 * params.attn2_w[h];
      dh1_pre[h] = h1_pre_t[h] > 0.0 ? dh1[h] : 0.0;
    }

    std::fill(dconv.begin(), dconv.end(), 0.0);
    for (int h = 0; h < H; ++h) {
      if (dh1_pre[h] == 0.0) {
        continue;
      }
      kernels::axpy(dh1_pre[h], conv_out_t,
                    grads.attn1_w.data() + static_cast<std::size_t>(h) * C, C);
      grads.attn1_b[h] += dh1_pre[h];
      kernels::axpy(dh1_pre[h], params.attn1_w.data() + static_cast<std::size_t>(h) * C,
                    dconv.data(), C);
    }

    const int skip = std::max(0, (k - 1) - t);
    const int src0 = t - (k - 1) + skip;
    const std::size_t win = static_cast<std::size_t>(k - skip) * D;
    const double* xwin = tr.x.data() + static_cast<std::size_t>(src0) * D;
    for (int c = 0; c < C; ++c) {
      const double dconv_pre = conv_pre_t[c] > 0.0 ? dconv[c] : 0.0;
      if (dconv_pre == 0.0) {
        continue;
      }
      grads.conv_b[c] += dconv_pre;
      kernels::axpy(dconv_pre, xwin,
                    grads.conv_w.data() + (static_cast<std::size_t>(c) * k + skip) * D, win);
    }
  }
}

}  // namespace tanom
