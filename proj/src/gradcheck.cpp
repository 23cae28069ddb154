#include "tanom/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tanom/augment.hpp"
#include "tanom/losses.hpp"
#include "tanom/model.hpp"
#include "tanom/rng.hpp"

namespace tanom {

namespace {

constexpr double kDenomFloor = 1e-5;

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kDenomFloor});
}

FeatureSequence random_sequence(Rng& rng, int T, int D) {
  FeatureSequence seq;
  seq.id = "gc";
  seq.T = static_cast<std::uint32_t>(T);
  seq.D = static_cast<std::uint32_t>(D);
  seq.data.resize(static_cast<std::size_t>(T) * D);
  for (auto& v : seq.data) {
    v = static_cast<float>(rng.gaussian());
  }
  return seq;
}

// Random biases too, so the zero-bias symmetry of init does not mask errors.
void jitter_params(Rng& rng, ModelParams& p) {
  for_each_tensor(p, [&](const char*, std::vector<double>& t) {
    for (auto& v : t) {
      v += 0.2 * rng.gaussian();
    }
  });
}

// Central differences assume the objective is smooth across the stencil. A
// ReLU pre-activation within `margin` of zero can flip inside +-epsilon and
// invalidate the estimate without the gradient being wrong, so such draws are
// rejected and redrawn.
double min_relu_margin(const ForwardTrace& tr) {
  double margin = std::numeric_limits<double>::infinity();
  for (double v : tr.conv_pre) {
    margin = std::min(margin, std::abs(v));
  }
  for (double v : tr.h1_pre) {
    margin = std::min(margin, std::abs(v));
  }
  for (double v : tr.z_pre) {
    margin = std::min(margin, std::abs(v));
  }
  return margin;
}

}  // namespace

GradCheckResult run_gradcheck(const GradCheckConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0x9C));
  const LossWeights weights{};  // default objective weights

  GradCheckResult result;
  result.instances = cfg.instances;

  constexpr double kKinkMargin = 1e-3;
  constexpr int kMaxDraws = 64;

  for (int inst = 0; inst < cfg.instances; ++inst) {
    ModelConfig mc;
    ModelParams params;
    ViewPair vp;
    int y = 0;
    for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
      mc.D = static_cast<int>(rng.uniform_int(2, cfg.max_D));
      mc.conv_kernel = static_cast<int>(rng.uniform_int(1, 3));
      mc.conv_channels = static_cast<int>(rng.uniform_int(2, 6));
      mc.attn_hidden = static_cast<int>(rng.uniform_int(3, 8));
      mc.clf_hidden = static_cast<int>(rng.uniform_int(2, 6));
      mc.seed = rng.next_u64();

      const int T = static_cast<int>(rng.uniform_int(2, cfg.max_T));
      const FeatureSequence seq = random_sequence(rng, T, mc.D);
      y = static_cast<int>(rng.uniform_below(2));

      AugmentConfig aug;
      aug.block_len = 3;
      Rng view_rng(rng.next_u64());
      vp = make_views(seq, aug, view_rng);

      params = init_params(mc);
      jitter_params(rng, params);

      const double margin = std::min(min_relu_margin(forward(params, vp.view_a)),
                                     min_relu_margin(forward(params, vp.view_b)));
      if (margin > kKinkMargin) {
        break;
      }
    }

    const auto objective = [&](const ModelParams& p) {
      const ForwardTrace ta = forward(p, vp.view_a);
      const ForwardTrace tb = forward(p, vp.view_b);
      return total_loss(ta, tb, y, weights).total;
    };

    // Analytic gradients of the full objective.
    ParamGrads grads = zeros_like(params);
    {
      const ForwardTrace ta = forward(params, vp.view_a);
      const ForwardTrace tb = forward(params, vp.view_b);
      const LossGrads lg = loss_grads(ta, tb, y, weights);
      accumulate_grads(params, ta, lg.dlambda_a, lg.dprob_a, grads);
      accumulate_grads(params, tb, lg.dlambda_b, lg.dprob_b, grads);
    }
    if (cfg.perturb && inst == 0) {
      grads.conv_w[0] += 0.05;
    }

    // Central differences, coordinate by coordinate.
    for_each_tensor(params, [&](const char* name, std::vector<double>& tensor) {
      const std::vector<double>* grad_tensor = nullptr;
      for_each_tensor(grads, [&](const char* gname, const std::vector<double>& gt) {
        if (std::string_view(gname) == name) {
          grad_tensor = &gt;
        }
      });
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        const double saved = tensor[i];
        tensor[i] = saved + cfg.epsilon;
        const double plus = objective(params);
        tensor[i] = saved - cfg.epsilon;
        const double minus = objective(params);
        tensor[i] = saved;

        const double fd = (plus - minus) / (2.0 * cfg.epsilon);
        const double err = rel_err((*grad_tensor)[i], fd);
        ++result.coords_checked;
        if (err > result.max_rel_err) {
          result.max_rel_err = err;
          result.worst_coord = std::string(name) + "[" + std::to_string(i) + "]";
        }
      }
    });
  }
  return result;
}

}  // namespace tanom
