#include "tanom/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "tanom/rng.hpp"

namespace tanom {

namespace {

// Stream ids for the independent RNG consumers.
constexpr std::uint64_t kShuffleStream = 0x51u;
constexpr std::uint64_t kAugmentStream = 0xA6u;

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

// Forward both views, add the example's gradient into `batch_grads`, and
// return the loss breakdown.
LossBreakdown example_pass(const ModelParams& params, const LoadedVideo& video,
                           const AugmentConfig& aug, const LossWeights& w, Rng& aug_rng,
                           ParamGrads& batch_grads) {
  const ViewPair vp = make_views(video.seq, aug, aug_rng);
  const ForwardTrace ta = forward(params, vp.view_a);
  const ForwardTrace tb = forward(params, vp.view_b);
  const LossBreakdown lb = total_loss(ta, tb, video.rec.label, w);
  const LossGrads lg = loss_grads(ta, tb, video.rec.label, w);
  accumulate_grads(params, ta, lg.dlambda_a, lg.dprob_a, batch_grads);
  accumulate_grads(params, tb, lg.dlambda_b, lg.dprob_b, batch_grads);
  return lb;
}

void scale_grads(ParamGrads& grads, double factor) {
  for_each_tensor(grads, [&](const char*, std::vector<double>& t) {
    for (auto& v : t) {
      v *= factor;
    }
  });
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.lr_phase1 > 0.0) || !(cfg.lr_phase2 > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (cfg.epochs_phase1 < 0 || cfg.epochs_phase2 < 0) {
    throw ConfigError("epoch counts must be nonnegative");
  }
  if (cfg.batch_size < 1) {
    throw ConfigError("batch_size must be >= 1");
  }
  if (cfg.augment.block_len < 1) {
    throw ConfigError("augment block length must be >= 1");
  }
  if (!(cfg.weights.alpha >= 0.0 && cfg.weights.beta >= 0.0 && cfg.weights.gamma >= 0.0)) {
    throw ConfigError("loss weights must be nonnegative and finite");
  }
}

TrainResult train(const ModelConfig& model_cfg, const std::vector<LoadedVideo>& data,
                  const TrainConfig& cfg, const CheckpointHook& on_checkpoint) {
  validate(cfg);
  if (data.empty()) {
    throw ConfigError("training set is empty");
  }
  for (const auto& video : data) {
    if (static_cast<int>(video.seq.D) != model_cfg.D) {
      throw ConfigError("feature dimension mismatch for '" + video.rec.id + "'");
    }
  }

  TrainResult result;
  result.params = init_params(model_cfg);
  AdamState adam = make_adam_state(result.params);

  Rng shuffle_rng(mix_seed(cfg.seed, kShuffleStream));
  Rng aug_rng(mix_seed(cfg.seed, kAugmentStream));

  const int total_epochs = cfg.epochs_phase1 + cfg.epochs_phase2;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }

  for (int epoch = 1; epoch <= total_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const int phase = epoch <= cfg.epochs_phase1 ? 1 : 2;
    const double lr = phase == 1 ? cfg.lr_phase1 : cfg.lr_phase2;

    shuffle_indices(order, shuffle_rng);

    LossBreakdown epoch_sum;
    std::size_t cursor = 0;
    int batch_id = 0;
    while (cursor < order.size()) {
      const std::size_t batch_end =
          std::min(cursor + static_cast<std::size_t>(cfg.batch_size), order.size());
      const auto batch_n = static_cast<double>(batch_end - cursor);

      ParamGrads grads = zeros_like(result.params);
      for (std::size_t i = cursor; i < batch_end; ++i) {
        const LossBreakdown lb =
            example_pass(result.params, data[order[i]], cfg.augment, cfg.weights, aug_rng, grads);
        if (!std::isfinite(lb.total)) {
          throw TrainingError("divergence: non-finite loss in epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(batch_id) + " (video '" +
                              data[order[i]].rec.id + "')");
        }
        epoch_sum.cl += lb.cl;
        epoch_sum.sp += lb.sp;
        epoch_sum.sm += lb.sm;
        epoch_sum.a += lb.a;
        epoch_sum.total += lb.total;
      }
      scale_grads(grads, 1.0 / batch_n);
      adam_step(result.params, grads, adam, lr, cfg.adam);

      cursor = batch_end;
      ++batch_id;
    }

    const auto n = static_cast<double>(data.size());
    EpochStats stats;
    stats.epoch = epoch;
    stats.phase = phase;
    stats.lr = lr;
    stats.mean = {epoch_sum.cl / n, epoch_sum.sp / n, epoch_sum.sm / n, epoch_sum.a / n,
                  epoch_sum.total / n};
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.epochs.push_back(stats);

    if (on_checkpoint) {
      const bool phase1_end = epoch == cfg.epochs_phase1;
      const bool final_epoch = epoch == total_epochs;
      if (phase1_end || final_epoch) {
        on_checkpoint(result.params, epoch, phase, final_epoch);
      }
    }
  }

  // Zero-epoch runs still surface the untouched initialization.
  if (total_epochs == 0 && on_checkpoint) {
    on_checkpoint(result.params, 0, 1, true);
  }
  return result;
}

LossBreakdown evaluate_epoch(const ModelParams& params, const std::vector<LoadedVideo>& data,
                             const LossWeights& w, const AugmentConfig& augment) {
  if (data.empty()) {
    throw ConfigError("evaluate_epoch: empty dataset");
  }
  LossBreakdown sum;
  for (const auto& video : data) {
    const FeatureSequence view = identity_view(video.seq, augment);
    const ForwardTrace tr = forward(params, view);
    const LossBreakdown lb = total_loss(tr, tr, video.rec.label, w);
    sum.cl += lb.cl;
    sum.sp += lb.sp;
    sum.sm += lb.sm;
    sum.a += lb.a;
    sum.total += lb.total;
  }
  const auto n = static_cast<double>(data.size());
  return {sum.cl / n, sum.sp / n, sum.sm / n, sum.a / n, sum.total / n};
}

void write_trainlog(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot open trainlog for write: " + path.string());
  }
  os.precision(17);
  for (const auto& e : log.epochs) {
    os << "epoch=" << e.epoch << " phase=" << e.phase << " lr=" << e.lr << " cl=" << e.mean.cl
       << " sp=" << e.mean.sp << " sm=" << e.mean.sm << " a=" << e.mean.a
       << " total=" << e.mean.total << " seconds=" << e.seconds << '\n';
  }
  if (!os) {
    throw std::runtime_error("write failed on trainlog: " + path.string());
  }
}

}  // namespace tanom
