// Mini-batch training loop.
//
// Two learning-rate phases (1e-4 for the first 10 epochs, 1e-5 for the
// remaining 40, by default). Each epoch shuffles the records with a seeded
// stream, draws a fresh view pair per example, runs both views forward,
// backpropagates the combined objective, and applies one Adam step per batch
// with batch-mean gradients. Sequences keep their native lengths; there is no
// padding. Everything is deterministic in (seed, data, config).

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "tanom/adam.hpp"
#include "tanom/error.hpp"
#include "tanom/augment.hpp"
#include "tanom/losses.hpp"
#include "tanom/manifest.hpp"
#include "tanom/model.hpp"

namespace tanom {

struct TrainConfig {
  double lr_phase1 = 1e-4;
  int epochs_phase1 = 10;
  double lr_phase2 = 1e-5;
  int epochs_phase2 = 40;
  int batch_size = 8;
  LossWeights weights;
  AugmentConfig augment;
  AdamConfig adam;
  std::uint64_t seed = 1;
};

void validate(const TrainConfig& cfg);

struct EpochStats {
  int epoch = 0;  // 1-based
  int phase = 1;
  double lr = 0.0;
  LossBreakdown mean;  // per-example means over the epoch
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
};

void write_trainlog(const TrainLog& log, const std::filesystem::path& path);

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

// Called at the end of each phase and after the final epoch.
using CheckpointHook = std::function<void(const ModelParams&, int epoch, int phase, bool final)>;

TrainResult train(const ModelConfig& model_cfg, const std::vector<LoadedVideo>& data,
                  const TrainConfig& cfg, const CheckpointHook& on_checkpoint = {});

// Deterministic loss report over a dataset: identity views, no mutation.
LossBreakdown evaluate_epoch(const ModelParams& params, const std::vector<LoadedVideo>& data,
                             const LossWeights& w, const AugmentConfig& augment);

}  // namespace tanom
