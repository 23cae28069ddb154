// Synthetic planted-anomaly dataset generator.
//
// Normal segments are isotropic Gaussian noise around a fixed mean along a
// seeded unit direction. An anomalous video gets one contiguous window whose
// rows are shifted along a second direction orthogonal to the first, with a
// magnitude well above the noise scale. Video-level separation is therefore
// easy while localization (finding the window) is the actual problem.

#pragma once

#include <cstdint>
#include <vector>

#include "tanom/error.hpp"
#include "tanom/features.hpp"
#include "tanom/manifest.hpp"

namespace tanom {

struct IntRange {
  int lo = 0;
  int hi = 0;  // inclusive
};

struct SynthConfig {
  int num_videos = 40;
  IntRange t_range{20, 40};
  int D = 16;
  double anomaly_fraction = 0.5;
  IntRange window_range{4, 8};
  double noise_scale = 0.25;
  std::uint64_t seed = 1;
};

// Throws ConfigError on an invalid configuration (notably an anomaly window
// that cannot fit the shortest sequence).
void validate(const SynthConfig& cfg);

struct SynthDataset {
  std::vector<FeatureSequence> sequences;
  std::vector<VideoRecord> records;  // feature_path pre-filled as features/<id>.fseq
};

// Pure function of cfg: same config, bitwise-identical dataset.
SynthDataset generate_synthetic(const SynthConfig& cfg);

}  // namespace tanom
