// Block-sampling augmentation: split a sequence into fixed-size blocks of
// length L and keep one randomly chosen row per block. Doing this twice gives
// two slightly different views of the same video; the alignment loss pulls
// their attention coefficients together during training. Inference always
// runs on the full, un-augmented sequence.

#pragma once

#include <cstdint>
#include <vector>

#include "tanom/features.hpp"
#include "tanom/rng.hpp"

namespace tanom {

struct AugmentConfig {
  int block_len = 3;
  std::uint64_t seed = 0;  // stream id for callers that derive their own Rng
};

struct ViewPair {
  FeatureSequence view_a;
  FeatureSequence view_b;
  std::vector<std::uint32_t> indices_a;  // chosen source row per block
  std::vector<std::uint32_t> indices_b;
};

// Both views have ceil(T/L) rows; the final block is short when L does not
// divide T. A and B draw independently, so they may coincide on some blocks.
ViewPair make_views(const FeatureSequence& seq, const AugmentConfig& cfg, Rng& rng);

// Deterministic counterpart: the first row of each block. Used for
// evaluation-time loss reporting and tests.
FeatureSequence identity_view(const FeatureSequence& seq, const AugmentConfig& cfg);

}  // namespace tanom
