// Inference-time post-processing: per-segment activation maps, thresholding,
// connected-component extraction, and scored temporal proposals.
//
// tcam_t is the classifier's response to segment t alone; wtcam_t multiplies
// it by the attention coefficient. Steps whose weighted score clears the
// threshold form candidate runs; each maximal run becomes one proposal scored
// by its mean weighted activation, with the longest run flagged (ties go to
// the earliest).

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tanom/model.hpp"

namespace tanom {

struct ScoreTrace {
  std::vector<double> lambda;  // attention coefficients
  std::vector<double> tcam;    // per-segment classifier response, in (0,1)
  std::vector<double> wtcam;   // lambda * tcam, elementwise
};

struct Interval {
  int start = 0;  // inclusive segment indices
  int end = 0;

  int length() const { return end - start + 1; }
  bool operator==(const Interval&) const = default;
};

struct Proposal {
  int t_start = 0;
  int t_end = 0;  // inclusive
  double score = 0.0;
  std::int64_t frame_start = 0;
  std::int64_t frame_end = 0;  // inclusive
  bool largest = false;
};

constexpr double kDefaultThreshold = 0.35;

ScoreTrace compute_tcam(const ModelParams& params, const FeatureSequence& seq);

// mask_t = (wtcam_t >= thr)
std::vector<std::uint8_t> threshold_filter(const ScoreTrace& trace, double thr = kDefaultThreshold);

// Linear interpolation of per-segment values onto the frame axis. Segment t
// is anchored at frame position (t + 0.5) * frames_per_segment; frames before
// the first anchor and after the last take the boundary value. Output length
// is T * frames_per_segment.
std::vector<double> interpolate_frames(std::span<const double> values,
                                       std::uint32_t frames_per_segment);

// Maximal runs of true, in increasing start order.
std::vector<Interval> connected_components(std::span<const std::uint8_t> mask);

// Mean weighted activation over the interval.
double score_proposal(const ScoreTrace& trace, Interval interval);

// Full pipeline. Proposals are sorted by score descending (ties: earlier
// start first); exactly one carries the largest-component flag when any exist.
std::vector<Proposal> generate_proposals(const ModelParams& params, const FeatureSequence& seq,
                                         double thr = kDefaultThreshold,
                                         std::uint32_t frames_per_segment = 16);

void write_proposals(std::span<const Proposal> proposals, const std::string& video_id,
                     std::ostream& os);

}  // namespace tanom
