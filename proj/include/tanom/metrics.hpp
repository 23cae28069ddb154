// Ranking metrics (ROC AUC, average precision) and the four-granularity
// evaluation report: video, segment, frame, and frame-level proposal scores
// pooled across all test videos.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tanom/manifest.hpp"
#include "tanom/model.hpp"
#include "tanom/proposals.hpp"

namespace tanom {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // {0,1}, same length as scores
};

// Probability that a uniformly random positive outranks a uniformly random
// negative, ties counted 1/2 (rank-sum formulation). Throws std::domain_error
// unless both classes are present.
double auc(const ScoredSet& s);

// Non-interpolated average precision: mean over positives of the precision at
// that positive's rank. Ties are ordered score-descending then index-ascending.
// Throws std::domain_error when there is no positive.
double ap(const ScoredSet& s);

enum class SegmentScoreKind { Lambda, Tcam, Wtcam };

struct EvalOptions {
  double thr = kDefaultThreshold;
  SegmentScoreKind segment_score = SegmentScoreKind::Wtcam;
};

struct GranularityMetrics {
  double auc = 0.0;
  double ap = 0.0;
};

struct MacroAverage {
  double mean_auc = 0.0;
  double mean_ap = 0.0;
  int videos_counted = 0;  // videos with both classes present at this grain
};

struct EvalReport {
  GranularityMetrics video;
  GranularityMetrics segment;
  GranularityMetrics frame_proposal;
  GranularityMetrics frame;
  std::size_t video_count = 0;
  std::size_t segment_count = 0;
  std::size_t frame_count = 0;
  // Per-video macro averages, supplementary to the pooled numbers above.
  MacroAverage segment_macro;
  MacroAverage frame_macro;
};

// Everything evaluation needs from one video. Kept separable from the model
// pass so the pooling logic can be tested on hand-built scores.
struct VideoScores {
  std::string id;
  int label = 0;
  std::vector<std::uint8_t> segment_labels;
  std::uint32_t frames_per_segment = 16;
  double prob = 0.0;                   // video-level classifier output
  std::vector<double> segment_scores;  // chosen per-segment score
  std::vector<Proposal> proposals;
};

VideoScores score_video(const ModelParams& params, const LoadedVideo& video,
                        const EvalOptions& opts);

EvalReport pool_and_report(const std::vector<VideoScores>& videos);

// Requires segment labels on every record; throws ConfigError otherwise.
EvalReport evaluate(const ModelParams& params, const std::vector<LoadedVideo>& data,
                    const EvalOptions& opts = {});

std::string format_report(const EvalReport& report);
std::string format_report_line(const EvalReport& report);

}  // namespace tanom
