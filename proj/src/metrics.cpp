#include "tanom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tanom/error.hpp"

namespace tanom {

namespace {

void check_scored_set(const ScoredSet& s) {
  if (s.scores.size() != s.labels.size()) {
    throw std::invalid_argument("scores and labels must have equal length");
  }
  if (s.scores.empty()) {
    throw std::domain_error("empty scored set");
  }
  for (double v : s.scores) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite score");
    }
  }
  for (int l : s.labels) {
    if (l != 0 && l != 1) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
}

// Sort order: score descending, then index ascending (stable).
std::vector<std::size_t> ranking(const ScoredSet& s) {
  std::vector<std::size_t> idx(s.scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return s.scores[a] > s.scores[b];
  });
  return idx;
}

void append_video_scores(const VideoScores& v, ScoredSet& segment_pool, ScoredSet& frame_pool,
                         ScoredSet& proposal_pool) {
  const std::size_t T = v.segment_labels.size();
  if (v.segment_scores.size() != T) {
    throw std::invalid_argument("segment score length does not match labels for '" + v.id + "'");
  }

  for (std::size_t t = 0; t < T; ++t) {
    segment_pool.scores.push_back(v.segment_scores[t]);
    segment_pool.labels.push_back(v.segment_labels[t]);
  }

  const auto frame_scores = interpolate_frames(v.segment_scores, v.frames_per_segment);
  std::vector<double> proposal_frames(frame_scores.size(), 0.0);
  for (const auto& p : v.proposals) {
    for (std::int64_t f = p.frame_start; f <= p.frame_end; ++f) {
      proposal_frames[static_cast<std::size_t>(f)] = p.score;
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    for (std::uint32_t k = 0; k < v.frames_per_segment; ++k) {
      const std::size_t f = t * v.frames_per_segment + k;
      frame_pool.scores.push_back(frame_scores[f]);
      frame_pool.labels.push_back(v.segment_labels[t]);
      proposal_pool.scores.push_back(proposal_frames[f]);
      proposal_pool.labels.push_back(v.segment_labels[t]);
    }
  }
}

bool both_classes(const std::vector<std::uint8_t>& labels) {
  bool pos = false, neg = false;
  for (auto l : labels) {
    (l ? pos : neg) = true;
  }
  return pos && neg;
}

}  // namespace

double auc(const ScoredSet& s) {
  check_scored_set(s);
  const std::size_t n = s.scores.size();
  std::size_t n_pos = 0;
  for (int l : s.labels) {
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::domain_error("auc needs at least one positive and one negative");
  }

  // Rank-sum with midranks for ties.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && s.scores[idx[j]] == s.scores[idx[i]]) {
      ++j;
    }
    // Ranks i+1 .. j share the midrank.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (s.labels[idx[k]] == 1) {
        rank_sum_pos += midrank;
      }
    }
    i = j;
  }

  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double ap(const ScoredSet& s) {
  check_scored_set(s);
  std::size_t n_pos = 0;
  for (int l : s.labels) {
    n_pos += static_cast<std::size_t>(l);
  }
  if (n_pos == 0) {
    throw std::domain_error("ap needs at least one positive");
  }

  // Step curve over distinct score thresholds: equal scores enter as one
  // block, so permuting tied items cannot change the result.
  const auto idx = ranking(s);
  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::size_t block_tp = 0;
    while (j < idx.size() && s.scores[idx[j]] == s.scores[idx[i]]) {
      block_tp += static_cast<std::size_t>(s.labels[idx[j]]);
      ++j;
    }
    tp += block_tp;
    seen = j;
    if (block_tp > 0) {
      const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
      const double precision = static_cast<double>(tp) / static_cast<double>(seen);
      area += (recall - prev_recall) * precision;
      prev_recall = recall;
    }
    i = j;
  }
  return area;
}

VideoScores score_video(const ModelParams& params, const LoadedVideo& video,
                        const EvalOptions& opts) {
  if (!video.rec.segment_labels) {
    throw ConfigError("record '" + video.rec.id + "' has no segment_labels");
  }

  VideoScores out;
  out.id = video.rec.id;
  out.label = video.rec.label;
  out.segment_labels = *video.rec.segment_labels;
  out.frames_per_segment = video.rec.frames_per_segment;

  out.prob = forward(params, video.seq).prob;
  const ScoreTrace trace = compute_tcam(params, video.seq);
  switch (opts.segment_score) {
    case SegmentScoreKind::Lambda:
      out.segment_scores = trace.lambda;
      break;
    case SegmentScoreKind::Tcam:
      out.segment_scores = trace.tcam;
      break;
    case SegmentScoreKind::Wtcam:
      out.segment_scores = trace.wtcam;
      break;
  }
  out.proposals =
      generate_proposals(params, video.seq, opts.thr, video.rec.frames_per_segment);
  return out;
}

EvalReport pool_and_report(const std::vector<VideoScores>& videos) {
  if (videos.empty()) {
    throw ConfigError("evaluate: empty dataset");
  }

  ScoredSet video_pool, segment_pool, frame_pool, proposal_pool;
  for (const auto& v : videos) {
    video_pool.scores.push_back(v.prob);
    video_pool.labels.push_back(v.label);
    append_video_scores(v, segment_pool, frame_pool, proposal_pool);
  }

  EvalReport report;
  report.video = {auc(video_pool), ap(video_pool)};
  report.segment = {auc(segment_pool), ap(segment_pool)};
  report.frame = {auc(frame_pool), ap(frame_pool)};
  report.frame_proposal = {auc(proposal_pool), ap(proposal_pool)};
  report.video_count = videos.size();
  report.segment_count = segment_pool.scores.size();
  report.frame_count = frame_pool.scores.size();

  // Per-video macro averages over videos where both classes appear.
  for (const auto& v : videos) {
    if (!both_classes(v.segment_labels)) {
      continue;
    }
    ScoredSet seg, frm;
    for (std::size_t t = 0; t < v.segment_labels.size(); ++t) {
      seg.scores.push_back(v.segment_scores[t]);
      seg.labels.push_back(v.segment_labels[t]);
    }
    const auto frame_scores = interpolate_frames(v.segment_scores, v.frames_per_segment);
    for (std::size_t t = 0; t < v.segment_labels.size(); ++t) {
      for (std::uint32_t k = 0; k < v.frames_per_segment; ++k) {
        frm.scores.push_back(frame_scores[t * v.frames_per_segment + k]);
        frm.labels.push_back(v.segment_labels[t]);
      }
    }
    report.segment_macro.mean_auc += auc(seg);
    report.segment_macro.mean_ap += ap(seg);
    report.frame_macro.mean_auc += auc(frm);
    report.frame_macro.mean_ap += ap(frm);
    ++report.segment_macro.videos_counted;
    ++report.frame_macro.videos_counted;
  }
  if (report.segment_macro.videos_counted > 0) {
    const auto n = static_cast<double>(report.segment_macro.videos_counted);
    report.segment_macro.mean_auc /= n;
    report.segment_macro.mean_ap /= n;
    report.frame_macro.mean_auc /= n;
    report.frame_macro.mean_ap /= n;
  }
  return report;
}

EvalReport evaluate(const ModelParams& params, const std::vector<LoadedVideo>& data,
                    const EvalOptions& opts) {
  std::vector<VideoScores> scored;
  scored.reserve(data.size());
  for (const auto& video : data) {
    scored.push_back(score_video(params, video, opts));
  }
  return pool_and_report(scored);
}

std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed;
  os << "              video    segment  frame-prop  frame\n";
  os << "  AUC        " << r.video.auc << "   " << r.segment.auc << "   " << r.frame_proposal.auc
     << "      " << r.frame.auc << '\n';
  os << "  AP         " << r.video.ap << "   " << r.segment.ap << "   " << r.frame_proposal.ap
     << "      " << r.frame.ap << '\n';
  os << "  pools: " << r.video_count << " videos, " << r.segment_count << " segments, "
     << r.frame_count << " frames\n";
  if (r.segment_macro.videos_counted > 0) {
    os << "  macro (per-video mean over " << r.segment_macro.videos_counted
       << " mixed videos): segment AUC " << r.segment_macro.mean_auc << ", segment AP "
       << r.segment_macro.mean_ap << ", frame AUC " << r.frame_macro.mean_auc << ", frame AP "
       << r.frame_macro.mean_ap << '\n';
  }
  return os.str();
}

std::string format_report_line(const EvalReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "report video_auc=" << r.video.auc << " video_ap=" << r.video.ap
     << " segment_auc=" << r.segment.auc << " segment_ap=" << r.segment.ap
     << " frame_proposal_auc=" << r.frame_proposal.auc
     << " frame_proposal_ap=" << r.frame_proposal.ap << " frame_auc=" << r.frame.auc
     << " frame_ap=" << r.frame.ap;
  return os.str();
}

}  // namespace tanom
