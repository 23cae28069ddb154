#include "tanom/proposals.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace tanom {

ScoreTrace compute_tcam(const ModelParams& params, const FeatureSequence& seq) {
  ScoreTrace trace;
  trace.lambda = attention_scores(params, seq);
  trace.tcam.resize(seq.T);
  trace.wtcam.resize(seq.T);

  std::vector<double> row(seq.D);
  for (std::uint32_t t = 0; t < seq.T; ++t) {
    const auto src = seq.row(t);
    for (std::uint32_t d = 0; d < seq.D; ++d) {
      row[d] = static_cast<double>(src[d]);
    }
    trace.tcam[t] = classify_single(params, row);
    trace.wtcam[t] = trace.lambda[t] * trace.tcam[t];
  }
  return trace;
}

std::vector<std::uint8_t> threshold_filter(const ScoreTrace& trace, double thr) {
  std::vector<std::uint8_t> mask(trace.wtcam.size());
  for (std::size_t t = 0; t < mask.size(); ++t) {
    mask[t] = trace.wtcam[t] >= thr ? 1 : 0;
  }
  return mask;
}

std::vector<double> interpolate_frames(std::span<const double> values,
                                       std::uint32_t frames_per_segment) {
  if (values.empty() || frames_per_segment < 1) {
    throw std::invalid_argument("interpolate_frames: need T >= 1 and frames_per_segment >= 1");
  }
  const std::size_t T = values.size();
  const double fps = static_cast<double>(frames_per_segment);
  std::vector<double> out(T * frames_per_segment);

  for (std::size_t f = 0; f < out.size(); ++f) {
    // Anchor of segment t sits at (t + 0.5) * fps on the frame axis.
    const double pos = static_cast<double>(f) / fps - 0.5;
    if (pos <= 0.0) {
      out[f] = values.front();
    } else if (pos >= static_cast<double>(T - 1)) {
      out[f] = values.back();
    } else {
      const auto lo = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(lo);
      out[f] = values[lo] + frac * (values[lo + 1] - values[lo]);
    }
  }
  return out;
}

std::vector<Interval> connected_components(std::span<const std::uint8_t> mask) {
  std::vector<Interval> runs;
  const int n = static_cast<int>(mask.size());
  int t = 0;
  while (t < n) {
    if (!mask[t]) {
      ++t;
      continue;
    }
    const int start = t;
    while (t < n && mask[t]) {
      ++t;
    }
    runs.push_back(Interval{start, t - 1});
  }
  return runs;
}

double score_proposal(const ScoreTrace& trace, Interval interval) {
  const int T = static_cast<int>(trace.wtcam.size());
  if (interval.start < 0 || interval.end < interval.start || interval.end >= T) {
    throw std::invalid_argument("score_proposal: invalid interval");
  }
  double sum = 0.0;
  for (int t = interval.start; t <= interval.end; ++t) {
    sum += trace.wtcam[t];
  }
  return sum / std::max(1, interval.length());
}

std::vector<Proposal> generate_proposals(const ModelParams& params, const FeatureSequence& seq,
                                         double thr, std::uint32_t frames_per_segment) {
  const ScoreTrace trace = compute_tcam(params, seq);
  const auto mask = threshold_filter(trace, thr);
  const auto runs = connected_components(mask);

  std::vector<Proposal> proposals;
  proposals.reserve(runs.size());
  std::size_t largest_idx = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Interval& run = runs[i];
    Proposal p;
    p.t_start = run.start;
    p.t_end = run.end;
    p.score = score_proposal(trace, run);
    p.frame_start = static_cast<std::int64_t>(run.start) * frames_per_segment;
    p.frame_end = static_cast<std::int64_t>(run.end + 1) * frames_per_segment - 1;
    proposals.push_back(p);
    if (run.length() > runs[largest_idx].length()) {
      largest_idx = i;  // strict >, so ties keep the earliest run
    }
  }
  if (!proposals.empty()) {
    proposals[largest_idx].largest = true;
  }

  std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.t_start < b.t_start;
  });
  return proposals;
}

void write_proposals(std::span<const Proposal> proposals, const std::string& video_id,
                     std::ostream& os) {
  os.precision(17);
  for (const auto& p : proposals) {
    os << "id=" << video_id << " t_start=" << p.t_start << " t_end=" << p.t_end
       << " frame_start=" << p.frame_start << " frame_end=" << p.frame_end << " score=" << p.score
       << " largest=" << (p.largest ? 1 : 0) << '\n';
  }
}

}  // namespace tanom
