#include "tanom/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "tanom/rng.hpp"

namespace tanom {

namespace {

std::vector<double> random_unit_vector(Rng& rng, int dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& x : v) {
      x = rng.gaussian();
      norm2 += x * x;
    }
  } while (norm2 < 1e-12);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) {
    x *= inv;
  }
  return v;
}

// Unit vector orthogonal to u, via Gram-Schmidt on fresh Gaussian draws.
std::vector<double> orthogonal_unit_vector(Rng& rng, const std::vector<double>& u) {
  const int dim = static_cast<int>(u.size());
  while (true) {
    std::vector<double> v = random_unit_vector(rng, dim);
    double proj = 0.0;
    for (int i = 0; i < dim; ++i) {
      proj += v[i] * u[i];
    }
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      v[i] -= proj * u[i];
      norm2 += v[i] * v[i];
    }
    if (norm2 < 1e-8) {
      continue;  // nearly collinear draw, retry
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) {
      x *= inv;
    }
    return v;
  }
}

std::string video_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "v%04d", index);
  return buf;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.num_videos < 1) {
    throw ConfigError("num_videos must be >= 1");
  }
  if (cfg.t_range.lo < 1 || cfg.t_range.lo > cfg.t_range.hi) {
    throw ConfigError("invalid t_range");
  }
  if (cfg.D < 1) {
    throw ConfigError("D must be >= 1");
  }
  if (!(cfg.anomaly_fraction >= 0.0 && cfg.anomaly_fraction <= 1.0)) {
    throw ConfigError("anomaly_fraction must lie in [0, 1]");
  }
  if (cfg.window_range.lo < 1 || cfg.window_range.lo > cfg.window_range.hi) {
    throw ConfigError("invalid anomaly_window_range");
  }
  if (cfg.window_range.hi > cfg.t_range.lo) {
    throw ConfigError("infeasible anomaly window: max window " +
                      std::to_string(cfg.window_range.hi) + " exceeds min T " +
                      std::to_string(cfg.t_range.lo));
  }
  if (cfg.noise_scale < 0.0) {
    throw ConfigError("noise_scale must be >= 0");
  }
  if (cfg.anomaly_fraction > 0.0 && cfg.D < 2) {
    throw ConfigError("D must be >= 2 to plant anomalies along an orthogonal direction");
  }
}

SynthDataset generate_synthetic(const SynthConfig& cfg) {
  validate(cfg);

  Rng rng(mix_seed(cfg.seed, 0x5D5ED));
  std::vector<double> normal_dir = random_unit_vector(rng, cfg.D);
  std::vector<double> anomaly_dir =
      cfg.D >= 2 ? orthogonal_unit_vector(rng, normal_dir) : std::vector<double>(cfg.D, 0.0);

  const double base_magnitude = 1.0;
  const double shift_magnitude = 2.0 + 8.0 * cfg.noise_scale;
  const int num_anomalous =
      static_cast<int>(std::llround(cfg.anomaly_fraction * cfg.num_videos));

  SynthDataset out;
  out.sequences.reserve(cfg.num_videos);
  out.records.reserve(cfg.num_videos);

  for (int i = 0; i < cfg.num_videos; ++i) {
    const bool anomalous = i < num_anomalous;
    const int T = static_cast<int>(rng.uniform_int(cfg.t_range.lo, cfg.t_range.hi));

    FeatureSequence seq;
    seq.id = video_id(i);
    seq.T = static_cast<std::uint32_t>(T);
    seq.D = static_cast<std::uint32_t>(cfg.D);
    seq.data.resize(static_cast<std::size_t>(T) * cfg.D);

    std::vector<std::uint8_t> seg_labels(T, 0);
    int win_start = 0, win_len = 0;
    if (anomalous) {
      win_len = static_cast<int>(rng.uniform_int(cfg.window_range.lo, cfg.window_range.hi));
      if (win_len > T) {
        throw ConfigError("infeasible anomaly window for T=" + std::to_string(T));
      }
      win_start = static_cast<int>(rng.uniform_int(0, T - win_len));
      for (int t = win_start; t < win_start + win_len; ++t) {
        seg_labels[t] = 1;
      }
    }

    for (int t = 0; t < T; ++t) {
      const bool in_window = anomalous && t >= win_start && t < win_start + win_len;
      for (int d = 0; d < cfg.D; ++d) {
        double v = base_magnitude * normal_dir[d] + cfg.noise_scale * rng.gaussian();
        if (in_window) {
          v += shift_magnitude * anomaly_dir[d];
        }
        seq.data[static_cast<std::size_t>(t) * cfg.D + d] = static_cast<float>(v);
      }
    }

    VideoRecord rec;
    rec.id = seq.id;
    rec.feature_path = "features/" + seq.id + ".fseq";
    rec.label = anomalous ? 1 : 0;
    rec.segment_labels = std::move(seg_labels);
    rec.frames_per_segment = 16;

    out.sequences.push_back(std::move(seq));
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace tanom
