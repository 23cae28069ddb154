// Dataset manifest: one video record per line, UTF-8 key=value fields.
//
//   id=v0001 features=features/v0001.fseq label=1 segment_labels=0,0,1,1 frames_per_segment=16
//
// `segment_labels` and `frames_per_segment` are optional. Feature paths are
// resolved relative to the manifest's directory. Loading validates every
// record against its feature file: the segment label vector must match T, and
// the video label must equal the OR over segment labels when those are given.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tanom/features.hpp"

namespace tanom {

struct VideoRecord {
  std::string id;
  std::string feature_path;  // as written in the manifest
  int label = 0;             // video-level anomaly flag
  std::optional<std::vector<std::uint8_t>> segment_labels;
  std::uint32_t frames_per_segment = 16;

  bool any_segment_positive() const {
    if (!segment_labels) return false;
    for (auto v : *segment_labels) {
      if (v) return true;
    }
    return false;
  }
};

class ManifestError : public std::runtime_error {
 public:
  ManifestError(int line, const std::string& what)
      : std::runtime_error("manifest line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

std::vector<VideoRecord> load_manifest(const std::filesystem::path& path);

void write_manifest(std::span<const VideoRecord> records, const std::filesystem::path& path);

// A record together with its feature sequence, fully loaded.
struct LoadedVideo {
  VideoRecord rec;
  FeatureSequence seq;
};

std::vector<LoadedVideo> load_dataset(const std::filesystem::path& manifest_path);

}  // namespace tanom
