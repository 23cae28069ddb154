#include "tanom/manifest.hpp"

#include <fstream>
#include <sstream>

namespace tanom {

namespace {

std::filesystem::path resolve_feature_path(const std::filesystem::path& manifest_path,
                                           const std::string& feature_path) {
  std::filesystem::path p(feature_path);
  if (p.is_relative()) {
    return manifest_path.parent_path() / p;
  }
  return p;
}

std::vector<std::uint8_t> parse_segment_labels(int line_no, const std::string& value) {
  std::vector<std::uint8_t> labels;
  std::string token;
  std::istringstream ss(value);
  while (std::getline(ss, token, ',')) {
    if (token == "0") {
      labels.push_back(0);
    } else if (token == "1") {
      labels.push_back(1);
    } else {
      throw ManifestError(line_no, "segment_labels entries must be 0 or 1, got '" + token + "'");
    }
  }
  if (labels.empty()) {
    throw ManifestError(line_no, "segment_labels is empty");
  }
  return labels;
}

VideoRecord parse_record(int line_no, const std::string& line) {
  VideoRecord rec;
  bool have_id = false, have_features = false, have_label = false;

  std::istringstream ss(line);
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ManifestError(line_no, "expected key=value, got '" + token + "'");
    }
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "id") {
      rec.id = value;
      have_id = true;
    } else if (key == "features") {
      rec.feature_path = value;
      have_features = true;
    } else if (key == "label") {
      if (value == "0") {
        rec.label = 0;
      } else if (value == "1") {
        rec.label = 1;
      } else {
        throw ManifestError(line_no, "label must be 0 or 1, got '" + value + "'");
      }
      have_label = true;
    } else if (key == "segment_labels") {
      rec.segment_labels = parse_segment_labels(line_no, value);
    } else if (key == "frames_per_segment") {
      std::size_t pos = 0;
      unsigned long parsed = 0;
      try {
        parsed = std::stoul(value, &pos);
      } catch (const std::exception&) {
        throw ManifestError(line_no, "bad frames_per_segment '" + value + "'");
      }
      if (pos != value.size() || parsed < 1) {
        throw ManifestError(line_no, "bad frames_per_segment '" + value + "'");
      }
      rec.frames_per_segment = static_cast<std::uint32_t>(parsed);
    } else {
      throw ManifestError(line_no, "unknown key '" + key + "'");
    }
  }

  if (!have_id) throw ManifestError(line_no, "missing id");
  if (!have_features) throw ManifestError(line_no, "missing features");
  if (!have_label) throw ManifestError(line_no, "missing label");
  return rec;
}

void validate_record(int line_no, const VideoRecord& rec,
                     const std::filesystem::path& manifest_path) {
  const auto feature_file = resolve_feature_path(manifest_path, rec.feature_path);
  std::uint32_t T = 0, D = 0;
  try {
    std::tie(T, D) = read_feature_header(feature_file);
  } catch (const FeatureIoError& e) {
    throw ManifestError(line_no, "feature file for '" + rec.id + "': " + e.what());
  }
  (void)D;
  if (rec.segment_labels) {
    if (rec.segment_labels->size() != T) {
      throw ManifestError(line_no, "segment_labels length " +
                                       std::to_string(rec.segment_labels->size()) +
                                       " does not match T=" + std::to_string(T) + " for '" +
                                       rec.id + "'");
    }
    if (rec.label != (rec.any_segment_positive() ? 1 : 0)) {
      throw ManifestError(line_no, "label does not equal OR over segment_labels for '" +
                                       rec.id + "'");
    }
  }
}

}  // namespace

std::vector<VideoRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open manifest: " + path.string());
  }

  std::vector<VideoRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    VideoRecord rec = parse_record(line_no, line);
    validate_record(line_no, rec, path);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_manifest(std::span<const VideoRecord> records, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot open manifest for write: " + path.string());
  }
  for (const auto& rec : records) {
    os << "id=" << rec.id << " features=" << rec.feature_path << " label=" << rec.label;
    if (rec.segment_labels) {
      os << " segment_labels=";
      for (std::size_t i = 0; i < rec.segment_labels->size(); ++i) {
        if (i) os << ',';
        os << static_cast<int>((*rec.segment_labels)[i]);
      }
    }
    os << " frames_per_segment=" << rec.frames_per_segment << '\n';
  }
  if (!os) {
    throw std::runtime_error("write failed on manifest: " + path.string());
  }
}

std::vector<LoadedVideo> load_dataset(const std::filesystem::path& manifest_path) {
  auto records = load_manifest(manifest_path);
  std::vector<LoadedVideo> out;
  out.reserve(records.size());
  for (auto& rec : records) {
    const auto feature_file = resolve_feature_path(manifest_path, rec.feature_path);
    FeatureSequence seq = read_features(feature_file);
    seq.id = rec.id;
    out.push_back(LoadedVideo{std::move(rec), std::move(seq)});
  }
  return out;
}

}  // namespace tanom
