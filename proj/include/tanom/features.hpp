// Feature sequence container and its on-disk format.
//
// A sequence is T feature vectors of dimension D, one vector per 16-frame
// video segment (pre-extracted upstream; this toolkit never touches pixels).
//
// File layout, all little-endian:
//   magic "FSEQ" | version u16 = 1 | T u32 | D u32 | T*D float32, row-major
// Trailing bytes are an error.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tanom {

struct FeatureSequence {
  std::string id;
  std::uint32_t T = 0;
  std::uint32_t D = 0;
  std::vector<float> data;  // T*D, row-major (time-major)

  float at(std::uint32_t t, std::uint32_t d) const { return data[static_cast<std::size_t>(t) * D + d]; }
  std::span<const float> row(std::uint32_t t) const {
    return {data.data() + static_cast<std::size_t>(t) * D, D};
  }
  bool all_finite() const;
};

enum class FeatureIoErrc {
  Io,
  BadMagic,
  BadVersion,
  BadHeader,
  Truncated,
  TrailingBytes,
  NonFinite,
};

class FeatureIoError : public std::runtime_error {
 public:
  FeatureIoError(FeatureIoErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  FeatureIoErrc code() const { return code_; }

 private:
  FeatureIoErrc code_;
};

void write_features(const FeatureSequence& seq, const std::filesystem::path& path);

FeatureSequence read_features(const std::filesystem::path& path);

// Header-only read (T, D) used for manifest validation.
std::pair<std::uint32_t, std::uint32_t> read_feature_header(const std::filesystem::path& path);

}  // namespace tanom
