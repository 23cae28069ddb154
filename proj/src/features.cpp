#include "tanom/features.hpp"

#include <cmath>
#include <fstream>

#include "tanom/detail/binio.hpp"

namespace tanom {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'E', 'Q'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FeatureIoError(FeatureIoErrc::Io, "cannot open " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw FeatureIoError(FeatureIoErrc::Io, "read failed on " + path.string());
  }
  return bytes;
}

}  // namespace

bool FeatureSequence::all_finite() const {
  for (float v : data) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

void write_features(const FeatureSequence& seq, const std::filesystem::path& path) {
  if (seq.T < 1 || seq.D < 1) {
    throw FeatureIoError(FeatureIoErrc::BadHeader, "feature sequence needs T >= 1 and D >= 1");
  }
  if (seq.data.size() != static_cast<std::size_t>(seq.T) * seq.D) {
    throw FeatureIoError(FeatureIoErrc::BadHeader,
                         "data size does not match T*D for " + seq.id);
  }
  if (!seq.all_finite()) {
    throw FeatureIoError(FeatureIoErrc::NonFinite,
                         "refusing to write non-finite features for " + seq.id);
  }

  std::string out;
  out.reserve(kHeaderBytes + seq.data.size() * 4);
  out.append(kMagic, 4);
  detail::put_u16(out, kVersion);
  detail::put_u32(out, seq.T);
  detail::put_u32(out, seq.D);
  for (float v : seq.data) {
    detail::put_f32(out, v);
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw FeatureIoError(FeatureIoErrc::Io, "cannot open for write: " + path.string());
  }
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) {
    throw FeatureIoError(FeatureIoErrc::Io, "write failed on " + path.string());
  }
}

FeatureSequence read_features(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FeatureIoError(FeatureIoErrc::BadMagic, "bad magic in " + path.string());
  }
  if (bytes.size() < kHeaderBytes) {
    throw FeatureIoError(FeatureIoErrc::Truncated, "truncated header in " + path.string());
  }

  detail::Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 4};
  const std::uint16_t version = cur.u16();
  if (version != kVersion) {
    throw FeatureIoError(FeatureIoErrc::BadVersion,
                         "unsupported version " + std::to_string(version) + " in " + path.string());
  }
  FeatureSequence seq;
  seq.id = path.stem().string();
  seq.T = cur.u32();
  seq.D = cur.u32();
  if (seq.T < 1 || seq.D < 1) {
    throw FeatureIoError(FeatureIoErrc::BadHeader, "zero T or D in " + path.string());
  }

  const std::size_t expected = static_cast<std::size_t>(seq.T) * seq.D * 4;
  if (cur.remaining() < expected) {
    throw FeatureIoError(FeatureIoErrc::Truncated, "truncated payload in " + path.string());
  }
  if (cur.remaining() > expected) {
    throw FeatureIoError(FeatureIoErrc::TrailingBytes, "trailing bytes in " + path.string());
  }

  seq.data.resize(static_cast<std::size_t>(seq.T) * seq.D);
  for (auto& v : seq.data) {
    v = cur.f32();
    if (!std::isfinite(v)) {
      throw FeatureIoError(FeatureIoErrc::NonFinite, "non-finite value in " + path.string());
    }
  }
  return seq;
}

std::pair<std::uint32_t, std::uint32_t> read_feature_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FeatureIoError(FeatureIoErrc::Io, "cannot open " + path.string());
  }
  char buf[kHeaderBytes];
  in.read(buf, kHeaderBytes);
  if (in.gcount() < static_cast<std::streamsize>(kHeaderBytes)) {
    if (in.gcount() >= 4 && std::memcmp(buf, kMagic, 4) != 0) {
      throw FeatureIoError(FeatureIoErrc::BadMagic, "bad magic in " + path.string());
    }
    throw FeatureIoError(FeatureIoErrc::Truncated, "truncated header in " + path.string());
  }
  if (std::memcmp(buf, kMagic, 4) != 0) {
    throw FeatureIoError(FeatureIoErrc::BadMagic, "bad magic in " + path.string());
  }
  detail::Cursor cur{reinterpret_cast<const unsigned char*>(buf), kHeaderBytes, 4};
  const std::uint16_t version = cur.u16();
  if (version != kVersion) {
    throw FeatureIoError(FeatureIoErrc::BadVersion,
                         "unsupported version " + std::to_string(version) + " in " + path.string());
  }
  const std::uint32_t T = cur.u32();
  const std::uint32_t D = cur.u32();
  if (T < 1 || D < 1) {
    throw FeatureIoError(FeatureIoErrc::BadHeader, "zero T or D in " + path.string());
  }
  return {T, D};
}

}  // namespace tanom
