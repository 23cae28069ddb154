// Little-endian encode/decode helpers shared by the binary file formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace tanom::detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

inline void put_f32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  put_u32(out, bits);
}

// Cursor over an in-memory file image. Bounds are the caller's problem;
// check remaining() before reading.
struct Cursor {
  const unsigned char* p = nullptr;
  std::size_t size = 0;
  std::size_t pos = 0;

  std::size_t remaining() const { return size - pos; }

  std::uint16_t u16() {
    std::uint16_t v = static_cast<std::uint16_t>(p[pos]) |
                      static_cast<std::uint16_t>(p[pos + 1]) << 8;
    pos += 2;
    return v;
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    }
    pos += 4;
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    }
    pos += 8;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }
};

}  // namespace tanom::detail
