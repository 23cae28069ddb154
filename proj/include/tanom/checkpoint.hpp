// Model checkpoint format, all little-endian:
//
//   magic "TANM" | version u16 = 1
//   | config: D, conv_kernel, conv_channels, attn_hidden, clf_hidden (u32), seed (u64)
//   | per tensor, declaration order: rank u32 | dims u32[rank] | float32 data
//
// Values are stored as float32; training state is double, so saving rounds.

#pragma once

#include <filesystem>
#include <stdexcept>

#include "tanom/model.hpp"

namespace tanom {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);

ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace tanom
