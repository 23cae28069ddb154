#include "tanom/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "tanom/detail/binio.hpp"

namespace tanom {

namespace {

constexpr char kMagic[4] = {'T', 'A', 'N', 'M'};
constexpr std::uint16_t kVersion = 1;

struct TensorShape {
  const char* name;
  std::vector<std::uint32_t> dims;
};

// Declaration-order shapes implied by the config.
std::vector<TensorShape> shapes_for(const ModelConfig& cfg) {
  const auto C = static_cast<std::uint32_t>(cfg.channels());
  const auto D = static_cast<std::uint32_t>(cfg.D);
  const auto k = static_cast<std::uint32_t>(cfg.conv_kernel);
  const auto H = static_cast<std::uint32_t>(cfg.attn_hidden);
  const auto G = static_cast<std::uint32_t>(cfg.clf_hidden);
  return {
      {"conv_w", {C, k, D}}, {"conv_b", {C}},  {"attn1_w", {H, C}}, {"attn1_b", {H}},
      {"attn2_w", {H}},      {"attn2_b", {1}}, {"clf1_w", {G, D}},  {"clf1_b", {G}},
      {"clf2_w", {G}},       {"clf2_b", {1}},
  };
}

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) {
    n *= d;
  }
  return n;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::string out;
  out.append(kMagic, 4);
  detail::put_u16(out, kVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(params.cfg.D));
  detail::put_u32(out, static_cast<std::uint32_t>(params.cfg.conv_kernel));
  detail::put_u32(out, static_cast<std::uint32_t>(params.cfg.channels()));
  detail::put_u32(out, static_cast<std::uint32_t>(params.cfg.attn_hidden));
  detail::put_u32(out, static_cast<std::uint32_t>(params.cfg.clf_hidden));
  detail::put_u64(out, params.cfg.seed);

  const auto shapes = shapes_for(params.cfg);
  std::size_t shape_idx = 0;
  for_each_tensor(params, [&](const char* name, const std::vector<double>& t) {
    const TensorShape& shape = shapes[shape_idx++];
    if (std::strcmp(shape.name, name) != 0 || element_count(shape.dims) != t.size()) {
      throw CheckpointError("tensor '" + std::string(name) + "' does not match its config shape");
    }
    detail::put_u32(out, static_cast<std::uint32_t>(shape.dims.size()));
    for (auto d : shape.dims) {
      detail::put_u32(out, d);
    }
    for (double v : t) {
      detail::put_f32(out, static_cast<float>(v));
    }
  });

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw CheckpointError("cannot open for write: " + path.string());
  }
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) {
    throw CheckpointError("write failed on " + path.string());
  }
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError("cannot open " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError("bad magic in " + path.string());
  }
  detail::Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 4};
  if (cur.remaining() < 2 + 5 * 4 + 8) {
    throw CheckpointError("truncated header in " + path.string());
  }
  if (cur.u16() != kVersion) {
    throw CheckpointError("unsupported version in " + path.string());
  }

  ModelConfig cfg;
  cfg.D = static_cast<int>(cur.u32());
  cfg.conv_kernel = static_cast<int>(cur.u32());
  cfg.conv_channels = static_cast<int>(cur.u32());
  cfg.attn_hidden = static_cast<int>(cur.u32());
  cfg.clf_hidden = static_cast<int>(cur.u32());
  cfg.seed = cur.u64();
  validate(cfg);

  ModelParams params = init_params(cfg);
  const auto shapes = shapes_for(cfg);
  std::size_t shape_idx = 0;
  for_each_tensor(params, [&](const char* name, std::vector<double>& t) {
    const TensorShape& shape = shapes[shape_idx++];
    if (cur.remaining() < 4) {
      throw CheckpointError("truncated tensor header in " + path.string());
    }
    const std::uint32_t rank = cur.u32();
    if (rank != shape.dims.size() || cur.remaining() < static_cast<std::size_t>(rank) * 4) {
      throw CheckpointError("tensor '" + std::string(name) + "' has unexpected rank");
    }
    for (std::uint32_t i = 0; i < rank; ++i) {
      if (cur.u32() != shape.dims[i]) {
        throw CheckpointError("tensor '" + std::string(name) + "' has unexpected dims");
      }
    }
    const std::size_t n = element_count(shape.dims);
    if (cur.remaining() < n * 4) {
      throw CheckpointError("truncated tensor payload in " + path.string());
    }
    t.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<double>(cur.f32());
    }
  });
  if (cur.remaining() != 0) {
    throw CheckpointError("trailing bytes in " + path.string());
  }
  if (!params.all_finite()) {
    throw CheckpointError("non-finite parameter in " + path.string());
  }
  return params;
}

}  // namespace tanom
