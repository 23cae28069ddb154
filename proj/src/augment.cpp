#include "tanom/augment.hpp"

#include <stdexcept>

namespace tanom {

namespace {

void check(const FeatureSequence& seq, const AugmentConfig& cfg) {
  if (seq.T < 1) {
    throw std::invalid_argument("augment: sequence must have T >= 1");
  }
  if (cfg.block_len < 1) {
    throw std::invalid_argument("augment: block_len must be >= 1");
  }
}

FeatureSequence gather_rows(const FeatureSequence& seq, const std::vector<std::uint32_t>& rows,
                            const char* suffix) {
  FeatureSequence out;
  out.id = seq.id + suffix;
  out.T = static_cast<std::uint32_t>(rows.size());
  out.D = seq.D;
  out.data.reserve(rows.size() * seq.D);
  for (auto r : rows) {
    const auto row = seq.row(r);
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace

ViewPair make_views(const FeatureSequence& seq, const AugmentConfig& cfg, Rng& rng) {
  check(seq, cfg);
  const std::uint32_t T = seq.T;
  const auto L = static_cast<std::uint32_t>(cfg.block_len);
  const std::uint32_t blocks = (T + L - 1) / L;

  ViewPair vp;
  vp.indices_a.resize(blocks);
  vp.indices_b.resize(blocks);
  for (std::uint32_t i = 0; i < blocks; ++i) {
    const std::uint32_t lo = i * L;
    const std::uint32_t hi = std::min((i + 1) * L, T);  // exclusive
    vp.indices_a[i] = lo + static_cast<std::uint32_t>(rng.uniform_below(hi - lo));
  }
  for (std::uint32_t i = 0; i < blocks; ++i) {
    const std::uint32_t lo = i * L;
    const std::uint32_t hi = std::min((i + 1) * L, T);
    vp.indices_b[i] = lo + static_cast<std::uint32_t>(rng.uniform_below(hi - lo));
  }
  vp.view_a = gather_rows(seq, vp.indices_a, "/a");
  vp.view_b = gather_rows(seq, vp.indices_b, "/b");
  return vp;
}

FeatureSequence identity_view(const FeatureSequence& seq, const AugmentConfig& cfg) {
  check(seq, cfg);
  const auto L = static_cast<std::uint32_t>(cfg.block_len);
  const std::uint32_t blocks = (seq.T + L - 1) / L;
  std::vector<std::uint32_t> rows(blocks);
  for (std::uint32_t i = 0; i < blocks; ++i) {
    rows[i] = i * L;
  }
  return gather_rows(seq, rows, "");
}

}  // namespace tanom
