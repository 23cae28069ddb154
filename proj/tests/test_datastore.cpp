#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "tanom/features.hpp"
#include "tanom/manifest.hpp"
#include "tanom/rng.hpp"
#include "tanom/synthetic.hpp"

using namespace tanom;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  const auto dir = fs::temp_directory_path() / (std::string("tanom_test_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

FeatureSequence make_seq(std::string id, std::uint32_t T, std::uint32_t D,
                         std::vector<float> data) {
  FeatureSequence s;
  s.id = std::move(id);
  s.T = T;
  s.D = D;
  s.data = std::move(data);
  return s;
}

FeatureSequence random_seq(Rng& rng, std::uint32_t T, std::uint32_t D) {
  FeatureSequence s;
  s.id = "r";
  s.T = T;
  s.D = D;
  s.data.resize(static_cast<std::size_t>(T) * D);
  for (auto& v : s.data) {
    v = static_cast<float>(rng.gaussian());
  }
  return s;
}

void corrupt_file(const fs::path& path, std::size_t offset, char byte) {
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(&byte, 1);
}

}  // namespace

TEST_CASE("smallest sequence writes an 18-byte file and round-trips") {
  const auto dir = temp_dir("fseq_min");
  const auto path = dir / "one.fseq";
  const auto seq = make_seq("one", 1, 1, {0.0f});
  write_features(seq, path);
  CHECK(fs::file_size(path) == 18);  // 4 magic + 2 version + 4 T + 4 D + 4 payload

  const auto back = read_features(path);
  CHECK(back.T == 1);
  CHECK(back.D == 1);
  CHECK(back.data == seq.data);
}

TEST_CASE("small sequence round-trips bitwise") {
  const auto dir = temp_dir("fseq_small");
  const auto path = dir / "s.fseq";
  const auto seq = make_seq("s", 3, 2, {0.5f, -1.25f, 3e-7f, 1024.0f, -0.0f, 7.5f});
  write_features(seq, path);
  const auto back = read_features(path);
  CHECK(back.T == seq.T);
  CHECK(back.D == seq.D);
  for (std::size_t i = 0; i < seq.data.size(); ++i) {
    // bit-level comparison; -0.0f must survive too
    CHECK(std::bit_cast<std::uint32_t>(back.data[i]) == std::bit_cast<std::uint32_t>(seq.data[i]));
  }
}

TEST_CASE("random sequences round-trip over 100 seeds") {
  const auto dir = temp_dir("fseq_rand");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(mix_seed(seed, 0xF5));
    const auto T = static_cast<std::uint32_t>(rng.uniform_int(1, 64));
    const auto D = static_cast<std::uint32_t>(rng.uniform_int(1, 32));
    const auto seq = random_seq(rng, T, D);
    const auto path = dir / ("r" + std::to_string(seed) + ".fseq");
    write_features(seq, path);
    const auto back = read_features(path);
    REQUIRE(back.data.size() == seq.data.size());
    CHECK(back.data == seq.data);
    CHECK(back.T == seq.T);
    CHECK(back.D == seq.D);
  }
}

TEST_CASE("reader rejects malformed files with distinct errors") {
  const auto dir = temp_dir("fseq_bad");
  const auto seq = make_seq("x", 2, 3, {1, 2, 3, 4, 5, 6});
  const auto good = dir / "good.fseq";
  write_features(seq, good);

  SUBCASE("wrong magic") {
    const auto p = dir / "magic.fseq";
    fs::copy_file(good, p);
    corrupt_file(p, 0, 'X');
    try {
      read_features(p);
      FAIL("expected FeatureIoError");
    } catch (const FeatureIoError& e) {
      CHECK(e.code() == FeatureIoErrc::BadMagic);
    }
  }

  SUBCASE("unsupported version") {
    const auto p = dir / "ver.fseq";
    fs::copy_file(good, p);
    corrupt_file(p, 4, 9);
    try {
      read_features(p);
      FAIL("expected FeatureIoError");
    } catch (const FeatureIoError& e) {
      CHECK(e.code() == FeatureIoErrc::BadVersion);
    }
  }

  SUBCASE("truncated payload") {
    const auto p = dir / "trunc.fseq";
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() - 3);
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    try {
      read_features(p);
      FAIL("expected FeatureIoError");
    } catch (const FeatureIoError& e) {
      CHECK(e.code() == FeatureIoErrc::Truncated);
    }
  }

  SUBCASE("trailing bytes") {
    const auto p = dir / "trail.fseq";
    fs::copy_file(good, p);
    std::ofstream out(p, std::ios::binary | std::ios::app);
    out.put(0);
    out.close();
    try {
      read_features(p);
      FAIL("expected FeatureIoError");
    } catch (const FeatureIoError& e) {
      CHECK(e.code() == FeatureIoErrc::TrailingBytes);
    }
  }

  SUBCASE("non-finite payload") {
    const auto p = dir / "nan.fseq";
    fs::copy_file(good, p);
    // first payload float at offset 14; 0x7FC00000 is a quiet NaN
    corrupt_file(p, 14 + 3, '\x7F');
    corrupt_file(p, 14 + 2, '\xC0');
    try {
      read_features(p);
      FAIL("expected FeatureIoError");
    } catch (const FeatureIoError& e) {
      CHECK(e.code() == FeatureIoErrc::NonFinite);
    }
  }

  SUBCASE("missing file") {
    try {
      read_features(dir / "nope.fseq");
      FAIL("expected FeatureIoError");
    } catch (const FeatureIoError& e) {
      CHECK(e.code() == FeatureIoErrc::Io);
    }
  }
}

TEST_CASE("writer rejects non-finite data") {
  const auto dir = temp_dir("fseq_wnan");
  auto seq = make_seq("w", 1, 2, {1.0f, std::numeric_limits<float>::quiet_NaN()});
  try {
    write_features(seq, dir / "w.fseq");
    FAIL("expected FeatureIoError");
  } catch (const FeatureIoError& e) {
    CHECK(e.code() == FeatureIoErrc::NonFinite);
  }
  CHECK(!fs::exists(dir / "w.fseq"));
}

TEST_CASE("empty manifest loads as empty list") {
  const auto dir = temp_dir("man_empty");
  std::ofstream(dir / "m.txt").close();
  CHECK(load_manifest(dir / "m.txt").empty());
}

TEST_CASE("well-formed manifest line loads and validates") {
  const auto dir = temp_dir("man_ok");
  fs::create_directories(dir / "features");
  write_features(make_seq("a", 4, 2, {0, 1, 2, 3, 4, 5, 6, 7}), dir / "features" / "a.fseq");
  {
    std::ofstream m(dir / "m.txt");
    m << "id=a features=features/a.fseq label=1 segment_labels=0,1,1,0 frames_per_segment=8\n";
  }
  const auto recs = load_manifest(dir / "m.txt");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].id == "a");
  CHECK(recs[0].label == 1);
  CHECK(recs[0].frames_per_segment == 8);
  REQUIRE(recs[0].segment_labels.has_value());
  CHECK(*recs[0].segment_labels == std::vector<std::uint8_t>{0, 1, 1, 0});

  const auto videos = load_dataset(dir / "m.txt");
  REQUIRE(videos.size() == 1);
  CHECK(videos[0].seq.T == 4);
}

TEST_CASE("manifest validation failures carry line numbers") {
  const auto dir = temp_dir("man_bad");
  fs::create_directories(dir / "features");
  write_features(make_seq("a", 3, 1, {0, 1, 2}), dir / "features" / "a.fseq");

  SUBCASE("all-zero segment labels with label=1") {
    std::ofstream(dir / "m.txt")
        << "id=a features=features/a.fseq label=1 segment_labels=0,0,0\n";
    try {
      load_manifest(dir / "m.txt");
      FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
      CHECK(e.line() == 1);
    }
  }

  SUBCASE("positive segment with label=0") {
    std::ofstream(dir / "m.txt")
        << "id=a features=features/a.fseq label=0 segment_labels=0,1,0\n";
    CHECK_THROWS_AS(load_manifest(dir / "m.txt"), ManifestError);
  }

  SUBCASE("dangling feature path") {
    std::ofstream(dir / "m.txt") << "\n\nid=a features=features/gone.fseq label=0\n";
    try {
      load_manifest(dir / "m.txt");
      FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
      CHECK(e.line() == 3);
    }
  }

  SUBCASE("segment label length mismatch") {
    std::ofstream(dir / "m.txt")
        << "id=a features=features/a.fseq label=1 segment_labels=0,1\n";
    CHECK_THROWS_AS(load_manifest(dir / "m.txt"), ManifestError);
  }

  SUBCASE("parse errors") {
    std::ofstream(dir / "m.txt") << "id=a features=features/a.fseq label=2\n";
    CHECK_THROWS_AS(load_manifest(dir / "m.txt"), ManifestError);
    std::ofstream(dir / "m2.txt") << "id=a nonsense\n";
    CHECK_THROWS_AS(load_manifest(dir / "m2.txt"), ManifestError);
    std::ofstream(dir / "m3.txt") << "id=a features=features/a.fseq label=0 color=blue\n";
    CHECK_THROWS_AS(load_manifest(dir / "m3.txt"), ManifestError);
  }
}

TEST_CASE("manifest write/load round-trip") {
  const auto dir = temp_dir("man_rt");
  fs::create_directories(dir / "features");
  write_features(make_seq("a", 2, 1, {0, 1}), dir / "features" / "a.fseq");
  write_features(make_seq("b", 3, 1, {0, 1, 2}), dir / "features" / "b.fseq");

  std::vector<VideoRecord> recs(2);
  recs[0] = {"a", "features/a.fseq", 1, std::vector<std::uint8_t>{1, 0}, 16};
  recs[1] = {"b", "features/b.fseq", 0, std::nullopt, 4};
  write_manifest(recs, dir / "m.txt");

  const auto back = load_manifest(dir / "m.txt");
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "a");
  CHECK(back[0].segment_labels == recs[0].segment_labels);
  CHECK(!back[1].segment_labels.has_value());
  CHECK(back[1].frames_per_segment == 4);
}

TEST_CASE("synthetic generation honors fraction 0") {
  SynthConfig cfg;
  cfg.num_videos = 1;
  cfg.anomaly_fraction = 0.0;
  cfg.t_range = {10, 12};
  cfg.window_range = {2, 3};
  cfg.D = 4;
  const auto ds = generate_synthetic(cfg);
  REQUIRE(ds.records.size() == 1);
  CHECK(ds.records[0].label == 0);
  REQUIRE(ds.records[0].segment_labels.has_value());
  for (auto l : *ds.records[0].segment_labels) {
    CHECK(l == 0);
  }
}

TEST_CASE("synthetic generation with fraction 1 plants fixed-width windows") {
  SynthConfig cfg;
  cfg.num_videos = 12;
  cfg.anomaly_fraction = 1.0;
  cfg.t_range = {6, 9};
  cfg.window_range = {3, 3};
  cfg.D = 4;
  cfg.seed = 5;
  const auto ds = generate_synthetic(cfg);
  for (const auto& rec : ds.records) {
    CHECK(rec.label == 1);
    const auto& labels = *rec.segment_labels;
    int ones = 0, runs = 0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      ones += labels[t];
      if (labels[t] && (t == 0 || !labels[t - 1])) {
        ++runs;
      }
    }
    CHECK(ones == 3);
    CHECK(runs == 1);
  }
}

TEST_CASE("synthetic generation is deterministic") {
  SynthConfig cfg;
  cfg.num_videos = 8;
  cfg.seed = 42;
  cfg.D = 6;
  cfg.t_range = {8, 16};
  cfg.window_range = {2, 4};
  cfg.anomaly_fraction = 0.5;
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  REQUIRE(a.sequences.size() == b.sequences.size());
  for (std::size_t i = 0; i < a.sequences.size(); ++i) {
    CHECK(a.sequences[i].data == b.sequences[i].data);
    CHECK(a.records[i].label == b.records[i].label);
    CHECK(*a.records[i].segment_labels == *b.records[i].segment_labels);
  }
}

TEST_CASE("synthetic generation enforces MIL consistency and window feasibility") {
  SynthConfig cfg;
  cfg.num_videos = 20;
  cfg.anomaly_fraction = 0.35;
  cfg.t_range = {10, 20};
  cfg.window_range = {2, 5};
  cfg.D = 5;
  cfg.seed = 9;
  const auto ds = generate_synthetic(cfg);
  int anomalous = 0;
  for (const auto& rec : ds.records) {
    anomalous += rec.label;
    CHECK(rec.label == (rec.any_segment_positive() ? 1 : 0));
  }
  CHECK(anomalous == 7);  // round(0.35 * 20)

  SUBCASE("infeasible window is rejected") {
    cfg.window_range = {12, 25};
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  }
  SUBCASE("1-D anomalies are rejected") {
    cfg.D = 1;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  }
}

TEST_CASE("synthetic anomalies are shifted off the normal subspace") {
  SynthConfig cfg;
  cfg.num_videos = 4;
  cfg.anomaly_fraction = 0.5;
  cfg.t_range = {12, 12};
  cfg.window_range = {4, 4};
  cfg.D = 8;
  cfg.noise_scale = 0.05;
  cfg.seed = 3;
  const auto ds = generate_synthetic(cfg);

  // Mean row norm over anomalous steps must clearly exceed normal steps.
  double anom_norm = 0.0, norm_norm = 0.0;
  int anom_n = 0, norm_n = 0;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    const auto& seq = ds.sequences[i];
    const auto& labels = *ds.records[i].segment_labels;
    for (std::uint32_t t = 0; t < seq.T; ++t) {
      double norm2 = 0.0;
      for (std::uint32_t d = 0; d < seq.D; ++d) {
        norm2 += static_cast<double>(seq.at(t, d)) * seq.at(t, d);
      }
      if (labels[t]) {
        anom_norm += std::sqrt(norm2);
        ++anom_n;
      } else {
        norm_norm += std::sqrt(norm2);
        ++norm_n;
      }
    }
  }
  REQUIRE(anom_n > 0);
  REQUIRE(norm_n > 0);
  CHECK(anom_norm / anom_n > 1.3 * (norm_norm / norm_n));
}
