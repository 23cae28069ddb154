#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tanom/losses.hpp"
#include "tanom/model.hpp"
#include "tanom/rng.hpp"

using namespace tanom;

namespace {

FeatureSequence random_seq(Rng& rng, std::uint32_t T, std::uint32_t D) {
  FeatureSequence s;
  s.id = "m";
  s.T = T;
  s.D = D;
  s.data.resize(static_cast<std::size_t>(T) * D);
  for (auto& v : s.data) {
    v = static_cast<float>(rng.gaussian());
  }
  return s;
}

ModelConfig small_cfg(int D = 4) {
  ModelConfig cfg;
  cfg.D = D;
  cfg.conv_kernel = 3;
  cfg.conv_channels = 4;
  cfg.attn_hidden = 5;
  cfg.clf_hidden = 3;
  cfg.seed = 77;
  return cfg;
}

void zero_weights(ModelParams& p) {
  for_each_tensor(p, [](const char*, std::vector<double>& t) {
    std::fill(t.begin(), t.end(), 0.0);
  });
}

}  // namespace

TEST_CASE("init is deterministic with zero biases and bounded weights") {
  const auto cfg = small_cfg();
  const auto a = init_params(cfg);
  const auto b = init_params(cfg);
  for_each_tensor(a, [&](const char* name, const std::vector<double>& ta) {
    for_each_tensor(b, [&](const char* bname, const std::vector<double>& tb) {
      if (std::string_view(name) == bname) {
        CHECK(ta == tb);
      }
    });
  });

  for (double v : a.conv_b) CHECK(v == 0.0);
  for (double v : a.attn1_b) CHECK(v == 0.0);
  CHECK(a.attn2_b[0] == 0.0);
  for (double v : a.clf1_b) CHECK(v == 0.0);
  CHECK(a.clf2_b[0] == 0.0);

  const double conv_bound = 1.0 / std::sqrt(3.0 * 4.0);
  for (double v : a.conv_w) CHECK(std::abs(v) <= conv_bound);
  const double clf1_bound = 1.0 / std::sqrt(4.0);
  for (double v : a.clf1_w) CHECK(std::abs(v) <= clf1_bound);

  ModelConfig other = cfg;
  other.seed = 78;
  const auto c = init_params(other);
  CHECK(c.conv_w != a.conv_w);
}

TEST_CASE("shapes follow the config") {
  auto cfg = small_cfg();
  cfg.attn_hidden = 1;
  const auto p = init_params(cfg);
  CHECK(p.attn2_w.size() == 1);
  CHECK(p.attn1_w.size() == 1 * 4);
  CHECK(p.conv_w.size() == 4 * 3 * 4);

  ModelConfig defaulted;
  defaulted.D = 10;
  CHECK(defaulted.channels() == 10);  // conv_channels = 0 means follow D

  ModelConfig bad;
  bad.D = 0;
  CHECK_THROWS_AS(init_params(bad), std::invalid_argument);
}

TEST_CASE("attention scores stay in the open unit interval") {
  Rng rng(21);
  const auto cfg = small_cfg();
  const auto p = init_params(cfg);
  const auto seq = random_seq(rng, 1, 4);
  const auto lam = attention_scores(p, seq);
  REQUIRE(lam.size() == 1);
  CHECK(lam[0] > 0.0);
  CHECK(lam[0] < 1.0);

  const auto seq2 = random_seq(rng, 19, 4);
  for (double v : attention_scores(p, seq2)) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("attention is causal: future rows cannot change past scores") {
  Rng rng(22);
  const auto p = init_params(small_cfg());
  for (int trial = 0; trial < 100; ++trial) {
    const auto T = static_cast<std::uint32_t>(rng.uniform_int(2, 24));
    auto seq = random_seq(rng, T, 4);
    const auto t_cut = static_cast<std::uint32_t>(rng.uniform_int(0, T - 2));

    const auto before = attention_scores(p, seq);
    auto perturbed = seq;
    for (std::uint32_t t = t_cut + 1; t < T; ++t) {
      for (std::uint32_t d = 0; d < 4; ++d) {
        perturbed.data[t * 4 + d] += static_cast<float>(rng.gaussian());
      }
    }
    const auto after = attention_scores(p, perturbed);
    for (std::uint32_t t = 0; t <= t_cut; ++t) {
      CHECK(before[t] == after[t]);  // bitwise
    }
  }
}

TEST_CASE("zero weights force lambda exactly to one half") {
  auto p = init_params(small_cfg());
  zero_weights(p);
  Rng rng(23);
  const auto seq = random_seq(rng, 6, 4);
  for (double v : attention_scores(p, seq)) {
    CHECK(v == 0.5);
  }
  // and the classifier likewise sits at sigmoid(0)
  const auto tr = forward(p, seq);
  CHECK(tr.prob == 0.5);
}

TEST_CASE("constant lambda pools to a scaled row sum") {
  auto p = init_params(small_cfg());
  zero_weights(p);  // lambda = 0.5 everywhere
  Rng rng(24);
  const auto seq = random_seq(rng, 7, 4);
  const auto tr = forward(p, seq);

  for (std::uint32_t d = 0; d < 4; ++d) {
    double row_sum = 0.0;
    for (std::uint32_t t = 0; t < 7; ++t) {
      row_sum += 0.5 * static_cast<double>(seq.at(t, d));
    }
    CHECK(tr.pooled[d] == doctest::Approx(row_sum).epsilon(1e-15));
  }
}

TEST_CASE("all-zero features pool to the zero vector") {
  const auto p = init_params(small_cfg());
  FeatureSequence seq;
  seq.id = "z";
  seq.T = 5;
  seq.D = 4;
  seq.data.assign(20, 0.0f);
  const auto tr = forward(p, seq);
  for (double v : tr.pooled) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("pooled vector matches an independent Kahan re-summation") {
  Rng rng(25);
  ModelConfig cfg = small_cfg(8);
  cfg.conv_channels = 8;
  const auto p = init_params(cfg);
  const auto seq = random_seq(rng, 12, 8);
  const auto tr = forward(p, seq);

  for (std::uint32_t d = 0; d < 8; ++d) {
    // Kahan-compensated per-dimension sum, a different accumulation route.
    double sum = 0.0, comp = 0.0;
    for (std::uint32_t t = 0; t < 12; ++t) {
      const double term = tr.lambda[t] * static_cast<double>(seq.at(t, d));
      const double y = term - comp;
      const double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
    CHECK(tr.pooled[d] == doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("pooling with fixed lambda is linear in the input") {
  Rng rng(26);
  const auto p = init_params(small_cfg());
  const auto seq = random_seq(rng, 9, 4);
  std::vector<double> lam(9);
  for (auto& v : lam) {
    v = rng.uniform(0.05, 0.95);
  }

  auto scaled = seq;
  const double alpha = -2.5;
  for (auto& v : scaled.data) {
    v = static_cast<float>(v * alpha);
  }

  const auto tr1 = forward_with_fixed_lambda(p, seq, lam);
  const auto tr2 = forward_with_fixed_lambda(p, scaled, lam);
  for (std::uint32_t d = 0; d < 4; ++d) {
    CHECK(tr2.pooled[d] == doctest::Approx(alpha * tr1.pooled[d]).epsilon(1e-6));
  }
}

TEST_CASE("classify_single agrees with the classifier inside forward") {
  Rng rng(27);
  const auto p = init_params(small_cfg());
  const auto seq = random_seq(rng, 10, 4);
  const auto tr = forward(p, seq);
  CHECK(classify_single(p, tr.pooled) == tr.prob);

  SUBCASE("zero vector with zero biases gives one half") {
    const std::vector<double> zero(4, 0.0);
    CHECK(classify_single(p, zero) == 0.5);  // init biases are zero
  }

  SUBCASE("matches a length-1 forward with lambda pinned to one") {
    FeatureSequence single;
    single.id = "x";
    single.T = 1;
    single.D = 4;
    single.data.resize(4);
    for (auto& v : single.data) {
      v = static_cast<float>(rng.gaussian());
    }
    std::vector<double> x(4);
    for (std::uint32_t d = 0; d < 4; ++d) {
      x[d] = static_cast<double>(single.data[d]);
    }
    const std::vector<double> one{1.0};
    const auto tr1 = forward_with_fixed_lambda(p, single, one);
    CHECK(classify_single(p, x) == tr1.prob);
  }

  SUBCASE("dimension mismatch throws") {
    const std::vector<double> bad(5, 0.0);
    CHECK_THROWS_AS(classify_single(p, bad), std::invalid_argument);
  }
}

TEST_CASE("forward rejects mismatched feature dimension") {
  Rng rng(28);
  const auto p = init_params(small_cfg(4));
  const auto seq = random_seq(rng, 4, 6);
  CHECK_THROWS_AS(forward(p, seq), std::invalid_argument);
  CHECK_THROWS_AS(attention_scores(p, seq), std::invalid_argument);
}

TEST_CASE("zero upstream gradient produces zero parameter gradients") {
  Rng rng(29);
  const auto p = init_params(small_cfg());
  const auto seq = random_seq(rng, 6, 4);
  const auto tr = forward(p, seq);

  ParamGrads grads = zeros_like(p);
  const std::vector<double> dlam(6, 0.0);
  accumulate_grads(p, tr, dlam, 0.0, grads);
  for_each_tensor(grads, [](const char*, const std::vector<double>& t) {
    for (double v : t) {
      CHECK(v == 0.0);
    }
  });
}

TEST_CASE("duplicated example exactly doubles its gradient") {
  Rng rng(30);
  const auto p = init_params(small_cfg());
  const auto seq = random_seq(rng, 8, 4);
  const auto tr = forward(p, seq);
  std::vector<double> dlam(8);
  for (auto& v : dlam) {
    v = rng.gaussian();
  }
  const double dprob = rng.gaussian();

  ParamGrads once = zeros_like(p);
  accumulate_grads(p, tr, dlam, dprob, once);
  ParamGrads twice = zeros_like(p);
  accumulate_grads(p, tr, dlam, dprob, twice);
  accumulate_grads(p, tr, dlam, dprob, twice);

  for (std::size_t i = 0; i < once.conv_w.size(); ++i) {
    CHECK(twice.conv_w[i] == doctest::Approx(2.0 * once.conv_w[i]).epsilon(1e-14));
  }
  for (std::size_t i = 0; i < once.attn1_w.size(); ++i) {
    CHECK(twice.attn1_w[i] == doctest::Approx(2.0 * once.attn1_w[i]).epsilon(1e-14));
  }
  CHECK(twice.clf2_b[0] == doctest::Approx(2.0 * once.clf2_b[0]).epsilon(1e-14));
}

TEST_CASE("analytic gradients match central differences on a random instance") {
  Rng rng(31);
  ModelConfig cfg = small_cfg(8);
  cfg.conv_channels = 5;
  cfg.seed = 3;
  ModelParams p = init_params(cfg);
  for_each_tensor(p, [&](const char*, std::vector<double>& t) {
    for (auto& v : t) {
      v += 0.15 * rng.gaussian();
    }
  });
  const auto seq = random_seq(rng, 12, 8);
  const int y = 1;
  const LossWeights w{0.01, 0.1, 0.0};  // single sequence: no alignment term

  const auto loss_of = [&](const ModelParams& params) {
    const auto tr = forward(params, seq);
    return total_loss(tr, tr, y, w).total;
  };

  ParamGrads grads = zeros_like(p);
  {
    const auto tr = forward(p, seq);
    const auto lg = loss_grads(tr, tr, y, w);
    accumulate_grads(p, tr, lg.dlambda_a, lg.dprob_a, grads);
    accumulate_grads(p, tr, lg.dlambda_b, lg.dprob_b, grads);
  }

  const double eps = 1e-4;
  double max_rel = 0.0;
  for_each_tensor(p, [&](const char* name, std::vector<double>& tensor) {
    const std::vector<double>* gt = nullptr;
    for_each_tensor(grads, [&](const char* gname, const std::vector<double>& g) {
      if (std::string_view(gname) == name) {
        gt = &g;
      }
    });
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + eps;
      const double plus = loss_of(p);
      tensor[i] = saved - eps;
      const double minus = loss_of(p);
      tensor[i] = saved;
      const double fd = (plus - minus) / (2.0 * eps);
      const double rel =
          std::abs((*gt)[i] - fd) / std::max({std::abs((*gt)[i]), std::abs(fd), 1e-5});
      max_rel = std::max(max_rel, rel);
    }
  });
  CHECK(max_rel < 1e-4);
}

TEST_CASE("forward is a pure function of params and input") {
  Rng rng(32);
  const auto p = init_params(small_cfg());
  const auto seq = random_seq(rng, 11, 4);
  const auto a = forward(p, seq);
  const auto b = forward(p, seq);
  CHECK(a.lambda == b.lambda);
  CHECK(a.pooled == b.pooled);
  CHECK(a.prob == b.prob);
}
