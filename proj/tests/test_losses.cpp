#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tanom/augment.hpp"
#include "tanom/losses.hpp"
#include "tanom/model.hpp"
#include "tanom/rng.hpp"

using namespace tanom;

namespace {

// Builds a pair of traces via the real model so the breakdown sees
// realistic lambdas and probabilities.
struct Instance {
  ModelParams params;
  ForwardTrace trace_a;
  ForwardTrace trace_b;
  int y = 1;
};

Instance random_instance(std::uint64_t seed, std::uint32_t T = 9, std::uint32_t D = 5) {
  Rng rng(mix_seed(seed, 0x10));
  ModelConfig cfg;
  cfg.D = static_cast<int>(D);
  cfg.conv_channels = 3;
  cfg.attn_hidden = 4;
  cfg.clf_hidden = 3;
  cfg.seed = rng.next_u64();

  Instance inst;
  inst.params = init_params(cfg);
  for_each_tensor(inst.params, [&](const char*, std::vector<double>& t) {
    for (auto& v : t) {
      v += 0.2 * rng.gaussian();
    }
  });

  FeatureSequence seq;
  seq.id = "li";
  seq.T = T;
  seq.D = D;
  seq.data.resize(static_cast<std::size_t>(T) * D);
  for (auto& v : seq.data) {
    v = static_cast<float>(rng.gaussian());
  }

  AugmentConfig aug{3, 0};
  const auto vp = make_views(seq, aug, rng);
  inst.trace_a = forward(inst.params, vp.view_a);
  inst.trace_b = forward(inst.params, vp.view_b);
  inst.y = static_cast<int>(rng.uniform_below(2));
  return inst;
}

}  // namespace

TEST_CASE("bce closed forms") {
  CHECK(bce(0.5, 1) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  CHECK(bce(0.9, 0) == doctest::Approx(-std::log(0.1)).epsilon(1e-12));
  // approaching certainty from below the clamp: loss is ~1e-7
  CHECK(bce(1.0 - 1e-7, 1) == doctest::Approx(1e-7).epsilon(1e-2));
  CHECK(bce(1e-7, 0) == doctest::Approx(1e-7).epsilon(1e-2));
}

TEST_CASE("bce rejects out-of-domain inputs") {
  CHECK_THROWS_AS(bce(0.0, 1), std::domain_error);
  CHECK_THROWS_AS(bce(1.0, 1), std::domain_error);
  CHECK_THROWS_AS(bce(-0.2, 0), std::domain_error);
  CHECK_THROWS_AS(bce(0.5, 2), std::domain_error);
}

TEST_CASE("sparsity is the plain sum for positive entries") {
  const std::vector<double> v{0.2, 0.3, 0.5};
  CHECK(sparsity(v) == 0.2 + 0.3 + 0.5);  // left-to-right, exact

  const std::vector<double> tiny{1e-12, 1e-12};
  CHECK(sparsity(tiny) == doctest::Approx(2e-12).epsilon(1e-10));

  const std::vector<double> half(8, 0.5);
  CHECK(sparsity(half) == 4.0);
}

TEST_CASE("smoothness closed forms") {
  const std::vector<double> c(5, 0.37);
  CHECK(smoothness(c) == 0.0);

  const std::vector<double> v{0.1, 0.4, 0.2};
  CHECK(smoothness(v) == doctest::Approx(0.13).epsilon(1e-12));

  const std::vector<double> single{0.9};
  CHECK(smoothness(single) == 0.0);
}

TEST_CASE("smoothness is invariant under constant shift") {
  Rng rng(41);
  std::vector<double> v(12);
  for (auto& x : v) {
    x = rng.uniform(0.0, 1.0);
  }
  auto shifted = v;
  for (auto& x : shifted) {
    x += 0.25;
  }
  CHECK(smoothness(shifted) == doctest::Approx(smoothness(v)).epsilon(1e-12));
}

TEST_CASE("alignment closed forms and symmetry") {
  const std::vector<double> a{0.5, 0.5};
  const std::vector<double> b{0.0, 1.0};
  CHECK(alignment(a, b) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(alignment(b, a) == alignment(a, b));
  CHECK(alignment(a, a) == 0.0);

  const std::vector<double> c{0.1};
  CHECK_THROWS_AS(alignment(a, c), std::invalid_argument);
}

TEST_CASE("identical views drop the alignment term entirely") {
  const auto inst = random_instance(1);
  const LossWeights w1{0.1, 0.2, 0.3};
  const LossWeights w2{0.1, 0.2, 123.0};
  const auto lb1 = total_loss(inst.trace_a, inst.trace_a, inst.y, w1);
  const auto lb2 = total_loss(inst.trace_a, inst.trace_a, inst.y, w2);
  CHECK(lb1.a == 0.0);
  CHECK(lb1.total == lb2.total);  // gamma cannot matter when a == 0

  const auto lg = loss_grads(inst.trace_a, inst.trace_a, inst.y, w2);
  // alignment contribution is identically zero; remaining gradient is the
  // same for both views by symmetry
  CHECK(lg.dlambda_a == lg.dlambda_b);
}

TEST_CASE("zero weights reduce the total to the classification term") {
  const auto inst = random_instance(2);
  const LossWeights w{0.0, 0.0, 0.0};
  const auto lb = total_loss(inst.trace_a, inst.trace_b, inst.y, w);
  CHECK(lb.total == lb.cl);
}

TEST_CASE("total recomposes from the four terms") {
  for (std::uint64_t seed = 3; seed < 13; ++seed) {
    const auto inst = random_instance(seed);
    const LossWeights w{2e-8, 0.002, 0.5};
    const auto lb = total_loss(inst.trace_a, inst.trace_b, inst.y, w);

    const double cl = 0.5 * (bce(inst.trace_a.prob, inst.y) + bce(inst.trace_b.prob, inst.y));
    const double sp = 0.5 * (sparsity(inst.trace_a.lambda) + sparsity(inst.trace_b.lambda));
    const double sm = 0.5 * (smoothness(inst.trace_a.lambda) + smoothness(inst.trace_b.lambda));
    const double a = alignment(inst.trace_a.lambda, inst.trace_b.lambda);
    const double recomposed = cl + w.alpha * sp + w.beta * sm + w.gamma * a;

    CHECK(std::abs(lb.total - recomposed) <= 1e-12);
    CHECK(lb.total == lb.cl + w.alpha * lb.sp + w.beta * lb.sm + w.gamma * lb.a);
    CHECK(lb.cl >= 0.0);
    CHECK(lb.sp >= 0.0);
    CHECK(lb.sm >= 0.0);
    CHECK(lb.a >= 0.0);
  }
}

TEST_CASE("total is monotone in each weight when its term is positive") {
  const auto inst = random_instance(14);
  const LossWeights base{0.1, 0.1, 0.1};
  const auto lb = total_loss(inst.trace_a, inst.trace_b, inst.y, base);
  REQUIRE(lb.sp > 0.0);

  LossWeights up = base;
  up.alpha = 0.2;
  CHECK(total_loss(inst.trace_a, inst.trace_b, inst.y, up).total > lb.total);
  up = base;
  up.beta = 0.3;
  if (lb.sm > 0.0) {
    CHECK(total_loss(inst.trace_a, inst.trace_b, inst.y, up).total > lb.total);
  }
  up = base;
  up.gamma = 0.4;
  if (lb.a > 0.0) {
    CHECK(total_loss(inst.trace_a, inst.trace_b, inst.y, up).total > lb.total);
  }
}

TEST_CASE("sparsity derivative is one per coordinate") {
  // finite difference on the raw term
  std::vector<double> lam{0.2, 0.7, 0.4};
  const double eps = 1e-6;
  for (std::size_t t = 0; t < lam.size(); ++t) {
    auto plus = lam, minus = lam;
    plus[t] += eps;
    minus[t] -= eps;
    const double fd = (sparsity(plus) - sparsity(minus)) / (2 * eps);
    CHECK(fd == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("loss gradients match central differences") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const auto inst = random_instance(seed);
    const LossWeights w{0.3, 0.2, 0.7};
    const auto lg = loss_grads(inst.trace_a, inst.trace_b, inst.y, w);

    const double eps = 1e-5;
    double max_rel = 0.0;
    const auto check_coord = [&](bool view_a_side, std::size_t t, double analytic) {
      auto ta = inst.trace_a;
      auto tb = inst.trace_b;
      auto& lam = view_a_side ? ta.lambda : tb.lambda;
      const double saved = lam[t];
      lam[t] = saved + eps;
      const double plus = total_loss(ta, tb, inst.y, w).total;
      lam[t] = saved - eps;
      const double minus = total_loss(ta, tb, inst.y, w).total;
      const double fd = (plus - minus) / (2 * eps);
      max_rel = std::max(max_rel,
                         std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8}));
    };
    for (std::size_t t = 0; t < inst.trace_a.lambda.size(); ++t) {
      check_coord(true, t, lg.dlambda_a[t]);
      check_coord(false, t, lg.dlambda_b[t]);
    }

    // probability coordinates
    {
      auto ta = inst.trace_a;
      const double saved = ta.prob;
      ta.prob = saved + eps;
      const double plus = total_loss(ta, inst.trace_b, inst.y, w).total;
      ta.prob = saved - eps;
      const double minus = total_loss(ta, inst.trace_b, inst.y, w).total;
      const double fd = (plus - minus) / (2 * eps);
      max_rel = std::max(max_rel, std::abs(lg.dprob_a - fd) /
                                      std::max({std::abs(lg.dprob_a), std::abs(fd), 1e-8}));
    }
    CHECK(max_rel < 1e-6);
  }
}
