#include "tanom/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tanom {

namespace {

constexpr double kProbClampLo = 1e-7;
constexpr double kProbClampHi = 1.0 - 1e-7;

double clamp_prob(double p) {
  if (p < kProbClampLo) return kProbClampLo;
  if (p > kProbClampHi) return kProbClampHi;
  return p;
}

// d bce / d prob, zero where the clamp is active.
double bce_grad(double prob, int y) {
  if (prob <= kProbClampLo || prob >= kProbClampHi) {
    return 0.0;
  }
  return (prob - y) / (prob * (1.0 - prob));
}

void check_pair(const ForwardTrace& a, const ForwardTrace& b) {
  if (a.T != b.T) {
    throw std::invalid_argument("view traces have different lengths");
  }
}

// d smoothness / d lambda, accumulated scaled by `scale`.
void add_smoothness_grad(std::span<const double> lam, double scale, std::vector<double>& out) {
  const auto T = lam.size();
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const double diff = lam[t] - lam[t + 1];
    out[t] += scale * 2.0 * diff;
    out[t + 1] -= scale * 2.0 * diff;
  }
}

}  // namespace

double bce(double prob, int y) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::domain_error("bce: prob must lie strictly inside (0, 1)");
  }
  if (y != 0 && y != 1) {
    throw std::domain_error("bce: label must be 0 or 1");
  }
  const double p = clamp_prob(prob);
  return -(y * std::log(p) + (1 - y) * std::log(1.0 - p));
}

double sparsity(std::span<const double> lambda) {
  double sum = 0.0;
  for (double v : lambda) {
    sum += std::abs(v);
  }
  return sum;
}

double smoothness(std::span<const double> lambda) {
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < lambda.size(); ++t) {
    const double diff = lambda[t] - lambda[t + 1];
    sum += diff * diff;
  }
  return sum;
}

double alignment(std::span<const double> lambda_a, std::span<const double> lambda_b) {
  if (lambda_a.size() != lambda_b.size()) {
    throw std::invalid_argument("alignment: vectors must have equal length");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < lambda_a.size(); ++t) {
    const double diff = lambda_a[t] - lambda_b[t];
    sum += diff * diff;
  }
  return sum;
}

LossBreakdown total_loss(const ForwardTrace& trace_a, const ForwardTrace& trace_b, int y,
                         const LossWeights& w) {
  check_pair(trace_a, trace_b);
  LossBreakdown out;
  out.cl = 0.5 * (bce(trace_a.prob, y) + bce(trace_b.prob, y));
  out.sp = 0.5 * (sparsity(trace_a.lambda) + sparsity(trace_b.lambda));
  out.sm = 0.5 * (smoothness(trace_a.lambda) + smoothness(trace_b.lambda));
  out.a = alignment(trace_a.lambda, trace_b.lambda);
  out.total = out.cl + w.alpha * out.sp + w.beta * out.sm + w.gamma * out.a;
  return out;
}

LossGrads loss_grads(const ForwardTrace& trace_a, const ForwardTrace& trace_b, int y,
                     const LossWeights& w) {
  check_pair(trace_a, trace_b);
  const auto T = trace_a.lambda.size();

  LossGrads g;
  g.dprob_a = 0.5 * bce_grad(clamp_prob(trace_a.prob), y);
  g.dprob_b = 0.5 * bce_grad(clamp_prob(trace_b.prob), y);
  g.dlambda_a.assign(T, 0.0);
  g.dlambda_b.assign(T, 0.0);

  // Sparsity: entries are positive, so d|v|/dv = 1.
  for (std::size_t t = 0; t < T; ++t) {
    g.dlambda_a[t] += w.alpha * 0.5;
    g.dlambda_b[t] += w.alpha * 0.5;
  }

  add_smoothness_grad(trace_a.lambda, w.beta * 0.5, g.dlambda_a);
  add_smoothness_grad(trace_b.lambda, w.beta * 0.5, g.dlambda_b);

  for (std::size_t t = 0; t < T; ++t) {
    const double diff = trace_a.lambda[t] - trace_b.lambda[t];
    g.dlambda_a[t] += w.gamma * 2.0 * diff;
    g.dlambda_b[t] -= w.gamma * 2.0 * diff;
  }
  return g;
}

}  // namespace tanom
