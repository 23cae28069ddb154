// Training objective: classification cross-entropy plus three regularizers
// over the attention coefficients — an l1 sparsity term, a squared-difference
// smoothness term over adjacent steps, and a squared-distance alignment term
// between the two augmented views of the same video. The total is
//
//   total = cl + alpha * sp + beta * sm + gamma * a
//
// with cl/sp/sm each averaged over the two views and the alignment term the
// only cross-view quantity. Exact analytic gradients are provided for the
// attention vectors and the per-view probabilities.

#pragma once

#include <span>
#include <vector>

#include "tanom/model.hpp"

namespace tanom {

struct LossWeights {
  double alpha = 2e-8;  // sparsity
  double beta = 0.002;  // smoothness
  double gamma = 0.5;   // alignment
};

struct LossBreakdown {
  double cl = 0.0;
  double sp = 0.0;
  double sm = 0.0;
  double a = 0.0;
  double total = 0.0;
};

// -[y ln p + (1-y) ln(1-p)], p clamped to [1e-7, 1-1e-7] before the logs.
// Throws std::domain_error unless 0 < prob < 1.
double bce(double prob, int y);

// l1 norm; entries live in (0,1) so this is just the sum.
double sparsity(std::span<const double> lambda);

// sum of squared adjacent differences; 0 for T = 1.
double smoothness(std::span<const double> lambda);

// sum of squared elementwise differences between equal-length vectors.
double alignment(std::span<const double> lambda_a, std::span<const double> lambda_b);

LossBreakdown total_loss(const ForwardTrace& trace_a, const ForwardTrace& trace_b, int y,
                         const LossWeights& w);

struct LossGrads {
  std::vector<double> dlambda_a;
  std::vector<double> dlambda_b;
  double dprob_a = 0.0;
  double dprob_b = 0.0;
};

LossGrads loss_grads(const ForwardTrace& trace_a, const ForwardTrace& trace_b, int y,
                     const LossWeights& w);

}  // namespace tanom
