// Finite-difference certification of the analytic gradients.
//
// Each instance draws a small random model, a random sequence, a random view
// pair and label, then compares every parameter's analytic partial of the
// combined objective against a central difference. The relative error uses a
// small denominator floor so that coordinates whose true partial is below
// float-difference noise do not produce spurious ratios:
//
//   rel = |analytic - fd| / max(|analytic|, |fd|, 1e-5)

#pragma once

#include <cstdint>
#include <string>

namespace tanom {

struct GradCheckConfig {
  int instances = 20;
  int max_T = 16;
  int max_D = 8;
  double epsilon = 1e-5;
  double threshold = 1e-4;
  std::uint64_t seed = 2024;
  bool perturb = false;  // fault injection: corrupt one analytic entry
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_coord;  // "tensor[index]" of the worst mismatch
  int instances = 0;
  int coords_checked = 0;

  bool passed(double threshold) const { return max_rel_err < threshold; }
};

GradCheckResult run_gradcheck(const GradCheckConfig& cfg);

}  // namespace tanom
