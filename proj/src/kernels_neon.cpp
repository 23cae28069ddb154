// NEON kernel variants for aarch64 (float64x2 lanes, baseline feature there).

#include "tanom/kernels.hpp"

#include <arm_neon.h>

namespace tanom::kernels::neon {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  }
  double sum = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    sum += x[i] * y[i];
  }
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) {
    y[i] += a * x[i];
  }
}

}  // namespace tanom::kernels::neon
