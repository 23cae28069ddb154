// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma; only dispatched when
// the running CPU reports both features.

#include "tanom/kernels.hpp"

#include <immintrin.h>

namespace tanom::kernels::avx2 {

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    acc = _mm256_fmadd_pd(xv, yv, acc);
  }
  // Fixed horizontal order: (l0 + l1) + (l2 + l3), then the scalar tail.
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);  // {l0+l2, l1+l3}
  double sum = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
  for (; i < n; ++i) {
    sum += x[i] * y[i];
  }
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, xv, yv));
  }
  for (; i < n; ++i) {
    y[i] += a * x[i];
  }
}

}  // namespace tanom::kernels::avx2
