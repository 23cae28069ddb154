#include "tanom/kernels.hpp"

#include <stdexcept>
#include <string>

namespace tanom::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += x[i] * y[i];
  }
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += a * x[i];
  }
}

}  // namespace scalar

DotFn dot = scalar::dot;
AxpyFn axpy = scalar::axpy;

namespace {
Backend g_active = Backend::Scalar;
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(TANOM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(TANOM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

void select_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error("kernel backend not available: " +
                             std::string(backend_name(b)));
  }
  switch (b) {
    case Backend::Scalar:
      dot = scalar::dot;
      axpy = scalar::axpy;
      break;
    case Backend::Avx2:
#if defined(TANOM_HAVE_AVX2)
      dot = avx2::dot;
      axpy = avx2::axpy;
#endif
      break;
    case Backend::Neon:
#if defined(TANOM_HAVE_NEON)
      dot = neon::dot;
      axpy = neon::axpy;
#endif
      break;
  }
  g_active = b;
}

Backend select_auto() {
  if (backend_available(Backend::Avx2)) {
    select_backend(Backend::Avx2);
  } else if (backend_available(Backend::Neon)) {
    select_backend(Backend::Neon);
  } else {
    select_backend(Backend::Scalar);
  }
  return g_active;
}

Backend active_backend() { return g_active; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

void select_backend_by_name(std::string_view name) {
  if (name == "auto") {
    select_auto();
  } else if (name == "scalar") {
    select_backend(Backend::Scalar);
  } else if (name == "avx2") {
    select_backend(Backend::Avx2);
  } else if (name == "neon") {
    select_backend(Backend::Neon);
  } else {
    throw std::runtime_error("unknown kernel backend: " + std::string(name));
  }
}

}  // namespace tanom::kernels
