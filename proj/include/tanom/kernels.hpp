// Runtime-dispatched arithmetic kernels.
//
// Every dense inner loop in the toolkit (matvec rows, convolution windows,
// pooling, gradient outer products) funnels through two primitives: a dot
// product and an axpy. The scalar reference implementations accumulate
// strictly left-to-right; the SIMD variants use a fixed lane-blocked order,
// so results are deterministic for a fixed backend. Equivalence between
// backends is asserted by tests to tight tolerances, not bitwise.

#pragma once

#include <cstddef>
#include <string_view>

namespace tanom::kernels {

// sum_i x[i] * y[i]
using DotFn = double (*)(const double* x, const double* y, std::size_t n);
// y[i] += a * x[i]
using AxpyFn = void (*)(double a, const double* x, double* y, std::size_t n);

enum class Backend { Scalar, Avx2, Neon };

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(TANOM_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(TANOM_HAVE_NEON)
namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

// Active dispatch table. Defaults to scalar until a backend is selected.
extern DotFn dot;
extern AxpyFn axpy;

bool backend_available(Backend b);

// Installs the requested backend; throws std::runtime_error if unavailable.
void select_backend(Backend b);

// Picks the best available backend for this CPU and installs it.
Backend select_auto();

Backend active_backend();
std::string_view backend_name(Backend b);

// Parses "scalar" | "avx2" | "neon" | "auto" and installs it.
void select_backend_by_name(std::string_view name);

}  // namespace tanom::kernels
