#pragma once

#include <cstddef>

// Data-parallel array kernels used in the hot loops (kernel-matrix rows,
// cosine-transform reductions, clarity field sweeps). Every operation has a
// scalar reference implementation; on x86-64 an AVX2+FMA variant is selected
// at runtime. The two backends agree to floating-point reassociation /
// polynomial-exp accuracy; see the equivalence tests.

namespace claricov::simd {

/// Name of the backend the dispatcher picked ("avx2" or "scalar").
const char* active_backend();

/// True if the running CPU supports AVX2+FMA and the AVX2 TU was built in.
bool avx2_available();

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);

/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// out[i] = (qx - xs[i])^2 + (qy - ys[i])^2
void squared_distances(double qx, double qy, const double* xs, const double* ys,
                       double* out, std::size_t n);

/// x[i] = exp(x[i]); arguments below -708.39 underflow to 0.
void exp_inplace(double* x, std::size_t n);

/// out[i] = sigma_sq * exp(-sqrt(d2[i] + delta_sq) / L)
/// Exponential (Matern-1/2) kernel over a row of squared distances; delta_sq
/// is the smooth-at-origin regularizer (0 for exact evaluation).
void kernel_row_matern12(const double* d2, double sigma_sq, double inv_length,
                         double delta_sq, double* out, std::size_t n);

/// out[i] = sigma_sq * exp(-d2[i] / (2 L^2))
void kernel_row_se(const double* d2, double sigma_sq, double inv_two_length_sq,
                   double* out, std::size_t n);

/// Scalar reference implementations (always available; the dispatch targets
/// above must match these within documented tolerances).
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void squared_distances(double qx, double qy, const double* xs, const double* ys,
                       double* out, std::size_t n);
void exp_inplace(double* x, std::size_t n);
void kernel_row_matern12(const double* d2, double sigma_sq, double inv_length,
                         double delta_sq, double* out, std::size_t n);
void kernel_row_se(const double* d2, double sigma_sq, double inv_two_length_sq,
                   double* out, std::size_t n);
} // namespace scalar

} // namespace claricov::simd
