#pragma once

#include <cstddef>

// Internal: per-backend entry points wired up by the dispatcher.

namespace claricov::simd::avx2 {
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
} // namespace claricov::simd::avx2
