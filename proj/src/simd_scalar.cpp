#include "claricov/simd.hpp"

#include <cmath>

namespace claricov::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void squared_distances(double qx, double qy, const double* xs, const double* ys,
                       double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        out[i] = dx * dx + dy * dy;
    }
}

void exp_inplace(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

void kernel_row_matern12(const double* d2, double sigma_sq, double inv_length,
                         double delta_sq, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = sigma_sq * std::exp(-std::sqrt(d2[i] + delta_sq) * inv_length);
}

void kernel_row_se(const double* d2, double sigma_sq, double inv_two_length_sq,
                   double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = sigma_sq * std::exp(-d2[i] * inv_two_length_sq);
}

} // namespace claricov::simd::scalar
