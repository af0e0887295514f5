#include "claricov/simd.hpp"

#include "simd_backends.hpp"

namespace claricov::simd {

namespace {

struct Table {
    const char* name;
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*squared_distances)(double, double, const double*, const double*, double*, std::size_t);
    void (*exp_inplace)(double*, std::size_t);
    void (*kernel_row_matern12)(const double*, double, double, double, double*, std::size_t);
    void (*kernel_row_se)(const double*, double, double, double*, std::size_t);
};

constexpr Table kScalarTable = {
    "scalar",
    &scalar::dot,
    &scalar::sum,
    &scalar::axpy,
    &scalar::squared_distances,
    &scalar::exp_inplace,
    &scalar::kernel_row_matern12,
    &scalar::kernel_row_se,
};

#ifdef CLARICOV_HAVE_AVX2_TU
constexpr Table kAvx2Table = {
    "avx2",
    &avx2::dot,
    &avx2::sum,
    &avx2::axpy,
    &avx2::squared_distances,
    &avx2::exp_inplace,
    &avx2::kernel_row_matern12,
    &avx2::kernel_row_se,
};
#endif

bool cpu_has_avx2_fma() {
#if defined(CLARICOV_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table& table() {
#ifdef CLARICOV_HAVE_AVX2_TU
    static const Table& t = cpu_has_avx2_fma() ? kAvx2Table : kScalarTable;
#else
    static const Table& t = kScalarTable;
#endif
    return t;
}

} // namespace

const char* active_backend() { return table().name; }

bool avx2_available() { return cpu_has_avx2_fma(); }

double dot(const double* a, const double* b, std::size_t n) {
    return table().dot(a, b, n);
}

double sum(const double* x, std::size_t n) { return table().sum(x, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    table().axpy(alpha, x, y, n);
}

void squared_distances(double qx, double qy, const double* xs, const double* ys,
                       double* out, std::size_t n) {
    table().squared_distances(qx, qy, xs, ys, out, n);
}

void exp_inplace(double* x, std::size_t n) { table().exp_inplace(x, n); }

void kernel_row_matern12(const double* d2, double sigma_sq, double inv_length,
                         double delta_sq, double* out, std::size_t n) {
    table().kernel_row_matern12(d2, sigma_sq, inv_length, delta_sq, out, n);
}

void kernel_row_se(const double* d2, double sigma_sq, double inv_two_length_sq,
                   double* out, std::size_t n) {
    table().kernel_row_se(d2, sigma_sq, inv_two_length_sq, out, n);
}

} // namespace claricov::simd
