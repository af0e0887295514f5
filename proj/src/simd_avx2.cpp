#include "simd_backends.hpp"

#include <immintrin.h>

#include <cmath>

// AVX2+FMA variants. This TU is compiled with -mavx2 -mfma; the dispatcher
// never routes here unless the CPU reports both features.

namespace claricov::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// Cephes-style exp: range reduction against a split ln2, rational
// approximation in the reduced argument, 2^n scaling through the exponent
// bits. Inputs below -706 underflow to 0, inputs above 708 saturate; both
// limits keep the 2^n scaling inside the normal range.
inline __m256d exp_pd(__m256d x) {
    const __m256d kMaxArg = _mm256_set1_pd(708.0);
    const __m256d kMinArg = _mm256_set1_pd(-706.0);
    const __m256d kLog2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d kLn2Hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d kLn2Lo = _mm256_set1_pd(1.42860682030941723212e-6);

    const __m256d kP0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d kP1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d kP2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d kQ0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d kQ1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d kQ2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d kQ3 = _mm256_set1_pd(2.00000000000000000005e0);

    const __m256d underflow = _mm256_cmp_pd(x, kMinArg, _CMP_LT_OQ);
    x = _mm256_min_pd(x, kMaxArg);
    x = _mm256_max_pd(x, kMinArg);

    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kLog2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    x = _mm256_fnmadd_pd(n, kLn2Hi, x);
    x = _mm256_fnmadd_pd(n, kLn2Lo, x);

    const __m256d xx = _mm256_mul_pd(x, x);
    __m256d px = _mm256_fmadd_pd(kP0, xx, kP1);
    px = _mm256_fmadd_pd(px, xx, kP2);
    px = _mm256_mul_pd(px, x);
    __m256d qx = _mm256_fmadd_pd(kQ0, xx, kQ1);
    qx = _mm256_fmadd_pd(qx, xx, kQ2);
    qx = _mm256_fmadd_pd(qx, xx, kQ3);

    __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

    // e *= 2^n
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i bits =
        _mm256_add_epi64(_mm256_castpd_si256(e), _mm256_slli_epi64(n64, 52));
    e = _mm256_castsi256_pd(bits);

    return _mm256_andnot_pd(underflow, e);
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    if (i + 4 <= n) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void squared_distances(double qx, double qy, const double* xs, const double* ys,
                       double* out, std::size_t n) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(vqx, _mm256_loadu_pd(xs + i));
        const __m256d dy = _mm256_sub_pd(vqy, _mm256_loadu_pd(ys + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy)));
    }
    for (; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        out[i] = dx * dx + dy * dy;
    }
}

void exp_inplace(double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, exp_pd(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] = std::exp(x[i]);
}

void kernel_row_matern12(const double* d2, double sigma_sq, double inv_length,
                         double delta_sq, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(sigma_sq);
    const __m256d vneg_il = _mm256_set1_pd(-inv_length);
    const __m256d vd2reg = _mm256_set1_pd(delta_sq);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sqrt_pd(_mm256_add_pd(_mm256_loadu_pd(d2 + i), vd2reg));
        const __m256d e = exp_pd(_mm256_mul_pd(d, vneg_il));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, e));
    }
    for (; i < n; ++i)
        out[i] = sigma_sq * std::exp(-std::sqrt(d2[i] + delta_sq) * inv_length);
}

void kernel_row_se(const double* d2, double sigma_sq, double inv_two_length_sq,
                   double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(sigma_sq);
    const __m256d vneg_c = _mm256_set1_pd(-inv_two_length_sq);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d e = exp_pd(_mm256_mul_pd(_mm256_loadu_pd(d2 + i), vneg_c));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, e));
    }
    for (; i < n; ++i)
        out[i] = sigma_sq * std::exp(-d2[i] * inv_two_length_sq);
}

} // namespace claricov::simd::avx2
