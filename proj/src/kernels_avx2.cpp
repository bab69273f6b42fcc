// AVX2 kernel variants. Compiled with -mavx2 -mfma in this translation unit
// only; the dispatcher guards execution behind a CPUID check.

#include "tanglekit/kernels.hpp"

#include <immintrin.h>

namespace tanglekit::kernels::detail {

namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        tail += d * d;
    }
    return hsum256(acc) + tail;
}

double sum_sq_diff_flipped_avx2(const double* a, const double* b, std::size_t n_points) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    // Two points (4 doubles) per iteration. Points i, i+1 of `a` pair with
    // points n-1-i, n-2-i of `b`; loading b at point n-2-i gives the pair in
    // ascending order, so the 128-bit lanes are swapped to reverse it.
    for (; i + 2 <= n_points; i += 2) {
        __m256d va = _mm256_loadu_pd(a + 2 * i);
        __m256d vb = _mm256_loadu_pd(b + 2 * (n_points - 2 - i));
        vb = _mm256_permute2f128_pd(vb, vb, 0x01);
        __m256d d = _mm256_sub_pd(va, vb);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double tail = 0.0;
    for (; i < n_points; ++i) {
        std::size_t j = n_points - 1 - i;
        double dx = a[2 * i] - b[2 * j];
        double dy = a[2 * i + 1] - b[2 * j + 1];
        tail += dx * dx + dy * dy;
    }
    return hsum256(acc) + tail;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hsum256(acc) + tail;
}

} // namespace

const Ops avx2_ops{sum_sq_diff_avx2, sum_sq_diff_flipped_avx2, dot_avx2};

} // namespace tanglekit::kernels::detail
