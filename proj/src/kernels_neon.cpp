// NEON kernel variants for aarch64. float64x2_t carries one 2-D point per
// register, which makes the flipped walk a plain reversed load.

#include "tanglekit/kernels.hpp"

#include <arm_neon.h>

namespace tanglekit::kernels::detail {

namespace {

double sum_sq_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        tail += d * d;
    }
    return vaddvq_f64(acc) + tail;
}

double sum_sq_diff_flipped_neon(const double* a, const double* b, std::size_t n_points) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n_points; ++i) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + 2 * i),
                                  vld1q_f64(b + 2 * (n_points - 1 - i)));
        acc = vfmaq_f64(acc, d, d);
    }
    return vaddvq_f64(acc);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return vaddvq_f64(acc) + tail;
}

} // namespace

const Ops neon_ops{sum_sq_diff_neon, sum_sq_diff_flipped_neon, dot_neon};

} // namespace tanglekit::kernels::detail
