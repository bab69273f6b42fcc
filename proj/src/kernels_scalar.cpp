#include "tanglekit/kernels.hpp"

namespace tanglekit::kernels::detail {

namespace {

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double sum_sq_diff_flipped_scalar(const double* a, const double* b, std::size_t n_points) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        std::size_t j = n_points - 1 - i;
        double dx = a[2 * i] - b[2 * j];
        double dy = a[2 * i + 1] - b[2 * j + 1];
        acc += dx * dx + dy * dy;
    }
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace

const Ops scalar_ops{sum_sq_diff_scalar, sum_sq_diff_flipped_scalar, dot_scalar};

} // namespace tanglekit::kernels::detail
