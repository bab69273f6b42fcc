#include <cmath>
#include <cstdlib>
#include <vector>

#include <doctest.h>

#include "tanglekit/kernels.hpp"
#include "tanglekit/rng.hpp"

namespace {

using namespace tanglekit;

double ref_sum_sq_diff(const std::vector<double>& a,
                       const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc;
}

double ref_sum_sq_diff_flipped(const std::vector<double>& a,
                               const std::vector<double>& b,
                               std::size_t n_points) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::size_t j = n_points - 1 - i;
        const double dx = a[2 * i] - b[2 * j];
        const double dy = a[2 * i + 1] - b[2 * j + 1];
        acc += dx * dx + dy * dy;
    }
    return acc;
}

double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::vector<double> random_array(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-100.0, 100.0);
    return v;
}

std::vector<kernels::Backend> testable_backends() {
    std::vector<kernels::Backend> backends{kernels::Backend::scalar};
    if (kernels::backend_available(kernels::Backend::avx2))
        backends.push_back(kernels::Backend::avx2);
    if (kernels::backend_available(kernels::Backend::neon))
        backends.push_back(kernels::Backend::neon);
    return backends;
}

}  // namespace

TEST_CASE("scalar backend is always available and selectable") {
    CHECK(kernels::backend_available(kernels::Backend::scalar));
    CHECK(kernels::backend_name(kernels::Backend::scalar) == "scalar");
    const kernels::Ops& ops = kernels::ops(kernels::Backend::scalar);
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> b{0.0, 1.0, 5.0, 2.0};
    CHECK(ops.sum_sq_diff(a.data(), b.data(), 4) == doctest::Approx(10.0));
    CHECK(ops.dot(a.data(), b.data(), 4) == doctest::Approx(25.0));
}

TEST_CASE("flipped distance on a hand-checked pair of 2-point curves") {
    // a = (0,0),(1,0); b = (1,0),(0,0): flipped comparison aligns them.
    const std::vector<double> a{0.0, 0.0, 1.0, 0.0};
    const std::vector<double> b{1.0, 0.0, 0.0, 0.0};
    for (kernels::Backend backend : testable_backends()) {
        const kernels::Ops& ops = kernels::ops(backend);
        CHECK(ops.sum_sq_diff_flipped(a.data(), b.data(), 2) ==
              doctest::Approx(0.0));
        CHECK(ops.sum_sq_diff(a.data(), b.data(), 4) == doctest::Approx(2.0));
    }
}

TEST_CASE("every available backend matches the scalar reference to 1e-12") {
    Rng rng(20240901);
    const kernels::Ops& scalar = kernels::ops(kernels::Backend::scalar);

    for (kernels::Backend backend : testable_backends()) {
        const kernels::Ops& ops = kernels::ops(backend);
        // Sweep sizes around SIMD lane boundaries, including odd tails.
        for (std::size_t n_points :
             {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 49u, 128u}) {
            const std::size_t n = 2 * n_points;
            const std::vector<double> a = random_array(rng, n);
            const std::vector<double> b = random_array(rng, n);

            const double s0 = scalar.sum_sq_diff(a.data(), b.data(), n);
            const double s1 = ops.sum_sq_diff(a.data(), b.data(), n);
            CHECK(std::abs(s0 - s1) <= 1e-12 * std::max(1.0, std::abs(s0)));
            CHECK(std::abs(s0 - ref_sum_sq_diff(a, b)) <=
                  1e-12 * std::max(1.0, std::abs(s0)));

            const double f0 =
                scalar.sum_sq_diff_flipped(a.data(), b.data(), n_points);
            const double f1 =
                ops.sum_sq_diff_flipped(a.data(), b.data(), n_points);
            CHECK(std::abs(f0 - f1) <= 1e-12 * std::max(1.0, std::abs(f0)));
            CHECK(std::abs(f0 - ref_sum_sq_diff_flipped(a, b, n_points)) <=
                  1e-12 * std::max(1.0, std::abs(f0)));

            const double d0 = scalar.dot(a.data(), b.data(), n);
            const double d1 = ops.dot(a.data(), b.data(), n);
            CHECK(std::abs(d0 - d1) <= 1e-12 * std::max(1.0, std::abs(d0)));
            CHECK(std::abs(d0 - ref_dot(a, b)) <=
                  1e-12 * std::max(1.0, std::abs(d0)));
        }
    }
}

TEST_CASE("force_backend switches the active kernels") {
    const kernels::Backend original = kernels::active_backend();
    kernels::force_backend(kernels::Backend::scalar);
    CHECK(kernels::active_backend() == kernels::Backend::scalar);
    CHECK(kernels::active().sum_sq_diff ==
          kernels::ops(kernels::Backend::scalar).sum_sq_diff);
    kernels::force_backend(original);
    CHECK(kernels::active_backend() == original);
}
