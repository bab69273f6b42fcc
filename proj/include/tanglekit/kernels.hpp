#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops behind the geometry code. Every kernel has a
// scalar reference implementation plus SIMD variants (AVX2 on x86-64, NEON on
// aarch64) compiled into separate translation units and selected at runtime
// from CPU capabilities. The selection can be overridden through
// force_backend() or the TANGLEKIT_SIMD environment variable
// ("scalar" | "avx2" | "neon").
//
// SIMD variants need not agree with the scalar reference bit-for-bit;
// equivalence tests hold them to 1e-12 relative error.

namespace tanglekit::kernels {

enum class Backend { scalar, avx2, neon };

struct Ops {
    // sum_i (a[i] - b[i])^2
    double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
    // treats a and b as arrays of n 2-D points (x,y interleaved) and compares
    // a against b with reversed point order:
    // sum_i |a_i - b_{n-1-i}|^2
    double (*sum_sq_diff_flipped)(const double* a, const double* b, std::size_t n_points);
    // plain dot product
    double (*dot)(const double* a, const double* b, std::size_t n);
};

const Ops& ops(Backend b);
bool backend_available(Backend b);
Backend active_backend();
void force_backend(Backend b);

// Kernels using the runtime-selected backend.
const Ops& active();

std::string backend_name(Backend b);

namespace detail {
extern const Ops scalar_ops;
#if defined(TK_BUILD_AVX2)
extern const Ops avx2_ops;
#endif
#if defined(TK_BUILD_NEON)
extern const Ops neon_ops;
#endif
} // namespace detail

} // namespace tanglekit::kernels
