#include "tanglekit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace tanglekit::kernels {

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(TK_BUILD_AVX2)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::neon:
#if defined(TK_BUILD_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Ops& ops(Backend b) {
    switch (b) {
        case Backend::scalar:
            return detail::scalar_ops;
        case Backend::avx2:
#if defined(TK_BUILD_AVX2)
            return detail::avx2_ops;
#else
            break;
#endif
        case Backend::neon:
#if defined(TK_BUILD_NEON)
            return detail::neon_ops;
#else
            break;
#endif
    }
    throw std::runtime_error("kernel backend not built into this binary");
}

namespace {

Backend pick_default() {
    if (const char* env = std::getenv("TANGLEKIT_SIMD")) {
        std::string s(env);
        if (s == "scalar") return Backend::scalar;
        if (s == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
        if (s == "neon" && backend_available(Backend::neon)) return Backend::neon;
        // unknown or unavailable request falls through to autodetect
    }
    if (backend_available(Backend::avx2)) return Backend::avx2;
    if (backend_available(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

std::atomic<Backend> g_backend{pick_default()};

} // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void force_backend(Backend b) {
    if (!backend_available(b)) throw std::runtime_error("kernel backend unavailable: " + backend_name(b));
    g_backend.store(b, std::memory_order_relaxed);
}

const Ops& active() { return ops(active_backend()); }

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

} // namespace tanglekit::kernels
