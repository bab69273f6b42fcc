#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tanglekit {

// SplitMix64 finalizer. Used to derive independent seeds from a master seed
// so that each pipeline stage / worm / frame gets its own stream and results
// do not depend on evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

// Deterministic RNG. mt19937_64 output is fully specified by the standard and
// the uniform/normal transforms below are hand-rolled, so identical seeds give
// bit-identical sequences on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (stateless across calls: both values of
    // the pair are consumed, one is cached)
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        return n == 0 ? 0 : engine_() % n;
    }

    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        // Knuth for small lambda; normal approximation above 30.
        if (lambda > 30.0) {
            int v = static_cast<int>(std::lround(normal(lambda, std::sqrt(lambda))));
            return v < 0 ? 0 : v;
        }
        double limit = std::exp(-lambda);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace tanglekit
