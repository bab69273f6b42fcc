#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tanglekit/rng.hpp"
#include "tanglekit/splines.hpp"
#include "tanglekit/wormsim.hpp"

namespace tanglekit::synth {

// Grayscale image, row-major, intensities in [0, 1].
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Body appearance. The local body radius follows
//   r(s) = max_radius * |sin(arccos(a s + b))|
// over arc fraction s in [0, 1]; defaults taper to zero at both ends
// (a = 2, b = -1) with a ~2 px wide midbody.
struct RenderConfig {
    double max_radius = 1.0;  // px
    double a = 2.0;
    double b = -1.0;
    double body_intensity = 0.85;
    double background_intensity = 0.10;

    // Throws std::invalid_argument when the radius profile would leave the
    // domain of arccos (|b| > 1 or |a + b| > 1) or max_radius <= 0.
    void validate() const;
};

// Degradation applied after rasterization, in order: additive bilinear
// background ramp (4 random corner offsets in [0, background_amplitude]),
// multiplicative vignette, Gaussian blur, additive white Gaussian noise,
// clamp to [0, 1]. All strengths at 0 = identity.
struct NoiseConfig {
    double background_amplitude = 0.08;
    double vignette_strength = 0.10;
    double blur_sigma = 0.6;   // px
    double noise_sigma = 0.02;

    void validate() const;  // throws on negatives
};

// r(s) per the profile above. Throws when |a s + b| > 1.
double radius_profile(double s, const RenderConfig& config);

// Stamps anti-aliased tubes of radius r(s) along each spline onto a
// background-filled frame. Coverage uses 4x4 subsampling; overlapping bodies
// composite by maximum intensity. Off-frame geometry is clipped.
Frame rasterize(const std::vector<Spline>& splines, const RenderConfig& config,
                int height, int width);

// Adds the configured artefacts. Deterministic given the rng state; draw
// order is 4 corner offsets, then per-pixel noise in row-major order.
Frame degrade(const Frame& frame, const NoiseConfig& config, Rng& rng);

// Linearly maps the lo-th percentile to 0 and the hi-th to 1 (interpolated
// percentiles), clamping outside. A flat frame (p_lo == p_hi) yields all
// zeros and sets *degenerate when provided.
Frame normalize_percentile(const Frame& frame, double lo = 1.0,
                           double hi = 99.0, bool* degenerate = nullptr);

// rasterize + degrade + normalize for every scene frame; per-frame noise
// streams are derived from `seed`, so output is thread-count independent.
std::vector<Frame> render_clip(const wormsim::Scene& scene,
                               const RenderConfig& render_config,
                               const NoiseConfig& noise_config,
                               std::uint64_t seed);

// Binary PGM (P5, maxval 255); intensities quantized round-half-up.
void write_pgm(const Frame& frame, const std::string& path);

// Parses a P5 file. Malformed input raises std::runtime_error naming the
// byte offset of the problem.
Frame read_pgm(const std::string& path);

}  // namespace tanglekit::synth
