#include "tanglekit/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "tanglekit/parallel.hpp"

namespace tanglekit::synth {

namespace {

// Centre-line samples spaced this far apart (px) approximate the tube as a
// union of disks; 1/4 px is well below the default body radius.
constexpr double kSampleSpacing = 0.25;

struct CentreSample {
    Vec2 pos;
    double radius;
};

std::vector<CentreSample> sample_centreline(const Spline& spline,
                                            const RenderConfig& config) {
    std::vector<CentreSample> samples;
    const double total = spline.polyline_length();
    if (total <= 0.0) {
        samples.push_back({spline.points.front(), radius_profile(0.0, config)});
        return samples;
    }
    double walked = 0.0;  // arc length consumed so far
    samples.push_back({spline.points.front(), radius_profile(0.0, config)});
    for (std::size_t i = 0; i + 1 < spline.k(); ++i) {
        const Vec2 a = spline.points[i];
        const Vec2 b = spline.points[i + 1];
        const double seg = dist(a, b);
        if (seg <= 0.0) continue;
        double used = 0.0;  // portion of this segment already emitted
        while (used + kSampleSpacing <= seg) {
            used += kSampleSpacing;
            const double s_frac = (walked + used) / total;
            samples.push_back(
                {a + (b - a) * (used / seg), radius_profile(s_frac, config)});
        }
        walked += seg;
    }
    const Vec2 tail = spline.points.back();
    if (dist(samples.back().pos, tail) > 1e-12) {
        samples.push_back({tail, radius_profile(1.0, config)});
    }
    return samples;
}

double interpolated_percentile(std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double rank = p / 100.0 * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

[[noreturn]] void pgm_error(const std::string& path, const std::string& what,
                            std::size_t offset) {
    throw std::runtime_error(path + ": " + what + " at byte " +
                             std::to_string(offset));
}

}  // namespace

void RenderConfig::validate() const {
    if (!(max_radius > 0.0)) {
        throw std::invalid_argument("max_radius must be positive");
    }
    if (std::abs(b) > 1.0 || std::abs(a + b) > 1.0) {
        throw std::invalid_argument(
            "radius profile leaves [-1, 1]: need |b| <= 1 and |a + b| <= 1");
    }
    if (body_intensity < 0.0 || body_intensity > 1.0 ||
        background_intensity < 0.0 || background_intensity > 1.0) {
        throw std::invalid_argument("intensities must lie in [0, 1]");
    }
}

void NoiseConfig::validate() const {
    if (background_amplitude < 0.0 || vignette_strength < 0.0 ||
        blur_sigma < 0.0 || noise_sigma < 0.0) {
        throw std::invalid_argument("noise parameters must be nonnegative");
    }
}

double radius_profile(double s, const RenderConfig& config) {
    const double u = config.a * s + config.b;
    if (std::abs(u) > 1.0) {
        throw std::invalid_argument("radius profile argument outside [-1, 1]");
    }
    // |sin(arccos(u))| == sqrt(1 - u^2) on [-1, 1].
    return config.max_radius * std::sqrt(1.0 - u * u);
}

Frame rasterize(const std::vector<Spline>& splines, const RenderConfig& config,
                int height, int width) {
    config.validate();
    if (height <= 0 || width <= 0) {
        throw std::invalid_argument("frame size must be positive");
    }

    Frame frame;
    frame.width = width;
    frame.height = height;
    frame.pixels.assign(static_cast<std::size_t>(width) * height,
                        config.background_intensity);

    // One 4x4 coverage bitmask per pixel, reused across worms.
    std::vector<std::uint16_t> mask(frame.pixels.size(), 0);

    for (const Spline& spline : splines) {
        if (spline.k() == 0) continue;
        const auto samples = sample_centreline(spline, config);

        int min_x = width, max_x = -1, min_y = height, max_y = -1;
        for (const CentreSample& cs : samples) {
            if (cs.radius <= 0.0) continue;
            const double r_sq = cs.radius * cs.radius;
            const int x0 = std::max(0, static_cast<int>(std::floor(cs.pos.x - cs.radius)));
            const int x1 = std::min(width - 1, static_cast<int>(std::floor(cs.pos.x + cs.radius)));
            const int y0 = std::max(0, static_cast<int>(std::floor(cs.pos.y - cs.radius)));
            const int y1 = std::min(height - 1, static_cast<int>(std::floor(cs.pos.y + cs.radius)));
            for (int py = y0; py <= y1; ++py) {
                for (int px = x0; px <= x1; ++px) {
                    std::uint16_t bits =
                        mask[static_cast<std::size_t>(py) * width + px];
                    if (bits == 0xffff) continue;
                    for (int sub = 0; sub < 16; ++sub) {
                        const std::uint16_t bit = static_cast<std::uint16_t>(1u << sub);
                        if (bits & bit) continue;
                        const double sx = px + (static_cast<double>(sub % 4) + 0.5) * 0.25;
                        const double sy = py + (static_cast<double>(sub / 4) + 0.5) * 0.25;
                        const double dx = sx - cs.pos.x;
                        const double dy = sy - cs.pos.y;
                        if (dx * dx + dy * dy <= r_sq) bits |= bit;
                    }
                    mask[static_cast<std::size_t>(py) * width + px] = bits;
                }
            }
            min_x = std::min(min_x, x0);
            max_x = std::max(max_x, x1);
            min_y = std::min(min_y, y0);
            max_y = std::max(max_y, y1);
        }

        // Composite this worm by maximum intensity, then clear its region.
        const double span = config.body_intensity - config.background_intensity;
        for (int py = min_y; py <= max_y; ++py) {
            for (int px = min_x; px <= max_x; ++px) {
                const std::size_t idx = static_cast<std::size_t>(py) * width + px;
                if (mask[idx] == 0) continue;
                const double coverage = std::popcount(mask[idx]) / 16.0;
                frame.pixels[idx] = std::max(
                    frame.pixels[idx],
                    config.background_intensity + coverage * span);
                mask[idx] = 0;
            }
        }
    }
    return frame;
}

Frame degrade(const Frame& frame, const NoiseConfig& config, Rng& rng) {
    config.validate();
    Frame out = frame;
    const int w = frame.width;
    const int h = frame.height;

    // Low-frequency background: bilinear ramp between four corner offsets
    // (drawn even when the amplitude is zero, to keep the stream layout fixed).
    const double c_tl = rng.uniform(0.0, config.background_amplitude);
    const double c_tr = rng.uniform(0.0, config.background_amplitude);
    const double c_bl = rng.uniform(0.0, config.background_amplitude);
    const double c_br = rng.uniform(0.0, config.background_amplitude);
    if (config.background_amplitude > 0.0) {
        for (int y = 0; y < h; ++y) {
            const double v = (y + 0.5) / h;
            for (int x = 0; x < w; ++x) {
                const double u = (x + 0.5) / w;
                const double top = c_tl * (1.0 - u) + c_tr * u;
                const double bottom = c_bl * (1.0 - u) + c_br * u;
                out.at(x, y) += top * (1.0 - v) + bottom * v;
            }
        }
    }

    if (config.vignette_strength > 0.0) {
        const double cx = w / 2.0;
        const double cy = h / 2.0;
        const double corner_sq = cx * cx + cy * cy;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double dx = (x + 0.5) - cx;
                const double dy = (y + 0.5) - cy;
                const double factor = 1.0 - config.vignette_strength *
                                                (dx * dx + dy * dy) / corner_sq;
                out.at(x, y) *= std::max(0.0, factor);
            }
        }
    }

    if (config.blur_sigma > 0.0) {
        const double sigma = config.blur_sigma;
        const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
        std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
        double sum = 0.0;
        for (int i = -half; i <= half; ++i) {
            kernel[static_cast<std::size_t>(i + half)] =
                std::exp(-0.5 * (i * i) / (sigma * sigma));
            sum += kernel[static_cast<std::size_t>(i + half)];
        }
        for (double& kv : kernel) kv /= sum;

        Frame tmp = out;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -half; i <= half; ++i) {
                    const int xi = std::clamp(x + i, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(i + half)] * out.at(xi, y);
                }
                tmp.at(x, y) = acc;
            }
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -half; i <= half; ++i) {
                    const int yi = std::clamp(y + i, 0, h - 1);
                    acc += kernel[static_cast<std::size_t>(i + half)] * tmp.at(x, yi);
                }
                out.at(x, y) = acc;
            }
        }
    }

    if (config.noise_sigma > 0.0) {
        for (double& p : out.pixels) p += rng.normal(0.0, config.noise_sigma);
    }

    for (double& p : out.pixels) p = std::clamp(p, 0.0, 1.0);
    return out;
}

Frame normalize_percentile(const Frame& frame, double lo, double hi,
                           bool* degenerate) {
    if (!(lo >= 0.0 && lo < hi && hi <= 100.0)) {
        throw std::invalid_argument("percentiles must satisfy 0 <= lo < hi <= 100");
    }
    if (frame.pixels.empty()) throw std::invalid_argument("empty frame");

    std::vector<double> sorted = frame.pixels;
    std::sort(sorted.begin(), sorted.end());
    const double p_lo = interpolated_percentile(sorted, lo);
    const double p_hi = interpolated_percentile(sorted, hi);

    Frame out = frame;
    if (!(p_hi > p_lo)) {
        std::fill(out.pixels.begin(), out.pixels.end(), 0.0);
        if (degenerate) *degenerate = true;
        return out;
    }
    if (degenerate) *degenerate = false;
    const double inv = 1.0 / (p_hi - p_lo);
    for (double& p : out.pixels) {
        p = std::clamp((p - p_lo) * inv, 0.0, 1.0);
    }
    return out;
}

std::vector<Frame> render_clip(const wormsim::Scene& scene,
                               const RenderConfig& render_config,
                               const NoiseConfig& noise_config,
                               std::uint64_t seed) {
    render_config.validate();
    noise_config.validate();
    const std::size_t n = scene.n_frames();
    if (n == 0) throw std::invalid_argument("scene has no frames");

    std::vector<Frame> frames(n);
    parallel_for(n, [&](std::size_t f) {
        std::vector<Spline> splines;
        splines.reserve(scene.worms.size());
        for (const auto& worm : scene.worms) splines.push_back(worm.states[f].spline);
        Frame img = rasterize(splines, render_config, scene.height, scene.width);
        Rng rng(derive_seed(seed, f));
        img = degrade(img, noise_config, rng);
        frames[f] = normalize_percentile(img);
    });
    return frames;
}

void write_pgm(const Frame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    std::vector<unsigned char> bytes(frame.pixels.size());
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        const double scaled = std::floor(frame.pixels[i] * 255.0 + 0.5);
        bytes[i] = static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write: " + path);
}

Frame read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    auto skip_space = [&]() {
        while (pos < data.size()) {
            const char c = data[pos];
            if (c == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto parse_int = [&](const char* what) {
        skip_space();
        const std::size_t start = pos;
        long value = 0;
        while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
            value = value * 10 + (data[pos] - '0');
            if (value > 1'000'000'000L) pgm_error(path, "oversized integer", start);
            ++pos;
        }
        if (pos == start) {
            pgm_error(path, std::string("expected ") + what, start);
        }
        return value;
    };

    if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
        pgm_error(path, "expected P5 magic", 0);
    }
    pos = 2;
    const long width = parse_int("width");
    const long height = parse_int("height");
    const long maxval = parse_int("maxval");
    if (width < 1 || height < 1) pgm_error(path, "invalid dimensions", pos);
    if (maxval < 1 || maxval > 255) pgm_error(path, "unsupported maxval", pos);
    if (pos >= data.size()) pgm_error(path, "missing pixel data", pos);
    const char sep = data[pos];
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n') {
        pgm_error(path, "expected whitespace before pixel data", pos);
    }
    ++pos;

    const std::size_t need =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (data.size() - pos < need) {
        pgm_error(path, "truncated pixel data", data.size());
    }

    Frame frame;
    frame.width = static_cast<int>(width);
    frame.height = static_cast<int>(height);
    frame.pixels.resize(need);
    const double inv = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < need; ++i) {
        frame.pixels[i] =
            static_cast<double>(static_cast<unsigned char>(data[pos + i])) * inv;
    }
    return frame;
}

}  // namespace tanglekit::synth
