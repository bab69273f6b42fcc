#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <doctest.h>

#include "tanglekit/rng.hpp"
#include "tanglekit/synth.hpp"
#include "tanglekit/wormsim.hpp"

namespace {

using namespace tanglekit;
using namespace tanglekit::synth;

Spline horizontal_worm(double y, double x0, double x1, std::size_t k) {
    Spline s;
    for (std::size_t i = 0; i < k; ++i) {
        const double f = static_cast<double>(i) / (k - 1.0);
        s.points.push_back({x0 + f * (x1 - x0), y});
    }
    return s;
}

double coverage_sum(const Frame& frame, const RenderConfig& config) {
    double total = 0.0;
    for (double v : frame.pixels) {
        total += (v - config.background_intensity) /
                 (config.body_intensity - config.background_intensity);
    }
    return total;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/tanglekit_synth_") + name;
}

}  // namespace

TEST_CASE("radius_profile follows the arccos-sine taper") {
    RenderConfig config;
    config.max_radius = 2.0;
    CHECK(radius_profile(0.0, config) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(radius_profile(1.0, config) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(radius_profile(0.5, config) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(radius_profile(0.75, config) ==
          doctest::Approx(2.0 * std::sqrt(3.0) / 2.0).epsilon(1e-12));
    CHECK(radius_profile(0.25, config) ==
          doctest::Approx(2.0 * std::sqrt(3.0) / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(radius_profile(1.2, config), std::invalid_argument);

    RenderConfig bad = config;
    bad.b = -2.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.a = 3.0;  // |a + b| = 2
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.max_radius = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rasterize with no worms paints pure background") {
    RenderConfig config;
    const Frame frame = rasterize({}, config, 16, 24);
    CHECK(frame.width == 24);
    CHECK(frame.height == 16);
    REQUIRE(frame.pixels.size() == 16u * 24u);
    for (double v : frame.pixels) CHECK(v == config.background_intensity);
}

TEST_CASE("rasterize paints a straight worm symmetrically") {
    RenderConfig config;
    config.max_radius = 3.0;
    const Spline worm = horizontal_worm(20.0, 10.0, 50.0, 21);
    const Frame frame = rasterize({worm}, config, 40, 64);

    SUBCASE("mirror symmetry about the centerline") {
        // pixel (x, y) covers [x, x+1) x [y, y+1), so reflection about the
        // line y = 20 pairs row 20 + dy with row 19 - dy
        for (int dy = 0; dy <= 6; ++dy) {
            for (int x = 8; x < 54; ++x) {
                CHECK(frame.at(x, 20 + dy) ==
                      doctest::Approx(frame.at(x, 19 - dy)).epsilon(1e-12));
            }
        }
    }

    SUBCASE("midbody interior reaches full body intensity") {
        // s = 0.5 at x = 30, radius 3: pixel touching the centerline is interior
        CHECK(frame.at(30, 20) ==
              doctest::Approx(config.body_intensity).epsilon(1e-12));
    }

    SUBCASE("far away stays background") {
        CHECK(frame.at(5, 5) == config.background_intensity);
        CHECK(frame.at(60, 35) == config.background_intensity);
    }
}

TEST_CASE("rasterized area matches the analytic tube area") {
    RenderConfig config;
    config.max_radius = 2.0;
    const double L = 40.0;
    const Spline worm = horizontal_worm(32.0, 12.0, 12.0 + L, 41);
    const Frame frame = rasterize({worm}, config, 64, 64);
    const double area = coverage_sum(frame, config);
    const double expected = std::numbers::pi * config.max_radius * L / 2.0;
    CHECK(area == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("rasterize commutes with integer shifts") {
    RenderConfig config;
    config.max_radius = 2.5;
    Spline worm;
    worm.points = {{10, 12}, {15, 14}, {20, 12}, {25, 16}, {30, 15}};
    const Frame base = rasterize({worm}, config, 48, 56);

    Spline moved = worm;
    for (Vec2& p : moved.points) p += Vec2{7, 9};
    const Frame shifted = rasterize({moved}, config, 48, 56);

    for (int y = 0; y < 48 - 9; ++y) {
        for (int x = 0; x < 56 - 7; ++x) {
            CHECK(base.at(x, y) == shifted.at(x + 7, y + 9));
        }
    }
}

TEST_CASE("rasterized footprint grows with the body radius") {
    RenderConfig thin;
    thin.max_radius = 1.0;
    RenderConfig thick;
    thick.max_radius = 3.0;
    const Spline worm = horizontal_worm(16.0, 6.0, 42.0, 25);
    const double a_thin = coverage_sum(rasterize({worm}, thin, 32, 48), thin);
    const double a_thick =
        coverage_sum(rasterize({worm}, thick, 32, 48), thick);
    CHECK(a_thick > 2.0 * a_thin);
}

TEST_CASE("overlapping worms composite by maximum") {
    RenderConfig config;
    config.max_radius = 2.0;
    const Spline a = horizontal_worm(16.0, 6.0, 42.0, 25);
    const Frame one = rasterize({a}, config, 32, 48);
    const Frame two = rasterize({a, a}, config, 32, 48);
    for (std::size_t i = 0; i < one.pixels.size(); ++i) {
        CHECK(two.pixels[i] == one.pixels[i]);
    }
}

TEST_CASE("degrade with all strengths zero is the identity") {
    Rng rng(3);
    Frame frame;
    frame.width = 17;
    frame.height = 13;
    frame.pixels.resize(17 * 13);
    Rng fill(77);
    for (double& v : frame.pixels) v = fill.uniform();

    NoiseConfig off;
    off.background_amplitude = 0.0;
    off.vignette_strength = 0.0;
    off.blur_sigma = 0.0;
    off.noise_sigma = 0.0;
    const Frame out = degrade(frame, off, rng);
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        CHECK(out.pixels[i] == frame.pixels[i]);
    }
}

TEST_CASE("degrade noise statistics match the configured sigma") {
    Frame frame;
    frame.width = 128;
    frame.height = 128;
    frame.pixels.assign(128 * 128, 0.5);

    NoiseConfig config;
    config.background_amplitude = 0.0;
    config.vignette_strength = 0.0;
    config.blur_sigma = 0.0;
    config.noise_sigma = 0.1;

    Rng rng(2024);
    const Frame out = degrade(frame, config, rng);
    double mean = 0.0;
    for (double v : out.pixels) mean += v;
    mean /= static_cast<double>(out.pixels.size());
    double var = 0.0;
    for (double v : out.pixels) var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.pixels.size() - 1);
    CHECK(std::abs(mean - 0.5) < 0.005);
    CHECK(std::sqrt(var) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("degrade blur preserves the mean of a smooth frame") {
    Frame frame;
    frame.width = 33;
    frame.height = 33;
    frame.pixels.assign(33 * 33, 0.0);
    frame.at(16, 16) = 1.0;  // impulse

    NoiseConfig config;
    config.background_amplitude = 0.0;
    config.vignette_strength = 0.0;
    config.blur_sigma = 1.5;
    config.noise_sigma = 0.0;

    Rng rng(1);
    const Frame out = degrade(frame, config, rng);
    double total = 0.0;
    double peak = 0.0;
    for (double v : out.pixels) {
        total += v;
        peak = std::max(peak, v);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    // peak of a 2-D Gaussian kernel: 1 / (2 pi sigma^2)
    CHECK(peak == doctest::Approx(1.0 / (2.0 * std::numbers::pi * 1.5 * 1.5))
                      .epsilon(0.05));
    CHECK(out.at(16, 16) == peak);
    CHECK(out.at(14, 16) == doctest::Approx(out.at(18, 16)).epsilon(1e-9));
}

TEST_CASE("degrade is deterministic for a fixed rng seed") {
    Frame frame;
    frame.width = 21;
    frame.height = 19;
    frame.pixels.assign(21 * 19, 0.4);
    NoiseConfig config;  // defaults: everything on

    Rng a(55), b(55);
    const Frame fa = degrade(frame, config, a);
    const Frame fb = degrade(frame, config, b);
    for (std::size_t i = 0; i < fa.pixels.size(); ++i) {
        CHECK(fa.pixels[i] == fb.pixels[i]);
    }
}

TEST_CASE("normalize_percentile behavior") {
    SUBCASE("exact idempotence when percentile ranks are integral") {
        Frame frame;
        frame.width = 101;
        frame.height = 1;
        frame.pixels.resize(101);
        Rng rng(8);
        for (double& v : frame.pixels) v = rng.uniform(0.2, 0.9);
        const Frame once = normalize_percentile(frame);
        const Frame twice = normalize_percentile(once);
        for (std::size_t i = 0; i < once.pixels.size(); ++i) {
            CHECK(twice.pixels[i] == doctest::Approx(once.pixels[i]).epsilon(1e-12));
        }
    }

    SUBCASE("invariant to positive affine rescaling of the input") {
        Frame frame;
        frame.width = 32;
        frame.height = 24;
        frame.pixels.resize(32 * 24);
        Rng rng(9);
        for (double& v : frame.pixels) v = rng.uniform();
        Frame scaled = frame;
        for (double& v : scaled.pixels) v = 0.31 * v + 0.17;
        const Frame a = normalize_percentile(frame);
        const Frame b = normalize_percentile(scaled);
        for (std::size_t i = 0; i < a.pixels.size(); ++i) {
            CHECK(a.pixels[i] == doctest::Approx(b.pixels[i]).epsilon(1e-9));
        }
    }

    SUBCASE("output spans [0, 1] with clamping") {
        Frame frame;
        frame.width = 50;
        frame.height = 50;
        frame.pixels.resize(2500);
        Rng rng(10);
        for (double& v : frame.pixels) v = rng.normal(0.0, 3.0);
        const Frame out = normalize_percentile(frame);
        double lo = 1e300, hi = -1e300;
        for (double v : out.pixels) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo == 0.0);  // values below the 1st percentile clamp to 0
        CHECK(hi == 1.0);
    }

    SUBCASE("a flat frame maps to zeros and flags degeneracy") {
        Frame frame;
        frame.width = 8;
        frame.height = 8;
        frame.pixels.assign(64, 0.77);
        bool degenerate = false;
        const Frame out = normalize_percentile(frame, 1.0, 99.0, &degenerate);
        CHECK(degenerate);
        for (double v : out.pixels) CHECK(v == 0.0);
    }
}

TEST_CASE("PGM round trip and exact byte layout") {
    SUBCASE("quantization error stays within half a level") {
        Frame frame;
        frame.width = 19;
        frame.height = 7;
        frame.pixels.resize(19 * 7);
        Rng rng(12);
        for (double& v : frame.pixels) v = rng.uniform();
        const std::string path = temp_path("roundtrip.pgm");
        write_pgm(frame, path);
        const Frame back = read_pgm(path);
        REQUIRE(back.width == frame.width);
        REQUIRE(back.height == frame.height);
        for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
            CHECK(std::abs(back.pixels[i] - frame.pixels[i]) <= 0.5 / 255.0 + 1e-12);
        }
        std::remove(path.c_str());
    }

    SUBCASE("bytes are the round-half-up quantization") {
        Frame frame;
        frame.width = 2;
        frame.height = 2;
        frame.pixels = {0.0, 1.0, 0.5, 0.25};
        const std::string path = temp_path("bytes.pgm");
        write_pgm(frame, path);

        std::ifstream in(path, std::ios::binary);
        std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        const std::string header = "P5\n2 2\n255\n";
        REQUIRE(data.size() == header.size() + 4);
        CHECK(data.substr(0, header.size()) == header);
        const auto* bytes =
            reinterpret_cast<const unsigned char*>(data.data() + header.size());
        CHECK(bytes[0] == 0);
        CHECK(bytes[1] == 255);
        CHECK(bytes[2] == 128);
        CHECK(bytes[3] == 64);
        std::remove(path.c_str());
    }

    SUBCASE("malformed files raise errors naming the byte offset") {
        const std::string path = temp_path("bad.pgm");
        {
            std::ofstream out(path, std::ios::binary);
            out << "P5\n4 4\n255\n";
            out << "abc";  // 3 of 16 pixel bytes
        }
        CHECK_THROWS_WITH_AS(read_pgm(path),
                             (path + ": truncated pixel data at byte 14").c_str(),
                             std::runtime_error);
        {
            std::ofstream out(path, std::ios::binary);
            out << "P6\n2 2\n255\n0000";
        }
        CHECK_THROWS_WITH_AS(read_pgm(path),
                             (path + ": expected P5 magic at byte 0").c_str(),
                             std::runtime_error);
        {
            std::ofstream out(path, std::ios::binary);
            out << "P5\nxy\n";
        }
        CHECK_THROWS_WITH_AS(read_pgm(path),
                             (path + ": expected width at byte 3").c_str(),
                             std::runtime_error);
        std::remove(path.c_str());
        CHECK_THROWS_AS(read_pgm(temp_path("missing.pgm")),
                        std::runtime_error);
    }
}

TEST_CASE("render_clip produces one frame per scene frame") {
    wormsim::SimConfig sim;
    sim.density = 0.25;
    sim.n_frames = 11;
    sim.height = 96;
    sim.width = 96;
    const wormsim::Scene scene = wormsim::populate_scene(sim, 4242);
    REQUIRE(scene.n_frames() == 11);

    RenderConfig render;
    NoiseConfig noise;
    const std::vector<Frame> frames = render_clip(scene, render, noise, 17);
    REQUIRE(frames.size() == 11);
    for (const Frame& f : frames) {
        CHECK(f.width == 96);
        CHECK(f.height == 96);
        CHECK(f.pixels.size() == 96u * 96u);
    }

    SUBCASE("deterministic in the seed") {
        const std::vector<Frame> again = render_clip(scene, render, noise, 17);
        for (std::size_t f = 0; f < frames.size(); ++f) {
            for (std::size_t i = 0; i < frames[f].pixels.size(); ++i) {
                CHECK(frames[f].pixels[i] == again[f].pixels[i]);
            }
        }
    }

    SUBCASE("moving worms change the image between frames") {
        double diff = 0.0;
        for (std::size_t i = 0; i < frames[0].pixels.size(); ++i) {
            diff += std::abs(frames[0].pixels[i] - frames[10].pixels[i]);
        }
        CHECK(diff > 1.0);
    }

    SUBCASE("a static scene with zero noise renders identically every frame") {
        wormsim::Scene still = scene;
        for (auto& worm : still.worms) {
            for (auto& state : worm.states) state = worm.states.front();
        }
        NoiseConfig off;
        off.background_amplitude = 0.0;
        off.vignette_strength = 0.0;
        off.blur_sigma = 0.0;
        off.noise_sigma = 0.0;
        const std::vector<Frame> stills = render_clip(still, render, off, 5);
        for (std::size_t f = 1; f < stills.size(); ++f) {
            for (std::size_t i = 0; i < stills[f].pixels.size(); ++i) {
                CHECK(stills[f].pixels[i] == stills[0].pixels[i]);
            }
        }
    }
}
