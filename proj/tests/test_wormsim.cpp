#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "tanglekit/rng.hpp"
#include "tanglekit/splines.hpp"
#include "tanglekit/wormsim.hpp"

namespace {

using namespace tanglekit;
using namespace tanglekit::wormsim;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Test-side re-evaluation of the drag balance at a proposed (V, Omega),
// written against the documented discretization: normalized one-sided /
// central-difference tangents, uniform trapezoid weights, drag tensor
// alpha_t t t^T + alpha_n n n^T, velocities taken about the arc centroid.
struct Balance {
    Vec2 force{0, 0};
    double torque = 0;
};

Balance evaluate_balance(const Spline& spline,
                         const std::vector<Vec2>& body_velocity,
                         double alpha_t, double alpha, const Vec2& V,
                         double Omega) {
    const std::size_t k = spline.k();
    const double alpha_n = alpha * alpha_t;
    const Vec2 com = arc_centroid(spline);
    const double ds = spline.polyline_length() / static_cast<double>(k - 1);

    Balance out;
    for (std::size_t i = 0; i < k; ++i) {
        Vec2 tan;
        if (i == 0) {
            tan = spline.points[1] - spline.points[0];
        } else if (i + 1 == k) {
            tan = spline.points[k - 1] - spline.points[k - 2];
        } else {
            tan = spline.points[i + 1] - spline.points[i - 1];
        }
        tan = tan.normalized();
        const Vec2 nrm = tan.perp();
        const Vec2 r = spline.points[i] - com;
        const Vec2 u = body_velocity[i] + V + Omega * r.perp();
        const Vec2 f = alpha_t * tan.dot(u) * tan + alpha_n * nrm.dot(u) * nrm;
        const double w = (i == 0 || i + 1 == k) ? 0.5 * ds : ds;
        out.force += w * f;
        out.torque += w * r.cross(f);
    }
    return out;
}

WormParams random_params(Rng& rng) {
    const SimConfig config;
    return sample_params(rng, config);
}

Vec2 rotate(const Vec2& v, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

SimConfig pinned_config(double value_shift = 0.0) {
    SimConfig c;
    c.L = {40.0 + value_shift, 40.0 + value_shift};
    c.A = {0.9, 0.9};
    c.T = {1.2, 1.2};
    c.k_u = {3.0, 3.0};
    c.k_s = {6.0, 6.0};
    c.alpha = {2.0, 2.0};
    return c;
}

}  // namespace

TEST_CASE("sample_params pins degenerate ranges exactly") {
    Rng rng(42);
    const SimConfig config = pinned_config();
    const WormParams p = sample_params(rng, config);
    CHECK(p.L == 40.0);
    CHECK(p.A == 0.9);
    CHECK(p.T == 1.2);
    CHECK(p.k_u == 3.0);
    CHECK(p.k_s == 6.0);
    CHECK(p.alpha == 2.0);
    CHECK(p.alpha_t == 1.0);
}

TEST_CASE("sample_params is deterministic per seed") {
    const SimConfig config;
    Rng a(987), b(987), c(988);
    const WormParams pa = sample_params(a, config);
    const WormParams pb = sample_params(b, config);
    const WormParams pc = sample_params(c, config);
    CHECK(pa.L == pb.L);
    CHECK(pa.rho3 == pb.rho3);
    CHECK(pa.x_com0.x == pb.x_com0.x);
    CHECK(pa.alpha == pb.alpha);
    CHECK(pa.L != pc.L);
}

TEST_CASE("sample_params draws uniformly from the configured ranges") {
    const SimConfig config;
    Rng rng(7);
    const int n = 10000;
    double sum_L = 0.0, sum_alpha = 0.0;
    double min_L = 1e300, max_L = 0.0;
    for (int i = 0; i < n; ++i) {
        const WormParams p = sample_params(rng, config);
        REQUIRE(p.L >= config.L.min);
        REQUIRE(p.L <= config.L.max);
        REQUIRE(p.alpha > 1.0);
        REQUIRE(p.rho1 >= 0.0);
        REQUIRE(p.rho1 < kTwoPi);
        sum_L += p.L;
        sum_alpha += p.alpha;
        min_L = std::min(min_L, p.L);
        max_L = std::max(max_L, p.L);
    }
    // mean of U(35, 55) within 3 standard errors of 45
    const double se_L = (config.L.max - config.L.min) / std::sqrt(12.0 * n);
    CHECK(std::abs(sum_L / n - 45.0) < 3.0 * se_L);
    const double se_a =
        (config.alpha.max - config.alpha.min) / std::sqrt(12.0 * n);
    CHECK(std::abs(sum_alpha / n - 5.75) < 3.0 * se_a);
    CHECK(min_L < 35.2);
    CHECK(max_L > 54.8);
}

TEST_CASE("undulation_angle closed-form checks") {
    WormParams p;
    p.A = 0.8;
    p.T = 1.3;
    p.k_u = 3.0;
    p.k_s = 6.0;

    SUBCASE("zero amplitude means zero angle") {
        WormParams flat = p;
        flat.A = 0.0;
        for (double s : {0.0, 0.3, 0.9}) {
            for (double t : {0.0, 0.17, 1.9}) {
                CHECK(undulation_angle(flat, s, t) == 0.0);
            }
        }
    }

    SUBCASE("at t = 0 with rho1 = pi/2 only the travelling wave remains") {
        WormParams q = p;
        q.rho1 = std::numbers::pi / 2;
        q.rho3 = std::numbers::pi / 2;
        for (double s : {0.0, 0.25, 0.5, 1.0}) {
            const double expected =
                0.5 * q.A * std::cos(q.k_s * s + std::numbers::pi / 2);
            CHECK(undulation_angle(q, s, 0.0) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }

    SUBCASE("matches the two-term formula on a grid") {
        WormParams q = p;
        q.rho1 = 0.4;
        q.rho2 = 1.7;
        q.rho3 = 2.9;
        for (int i = 0; i <= 20; ++i) {
            for (int j = 0; j <= 20; ++j) {
                const double s = i / 20.0;
                const double t = 2.0 * j / 20.0;
                const double phase = kTwoPi * t / q.T;
                const double psi_u = q.A * std::cos(phase + q.rho1) *
                                     std::cos(q.k_u * s + q.rho2);
                const double amp =
                    0.5 * (1.0 + std::abs(std::sin(kTwoPi * t))) * q.A;
                const double psi_s = amp * std::cos(phase + q.k_s * s + q.rho3);
                CHECK(undulation_angle(q, s, t) ==
                      doctest::Approx(psi_u + psi_s).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("body_coordinates straightens out at zero amplitude") {
    WormParams p;
    p.L = 50.0;
    p.A = 0.0;

    SUBCASE("gamma = 0 gives a horizontal segment of length L") {
        const Spline s = body_coordinates(p, 0.37, 0.0, 11);
        CHECK(s.points.front().x == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(s.points.front().y == doctest::Approx(0.0).epsilon(1e-9));
        for (std::size_t i = 0; i < s.k(); ++i) {
            CHECK(s.points[i].x == doctest::Approx(5.0 * i).epsilon(1e-9));
            CHECK(std::abs(s.points[i].y) < 1e-9);
        }
    }

    SUBCASE("gamma = pi/2 gives a vertical segment") {
        const Spline s = body_coordinates(p, 0.0, std::numbers::pi / 2, 11);
        for (std::size_t i = 0; i < s.k(); ++i) {
            CHECK(std::abs(s.points[i].x) < 1e-9);
            CHECK(s.points[i].y == doctest::Approx(5.0 * i).epsilon(1e-9));
        }
    }
}

TEST_CASE("body_coordinates matches a high-resolution quadrature oracle") {
    Rng rng(31337);
    for (int trial = 0; trial < 8; ++trial) {
        const WormParams p = random_params(rng);
        const double t = rng.uniform(0.0, 2.0);
        const double gamma = rng.uniform(0.0, kTwoPi);
        const std::size_t k = 49;
        const Spline s = body_coordinates(p, t, gamma, k);

        // cumulative trapezoid on a much finer grid; |x'(s)| = L so the
        // resampled point i sits at arc fraction i / (k - 1)
        const int n = 20000;
        std::vector<Vec2> fine(n + 1);
        fine[0] = {0, 0};
        auto deriv = [&](double frac) {
            const double psi = undulation_angle(p, frac, t) + gamma;
            return Vec2{std::cos(psi), std::sin(psi)};
        };
        for (int i = 1; i <= n; ++i) {
            const double h = 1.0 / n;
            fine[i] = fine[i - 1] +
                      (p.L * h * 0.5) * (deriv((i - 1.0) / n) + deriv(i * 1.0 / n));
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double frac = static_cast<double>(i) / (k - 1.0);
            const int j = static_cast<int>(std::lround(frac * n));
            worst = std::max(worst, dist(s.points[i], fine[j]));
        }
        CHECK(worst < 1e-3 * p.L);

        CHECK(s.polyline_length() ==
              doctest::Approx(p.L).epsilon(1e-3));
    }
}

TEST_CASE("rft_velocities: zero body velocity is already balanced") {
    Rng rng(5);
    const WormParams p = random_params(rng);
    const Spline s = body_coordinates(p, 0.6, 0.8, 31);
    const std::vector<Vec2> zero(31, Vec2{0, 0});
    const RftSolution sol = rft_velocities(s, zero, p.alpha_t, p.alpha);
    CHECK(std::abs(sol.V.x) < 1e-12);
    CHECK(std::abs(sol.V.y) < 1e-12);
    CHECK(std::abs(sol.Omega) < 1e-12);
}

TEST_CASE("rft_velocities: straight body with uniform velocity backs out") {
    Spline s;
    for (int i = 0; i <= 10; ++i) s.points.push_back({1.0 * i, 0.0});

    SUBCASE("tangential push") {
        const std::vector<Vec2> v(11, Vec2{1.0, 0.0});
        const RftSolution sol = rft_velocities(s, v, 1.0, 2.0);
        CHECK(sol.V.x == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(std::abs(sol.V.y) < 1e-9);
        CHECK(std::abs(sol.Omega) < 1e-9);
    }

    SUBCASE("normal push") {
        const std::vector<Vec2> v(11, Vec2{0.0, -0.5});
        const RftSolution sol = rft_velocities(s, v, 1.0, 5.0);
        CHECK(sol.V.y == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(std::abs(sol.V.x) < 1e-9);
        CHECK(std::abs(sol.Omega) < 1e-9);
    }
}

TEST_CASE("rft_velocities leaves no residual force or torque") {
    Rng rng(808);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const WormParams p = random_params(rng);
        const std::size_t k = 49;
        const Spline s =
            body_coordinates(p, rng.uniform(0.0, 2.0), rng.uniform(0.0, kTwoPi), k);
        std::vector<Vec2> v(k);
        for (Vec2& u : v) u = {rng.normal(0.0, 20.0), rng.normal(0.0, 20.0)};

        const RftSolution sol = rft_velocities(s, v, p.alpha_t, p.alpha);
        const Balance bal =
            evaluate_balance(s, v, p.alpha_t, p.alpha, sol.V, sol.Omega);
        worst = std::max({worst, std::abs(bal.force.x), std::abs(bal.force.y),
                          std::abs(bal.torque)});
        CHECK(std::abs(sol.residual_force.x) < 1e-8);
        CHECK(std::abs(sol.residual_force.y) < 1e-8);
        CHECK(std::abs(sol.residual_torque) < 1e-8);
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("rft_velocities is equivariant under rigid motions") {
    Rng rng(909);
    for (int trial = 0; trial < 10; ++trial) {
        const WormParams p = random_params(rng);
        const std::size_t k = 25;
        Spline s =
            body_coordinates(p, rng.uniform(0.0, 2.0), rng.uniform(0.0, kTwoPi), k);
        std::vector<Vec2> v(k);
        for (Vec2& u : v) u = {rng.normal(0.0, 5.0), rng.normal(0.0, 5.0)};
        const RftSolution base = rft_velocities(s, v, p.alpha_t, p.alpha);

        SUBCASE("translation changes nothing") {
            const Vec2 shift{rng.uniform(-500, 500), rng.uniform(-500, 500)};
            Spline moved = s;
            for (Vec2& q : moved.points) q += shift;
            const RftSolution sol = rft_velocities(moved, v, p.alpha_t, p.alpha);
            CHECK(std::abs(sol.V.x - base.V.x) < 1e-9);
            CHECK(std::abs(sol.V.y - base.V.y) < 1e-9);
            CHECK(std::abs(sol.Omega - base.Omega) < 1e-9);
        }

        SUBCASE("rotation rotates V and keeps Omega") {
            const double theta = rng.uniform(0.0, kTwoPi);
            Spline turned = s;
            std::vector<Vec2> v_turned(k);
            for (std::size_t i = 0; i < k; ++i) {
                turned.points[i] = rotate(s.points[i], theta);
                v_turned[i] = rotate(v[i], theta);
            }
            const RftSolution sol =
                rft_velocities(turned, v_turned, p.alpha_t, p.alpha);
            const Vec2 expected = rotate(base.V, theta);
            CHECK(std::abs(sol.V.x - expected.x) < 1e-9);
            CHECK(std::abs(sol.V.y - expected.y) < 1e-9);
            CHECK(std::abs(sol.Omega - base.Omega) < 1e-9);
        }
    }
}

TEST_CASE("rft_velocities rejects degenerate geometry") {
    Spline collapsed;
    for (int i = 0; i < 5; ++i) collapsed.points.push_back({1.0, 2.0});
    const std::vector<Vec2> v(5, Vec2{0, 0});
    CHECK_THROWS_WITH_AS(rft_velocities(collapsed, v, 1.0, 2.0),
                         "singular mobility", std::runtime_error);
    CHECK_THROWS_AS(rft_velocities(collapsed, std::vector<Vec2>(3), 1.0, 2.0),
                    std::invalid_argument);
}

TEST_CASE("simulate keeps a non-undulating worm perfectly still") {
    WormParams p;
    p.L = 45.0;
    p.A = 0.0;
    p.gamma0 = 0.7;
    p.x_com0 = {100.0, 60.0};
    const std::vector<WormState> states = simulate(p, 20, 0.1, 17);
    REQUIRE(states.size() == 20);
    for (const WormState& st : states) {
        CHECK(st.x_com.x == states[0].x_com.x);
        CHECK(st.x_com.y == states[0].x_com.y);
        CHECK(st.gamma == states[0].gamma);
    }
    CHECK(states[5].t == doctest::Approx(0.5));
    // emitted splines are centred on the centre of mass
    const Vec2 c = arc_centroid(states[3].spline);
    CHECK(c.x == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(c.y == doctest::Approx(60.0).epsilon(1e-9));
}

TEST_CASE("simulate converges as the step shrinks") {
    WormParams p;
    p.L = 45.0;
    p.A = 1.0;
    p.T = 1.3;
    p.k_u = 3.0;
    p.k_s = 6.0;
    p.rho1 = 0.4;
    p.rho2 = 1.1;
    p.rho3 = 2.0;
    p.gamma0 = 0.3;
    p.alpha = 2.0;

    auto final_com = [&](int steps_per_period) {
        const double dt = p.T / steps_per_period;
        const std::vector<WormState> states =
            simulate(p, steps_per_period + 1, dt, 33);
        return states.back().x_com;
    };
    const Vec2 reference = final_com(2048);
    const double e1 = dist(final_com(128), reference);
    const double e2 = dist(final_com(256), reference);
    const double e3 = dist(final_com(512), reference);
    CHECK(e2 < e1);
    CHECK(e3 < e2);
    CHECK(e1 / e3 > 2.0);
}

TEST_CASE("net crawling needs anisotropic drag") {
    WormParams p;
    p.L = 45.0;
    p.A = 1.0;
    p.T = 1.0;
    p.k_u = 3.0;
    p.k_s = 6.0;
    p.rho1 = 0.4;
    p.rho2 = 1.1;
    p.rho3 = 2.0;

    auto displacement_per_period = [&](double alpha) {
        WormParams q = p;
        q.alpha = alpha;
        const int steps = 400;
        const std::vector<WormState> states =
            simulate(q, steps + 1, q.T / steps, 33);
        return dist(states.back().x_com, states.front().x_com);
    };
    CHECK(displacement_per_period(1.0) < 0.01 * p.L);
    CHECK(displacement_per_period(2.0) > 0.05 * p.L);
}

TEST_CASE("populate_scene basics") {
    SUBCASE("zero density produces an empty scene") {
        SimConfig config;
        config.density = 0.0;
        config.n_frames = 4;
        const Scene scene = populate_scene(config, 99);
        CHECK(scene.worms.empty());
        CHECK(scene.n_frames() == 0);
    }

    SUBCASE("default density fills 256x256 at 40 px/mm with 41 worms") {
        SimConfig config;
        config.n_frames = 3;
        const Scene scene = populate_scene(config, 7);
        CHECK(scene.worms.size() == 41);
        CHECK(scene.area_mm2() == doctest::Approx(40.96));
        CHECK(scene.n_frames() == 3);
        for (std::size_t w = 0; w < scene.worms.size(); ++w) {
            CHECK(scene.worms[w].identity == static_cast<int>(w));
            CHECK(scene.worms[w].states.size() == 3);
        }
    }

    SUBCASE("same seed is bit-identical, different seed differs") {
        SimConfig config;
        config.n_frames = 2;
        config.density = 0.25;
        const Scene a = populate_scene(config, 21);
        const Scene b = populate_scene(config, 21);
        const Scene c = populate_scene(config, 22);
        REQUIRE(a.worms.size() == b.worms.size());
        bool any_diff = false;
        for (std::size_t w = 0; w < a.worms.size(); ++w) {
            for (std::size_t f = 0; f < 2; ++f) {
                const Spline& sa = a.worms[w].states[f].spline;
                const Spline& sb = b.worms[w].states[f].spline;
                for (std::size_t i = 0; i < sa.k(); ++i) {
                    CHECK(sa.points[i].x == sb.points[i].x);
                    CHECK(sa.points[i].y == sb.points[i].y);
                }
            }
            if (a.worms[w].states[0].x_com.x != c.worms[w].states[0].x_com.x)
                any_diff = true;
        }
        CHECK(any_diff);
    }
}

TEST_CASE("count_overlaps measures pairwise proximity") {
    auto make_scene = [](std::vector<std::vector<Vec2>> worms) {
        Scene scene;
        scene.worms.clear();
        int id = 0;
        for (auto& points : worms) {
            WormTrack track;
            track.identity = id++;
            WormState state;
            state.spline.points = std::move(points);
            state.x_com = arc_centroid(state.spline);
            track.states.push_back(std::move(state));
            scene.worms.push_back(std::move(track));
        }
        return scene;
    };

    SUBCASE("well separated parallel worms never overlap") {
        const Scene scene = make_scene({
            {{0, 0}, {10, 0}, {20, 0}},
            {{0, 10}, {10, 10}, {20, 10}},
        });
        CHECK(count_overlaps(scene, 0, 1.0) == 0.0);
    }

    SUBCASE("crossing worms overlap once each") {
        const Scene scene = make_scene({
            {{-10, -10}, {0, 0}, {10, 10}},
            {{-10, 10}, {0, 0}, {10, -10}},
        });
        CHECK(count_overlaps(scene, 0, 1.0) == 1.0);
    }

    SUBCASE("radius controls the reach") {
        const Scene scene = make_scene({
            {{0, 0}, {10, 0}, {20, 0}},
            {{0, 3}, {10, 3}, {20, 3}},
        });
        // separation 3: overlap requires 2r >= 3
        CHECK(count_overlaps(scene, 0, 1.0) == 0.0);
        CHECK(count_overlaps(scene, 0, 1.6) == 1.0);
    }

    SUBCASE("three worms stacked within range each touch both others") {
        const Scene scene = make_scene({
            {{0, 0}, {10, 0}, {20, 0}},
            {{0, 1}, {10, 1}, {20, 1}},
            {{0, 2}, {10, 2}, {20, 2}},
        });
        // r = 1.1: pairs (0,1), (1,2), (0,2) all within 2.2
        CHECK(count_overlaps(scene, 0, 1.1) == 2.0);
        // r = 0.6: only adjacent pairs within 1.2
        CHECK(count_overlaps(scene, 0, 0.6) ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    }
}
