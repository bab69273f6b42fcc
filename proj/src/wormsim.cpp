#include "tanglekit/wormsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tanglekit/parallel.hpp"

namespace tanglekit::wormsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_range(const Range& r, const char* name) {
    if (!(r.min <= r.max) || !std::isfinite(r.min) || !std::isfinite(r.max)) {
        throw std::invalid_argument(std::string("invalid range for ") + name);
    }
}

// Closest-approach distance between segments [p1,q1] and [p2,q2].
double segment_segment_dist_sq(const Vec2& p1, const Vec2& q1, const Vec2& p2,
                               const Vec2& q2) {
    const Vec2 d1 = q1 - p1;
    const Vec2 d2 = q2 - p2;
    const Vec2 r = p1 - p2;
    const double a = d1.norm_sq();
    const double e = d2.norm_sq();
    const double f = dot(d2, r);

    double s = 0.0;
    double t = 0.0;
    if (a <= 0.0 && e <= 0.0) {
        // both segments degenerate to points
    } else if (a <= 0.0) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e <= 0.0) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double denom = a * e - b * b;
            if (denom > 0.0) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return dist_sq(p1 + d1 * s, p2 + d2 * t);
}

struct Bbox {
    double min_x, min_y, max_x, max_y;
};

Bbox bbox_of(const Spline& s) {
    Bbox b{s.points[0].x, s.points[0].y, s.points[0].x, s.points[0].y};
    for (const Vec2& p : s.points) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

bool bboxes_within(const Bbox& a, const Bbox& b, double margin) {
    return a.min_x <= b.max_x + margin && b.min_x <= a.max_x + margin &&
           a.min_y <= b.max_y + margin && b.min_y <= a.max_y + margin;
}

// True as soon as any segment pair of the two polylines comes within `limit`.
bool polylines_within(const Spline& a, const Spline& b, double limit) {
    const double limit_sq = limit * limit;
    for (std::size_t i = 0; i + 1 < a.k(); ++i) {
        for (std::size_t j = 0; j + 1 < b.k(); ++j) {
            if (segment_segment_dist_sq(a.points[i], a.points[i + 1],
                                        b.points[j], b.points[j + 1]) <=
                limit_sq) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

void SimConfig::validate() const {
    check_range(L, "L");
    check_range(A, "A");
    check_range(T, "T");
    check_range(k_u, "k_u");
    check_range(k_s, "k_s");
    check_range(alpha, "alpha");
    if (L.min <= 0.0) throw std::invalid_argument("L range must be positive");
    if (T.min <= 0.0) throw std::invalid_argument("T range must be positive");
    if (alpha.min <= 1.0) {
        throw std::invalid_argument("alpha range must stay above 1");
    }
    if (height <= 0 || width <= 0) {
        throw std::invalid_argument("frame size must be positive");
    }
    if (n_frames < 1) throw std::invalid_argument("n_frames must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (density < 0.0) throw std::invalid_argument("density must be >= 0");
    if (!(mm_per_px > 0.0)) {
        throw std::invalid_argument("mm_per_px must be positive");
    }
    if (k < 2) throw std::invalid_argument("k must be >= 2");
}

WormParams sample_params(Rng& rng, const SimConfig& config) {
    config.validate();
    WormParams p;
    p.L = rng.uniform(config.L.min, config.L.max);
    p.A = rng.uniform(config.A.min, config.A.max);
    p.T = rng.uniform(config.T.min, config.T.max);
    p.k_u = rng.uniform(config.k_u.min, config.k_u.max);
    p.k_s = rng.uniform(config.k_s.min, config.k_s.max);
    p.rho1 = rng.uniform(0.0, kTwoPi);
    p.rho2 = rng.uniform(0.0, kTwoPi);
    p.rho3 = rng.uniform(0.0, kTwoPi);
    p.gamma0 = rng.uniform(0.0, kTwoPi);
    p.x_com0.x = rng.uniform(0.0, static_cast<double>(config.width));
    p.x_com0.y = rng.uniform(0.0, static_cast<double>(config.height));
    p.alpha_t = config.alpha_t;
    p.alpha = rng.uniform(config.alpha.min, config.alpha.max);
    return p;
}

double undulation_angle(const WormParams& params, double s, double t) {
    const double phase_t = kTwoPi * t / params.T;
    const double psi_u =
        params.A * std::cos(phase_t + params.rho1) *
        std::cos(params.k_u * s + params.rho2);
    const double amp_s = 0.5 * (1.0 + std::abs(std::sin(kTwoPi * t))) * params.A;
    const double psi_s = amp_s * std::cos(phase_t + params.k_s * s + params.rho3);
    return psi_u + psi_s;
}

Spline body_coordinates(const WormParams& params, double t, double gamma,
                        std::size_t k) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    // Fine-grid cumulative trapezoid of the unit tangent, scaled by L.
    const std::size_t n = std::max<std::size_t>(8 * k, 256);
    const double ds = 1.0 / static_cast<double>(n - 1);
    std::vector<Vec2> fine(n);
    fine[0] = Vec2{0.0, 0.0};
    double psi_prev = undulation_angle(params, 0.0, t) + gamma;
    Vec2 dir_prev{std::cos(psi_prev), std::sin(psi_prev)};
    for (std::size_t i = 1; i < n; ++i) {
        const double s = static_cast<double>(i) * ds;
        const double psi = undulation_angle(params, s, t) + gamma;
        const Vec2 dir{std::cos(psi), std::sin(psi)};
        fine[i] = fine[i - 1] + (dir_prev + dir) * (0.5 * ds * params.L);
        dir_prev = dir;
    }
    return resample_equidistant(fine, k);
}

Vec2 arc_centroid(const Spline& spline) {
    const std::size_t k = spline.k();
    if (k == 1) return spline.points[0];
    Vec2 acc = (spline.points[0] + spline.points[k - 1]) * 0.5;
    for (std::size_t i = 1; i + 1 < k; ++i) acc += spline.points[i];
    return acc / static_cast<double>(k - 1);
}

RftSolution rft_velocities(const Spline& spline,
                           const std::vector<Vec2>& body_velocity,
                           double alpha_t, double alpha) {
    const std::size_t k = spline.k();
    if (k < 2) throw std::invalid_argument("spline needs >= 2 points");
    if (body_velocity.size() != k) {
        throw std::invalid_argument("velocity array length must match spline");
    }

    const double alpha_n = alpha * alpha_t;
    const Vec2 x_com = arc_centroid(spline);
    const double ds = spline.polyline_length() / static_cast<double>(k - 1);

    // Per-point drag tensor D = alpha_t t t^T + alpha_n n n^T and trapezoid
    // weights; unknowns z = (V_x, V_y, Omega) satisfy M z = rhs.
    double M[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    struct PointDrag {
        double dxx, dxy, dyy;  // symmetric 2x2 tensor
        Vec2 r;                // offset from the centroid
        double w;              // quadrature weight
    };
    std::vector<PointDrag> drag(k);

    for (std::size_t i = 0; i < k; ++i) {
        Vec2 tan;
        if (i == 0) {
            tan = spline.points[1] - spline.points[0];
        } else if (i + 1 == k) {
            tan = spline.points[k - 1] - spline.points[k - 2];
        } else {
            tan = spline.points[i + 1] - spline.points[i - 1];
        }
        const double len = tan.norm();
        if (!(len > 1e-12)) throw std::runtime_error("singular mobility");
        tan = tan / len;
        const Vec2 nrm = tan.perp();

        PointDrag& d = drag[i];
        d.dxx = alpha_t * tan.x * tan.x + alpha_n * nrm.x * nrm.x;
        d.dxy = alpha_t * tan.x * tan.y + alpha_n * nrm.x * nrm.y;
        d.dyy = alpha_t * tan.y * tan.y + alpha_n * nrm.y * nrm.y;
        d.r = spline.points[i] - x_com;
        d.w = (i == 0 || i + 1 == k) ? 0.5 * ds : ds;

        // p = Omega-direction of the point velocity: Omega x r = Omega * perp(r)
        const Vec2 p = d.r.perp();
        const Vec2 Dp{d.dxx * p.x + d.dxy * p.y, d.dxy * p.x + d.dyy * p.y};
        const Vec2 v = body_velocity[i];
        const Vec2 Dv{d.dxx * v.x + d.dxy * v.y, d.dxy * v.x + d.dyy * v.y};

        // Force balance rows.
        M[0][0] += d.w * d.dxx;
        M[0][1] += d.w * d.dxy;
        M[0][2] += d.w * Dp.x;
        M[1][0] += d.w * d.dxy;
        M[1][1] += d.w * d.dyy;
        M[1][2] += d.w * Dp.y;
        rhs[0] -= d.w * Dv.x;
        rhs[1] -= d.w * Dv.y;

        // Torque row: r x (D z-velocity) contributions.
        M[2][0] += d.w * (d.r.x * d.dxy - d.r.y * d.dxx);
        M[2][1] += d.w * (d.r.x * d.dyy - d.r.y * d.dxy);
        M[2][2] += d.w * (d.r.x * Dp.y - d.r.y * Dp.x);
        rhs[2] -= d.w * (d.r.x * Dv.y - d.r.y * Dv.x);
    }

    // 3x3 Gaussian elimination with partial pivoting.
    double a[3][4] = {{M[0][0], M[0][1], M[0][2], rhs[0]},
                      {M[1][0], M[1][1], M[1][2], rhs[1]},
                      {M[2][0], M[2][1], M[2][2], rhs[2]}};
    double scale = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(a[r][c]));
    }
    if (!(scale > 0.0)) throw std::runtime_error("singular mobility");
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-12 * scale) {
            throw std::runtime_error("singular mobility");
        }
        if (pivot != col) std::swap(a[pivot], a[col]);
        for (int r = col + 1; r < 3; ++r) {
            const double factor = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= factor * a[col][c];
        }
    }
    double z[3];
    for (int r = 2; r >= 0; --r) {
        double acc = a[r][3];
        for (int c = r + 1; c < 3; ++c) acc -= a[r][c] * z[c];
        z[r] = acc / a[r][r];
    }

    RftSolution sol;
    sol.V = Vec2{z[0], z[1]};
    sol.Omega = z[2];

    // Re-evaluate the balances at the solution.
    Vec2 force{0.0, 0.0};
    double torque = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const PointDrag& d = drag[i];
        const Vec2 u = body_velocity[i] + sol.V + d.r.perp() * sol.Omega;
        const Vec2 f{d.dxx * u.x + d.dxy * u.y, d.dxy * u.x + d.dyy * u.y};
        force += f * d.w;
        torque += d.w * (d.r.x * f.y - d.r.y * f.x);
    }
    sol.residual_force = force;
    sol.residual_torque = torque;
    return sol;
}

std::vector<WormState> simulate(const WormParams& params, int n_frames,
                                double dt, std::size_t k) {
    if (n_frames < 1) throw std::invalid_argument("n_frames must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

    std::vector<WormState> states;
    states.reserve(static_cast<std::size_t>(n_frames));

    Vec2 x_com = params.x_com0;
    double gamma = params.gamma0;

    auto centered_shape = [&](double t, double g) {
        Spline s = body_coordinates(params, t, g, k);
        const Vec2 c = arc_centroid(s);
        for (Vec2& p : s.points) p -= c;
        return s;
    };

    for (int frame = 0; frame < n_frames; ++frame) {
        const double t = static_cast<double>(frame) * dt;

        // Shape velocity: central difference of centred shapes at fixed pose.
        const Spline now = centered_shape(t, gamma);
        const Spline before = centered_shape(t - dt, gamma);
        const Spline after = centered_shape(t + dt, gamma);
        std::vector<Vec2> velocity(k);
        for (std::size_t i = 0; i < k; ++i) {
            velocity[i] = (after.points[i] - before.points[i]) / (2.0 * dt);
        }

        WormState state;
        state.t = t;
        state.x_com = x_com;
        state.gamma = gamma;
        state.spline.points.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            state.spline.points[i] = x_com + now.points[i];
        }

        const RftSolution sol =
            rft_velocities(state.spline, velocity, params.alpha_t, params.alpha);
        states.push_back(std::move(state));

        x_com += sol.V * dt;
        gamma += sol.Omega * dt;
    }
    return states;
}

Scene populate_scene(const SimConfig& config, std::uint64_t seed) {
    config.validate();
    Scene scene;
    scene.height = config.height;
    scene.width = config.width;
    scene.dt = config.dt;
    scene.density = config.density;
    scene.mm_per_px = config.mm_per_px;

    const long long n_worms = std::llround(config.density * scene.area_mm2());
    scene.worms.resize(static_cast<std::size_t>(std::max(0LL, n_worms)));

    parallel_for(scene.worms.size(), [&](std::size_t w) {
        Rng rng(derive_seed(seed, w));
        const WormParams params = sample_params(rng, config);
        WormTrack& track = scene.worms[w];
        track.identity = static_cast<int>(w);
        track.states = simulate(params, config.n_frames, config.dt, config.k);
    });
    return scene;
}

double polyline_distance(const Spline& a, const Spline& b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < a.k(); ++i) {
        for (std::size_t j = 0; j + 1 < b.k(); ++j) {
            best = std::min(best,
                            segment_segment_dist_sq(a.points[i], a.points[i + 1],
                                                    b.points[j], b.points[j + 1]));
        }
    }
    return std::sqrt(best);
}

double count_overlaps(const Scene& scene, std::size_t frame_index, double r) {
    const std::size_t n = scene.worms.size();
    if (n == 0) return 0.0;
    if (frame_index >= scene.n_frames()) {
        throw std::out_of_range("frame index out of range");
    }

    std::vector<const Spline*> splines(n);
    std::vector<Bbox> boxes(n);
    for (std::size_t i = 0; i < n; ++i) {
        splines[i] = &scene.worms[i].states[frame_index].spline;
        boxes[i] = bbox_of(*splines[i]);
    }

    const double limit = 2.0 * r;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!bboxes_within(boxes[i], boxes[j], limit)) continue;
            if (polylines_within(*splines[i], *splines[j], limit)) ++pairs;
        }
    }
    return static_cast<double>(pairs * 2) / static_cast<double>(n);
}

}  // namespace tanglekit::wormsim
