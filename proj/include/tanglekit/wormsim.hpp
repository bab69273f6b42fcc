#pragma once

#include <cstdint>
#include <vector>

#include "tanglekit/rng.hpp"
#include "tanglekit/splines.hpp"
#include "tanglekit/vec2.hpp"

namespace tanglekit::wormsim {

// Gait and body parameters of a single crawler.
//
// The body is an inextensible curve of length `L` whose local bending angle is
// a sum of a whole-body bend and a travelling sinusoid (see undulation_angle).
// Drag is anisotropic: tangential coefficient `alpha_t`, normal coefficient
// `alpha * alpha_t` with `alpha > 1`.
struct WormParams {
    double L = 45.0;      // body length, px
    double A = 0.7;       // bend amplitude, rad
    double T = 1.4;       // undulation period, s
    double k_u = 3.0;     // whole-body bend wavenumber, rad
    double k_s = 6.0;     // travelling-wave wavenumber, rad
    double rho1 = 0.0;    // temporal phase of the whole-body bend, rad
    double rho2 = 0.0;    // spatial phase of the whole-body bend, rad
    double rho3 = 0.0;    // phase of the travelling wave, rad
    double gamma0 = 0.0;  // initial orientation, rad
    Vec2 x_com0{0.0, 0.0};  // initial centre of mass, px
    double alpha_t = 1.0;   // tangential drag coefficient
    double alpha = 2.0;     // normal/tangential drag ratio, > 1
};

// Pose of one worm at one instant, in lab coordinates.
struct WormState {
    double t = 0.0;       // time, s
    Vec2 x_com{0.0, 0.0}; // centre of mass, px
    double gamma = 0.0;   // orientation, rad
    Spline spline;        // lab-frame body curve (arc length == L to 1 %)
};

// Rigid-body velocities that balance drag forces, plus the leftover
// force/torque when the balance is re-evaluated at the solution (both should
// sit at machine precision; > 1e-8 indicates a solver problem).
struct RftSolution {
    Vec2 V{0.0, 0.0};       // centre-of-mass velocity, px/s
    double Omega = 0.0;     // angular velocity, rad/s
    Vec2 residual_force{0.0, 0.0};
    double residual_torque = 0.0;
};

// One simulated worm: a stable identity plus its per-frame states.
struct WormTrack {
    int identity = 0;
    std::vector<WormState> states;
};

// A full multi-worm recording.
struct Scene {
    int height = 256;   // frame height, px
    int width = 256;    // frame width, px
    double dt = 0.1;    // frame interval, s
    double density = 1.0;      // worms per mm^2
    double mm_per_px = 0.025;  // scale anchor: 1 mm = 40 px
    std::vector<WormTrack> worms;

    std::size_t n_frames() const {
        return worms.empty() ? 0 : worms.front().states.size();
    }
    double area_mm2() const {
        return static_cast<double>(height) * static_cast<double>(width) *
               mm_per_px * mm_per_px;
    }
};

// Closed parameter range for uniform sampling.
struct Range {
    double min = 0.0;
    double max = 0.0;
};

// Everything needed to generate a scene. Ranges are sampled uniformly;
// degenerate ranges ([c, c]) pin a parameter.
struct SimConfig {
    Range L{35.0, 55.0};   // px
    Range A{0.4, 1.1};     // rad
    Range T{0.8, 2.0};     // s
    Range k_u{2.0, 5.0};
    Range k_s{4.0, 9.0};
    Range alpha{1.5, 10.0};  // must stay > 1
    double alpha_t = 1.0;

    int height = 256;  // px
    int width = 256;   // px
    int n_frames = 64;
    double dt = 0.1;          // s
    double density = 1.0;     // worms per mm^2
    double mm_per_px = 0.025; // 40 px per mm
    std::size_t k = 49;       // points per emitted spline

    // Throws std::invalid_argument on inverted ranges, alpha.min <= 1,
    // non-positive sizes/steps, or density < 0.
    void validate() const;
};

// Draws one parameter set uniformly from the configured ranges.
// Deterministic for a fixed rng state. Throws on invalid config.
WormParams sample_params(Rng& rng, const SimConfig& config);

// Local bending angle psi(s, t) for arc fraction s in [0, 1]:
//   psi_u = A cos(2 pi t / T + rho1) cos(k_u s + rho2)
//   psi_s = 0.5 (1 + |sin(2 pi t)|) A cos(2 pi t / T + k_s s + rho3)
// Returns psi_u + psi_s.
double undulation_angle(const WormParams& params, double s, double t);

// Integrates the body curve
//   x(s) = L * integral_0^s (cos(psi + gamma), sin(psi + gamma)) ds'
// with the trapezoid rule on a fine grid (>= 8k nodes), starting at the
// origin, then resamples to k equidistant points. Arc length is L to 0.1 %.
Spline body_coordinates(const WormParams& params, double t, double gamma,
                        std::size_t k);

// Solves the force and torque balance for rigid-body velocities (V, Omega).
// Per-point drag is f = alpha_t (t.U) t + alpha_n (n.U) n with
// alpha_n = alpha * alpha_t and U = body_velocity + V + Omega x (x - x_com);
// x_com is the arc-weighted centroid of the spline and all integrals use the
// composite trapezoid rule over the given points.
// Throws std::runtime_error("singular mobility") for degenerate splines.
RftSolution rft_velocities(const Spline& spline,
                           const std::vector<Vec2>& body_velocity,
                           double alpha_t, double alpha);

// Steps one worm forward: per frame, build the body shape, estimate the shape
// velocity by central differences at fixed orientation and centre of mass,
// solve for (V, Omega), emit the lab-frame state, then advance the pose with
// explicit Euler.
std::vector<WormState> simulate(const WormParams& params, int n_frames,
                                double dt, std::size_t k);

// Builds a scene with round(density * area_mm2) worms, parameters and initial
// poses sampled independently per worm from streams derived from `seed`
// (bit-identical output regardless of thread count).
Scene populate_scene(const SimConfig& config, std::uint64_t seed);

// Average number of overlapping partners per worm on one frame. Two worms
// overlap when their polylines come within 2r of each other anywhere;
// each of the pair's two members counts the other, hence (pairs * 2) / worms.
double count_overlaps(const Scene& scene, std::size_t frame_index, double r);

// Arc-weighted centroid (trapezoid rule over equidistant points): the
// reference point whose velocity rft_velocities reports.
Vec2 arc_centroid(const Spline& spline);

// Smallest distance between two polylines (segment-to-segment).
double polyline_distance(const Spline& a, const Spline& b);

}  // namespace tanglekit::wormsim
