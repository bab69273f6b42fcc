#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tanglekit/vec2.hpp"

// Spline geometry core. A "spline" here is an ordered array of k points with
// equal arc-length spacing along the body centre-line, not a parametric
// B-spline. All types are immutable values; all operations are pure.

namespace tanglekit {

struct Spline {
    std::vector<Vec2> points;

    std::size_t k() const { return points.size(); }
    Vec2 centroid() const;
    Spline reversed() const;
    // total chord length of the point polyline
    double polyline_length() const;
    // contiguous (x,y)-interleaved view, suitable for the kernels
    const double* flat() const { return &points[0].x; }
};

struct SplineTriplet {
    Spline past;
    Spline present;
    Spline future;
    // (w_past, w_present, w_future); normalized to sum 1, with the present
    // spline carrying twice the weight of each neighbor.
    std::array<double, 3> weights{0.25, 0.5, 0.25};

    std::size_t k() const { return present.k(); }
    SplineTriplet reversed() const;
};

struct PcaBasis {
    std::vector<double> mean;        // 2k, planar layout (all x, then all y)
    std::vector<double> components;  // row-major dim x 2k, orthonormal rows
    std::size_t dim = 0;             // embedding dimension
    std::size_t k = 0;               // points per spline
    std::vector<double> variances;   // explained variance per component, descending
};

struct ShapeDescriptor {
    std::vector<double> eigenvalues;  // PCA coefficients, length = basis dim
    Vec2 offset;                      // spline centroid in frame coordinates
};

// Resamples a polyline to k points with equal consecutive arc-length spacing
// along the input; endpoints are preserved. Throws on degenerate
// (zero-length) input or k < 2.
Spline resample_equidistant(const std::vector<Vec2>& polyline, std::size_t k);

// Flip-invariant squared spline distance: the smaller of the point-wise sum
// of squared distances taken in forward and in reversed point order.
double flip_distance_sq(const Spline& a, const Spline& b);

// Forward-only squared distance (no flip minimization).
double plain_distance_sq(const Spline& a, const Spline& b);

// Weighted past/present/future distance using the weights stored in z.
double triplet_distance_sq(const SplineTriplet& z, const SplineTriplet& z2);

// PCA over centroid-centered shapes. Requires at least `dim` samples, all
// with equal k, and dim <= 2k. Components are ordered by descending explained
// variance. Centering removes translation, so the basis spans shape space.
PcaBasis fit_pca(const std::vector<Spline>& shapes, std::size_t dim);

ShapeDescriptor encode(const Spline& spline, const PcaBasis& basis);
Spline decode(const ShapeDescriptor& descriptor, const PcaBasis& basis);

// Eigenvalues of the point-order-reversed spline. Exact when the basis was
// fit on a reversal-closed sample set; a least-squares flip otherwise.
std::vector<double> flip_eigenvalues(const std::vector<double>& eigenvalues,
                                     const PcaBasis& basis);

// Reverses past/future independently whenever reversal lowers their plain
// distance to the present spline.
SplineTriplet align_triplet(const SplineTriplet& z);

// Angle of each point about the spline centroid, in (-pi, pi]. A point
// coincident with the centroid gets angle 0 and raises *had_degenerate.
std::vector<double> spline_angle(const Spline& spline, bool* had_degenerate = nullptr);

// Appends the reverse of every shape; fitting PCA on the result makes the
// mean flip-symmetric and the basis reversal-closed.
std::vector<Spline> with_reversals(std::vector<Spline> shapes);

} // namespace tanglekit
