#pragma once

#include <cstddef>
#include <vector>

#include "tanglekit/splines.hpp"
#include "tanglekit/track.hpp"
#include "tanglekit/vec2.hpp"
#include "tanglekit/wormsim.hpp"

namespace tanglekit::evaluate {

// Ordered annotation points along one body; no spacing assumptions.
struct LabeledCurve {
    std::vector<Vec2> points;
};

struct EvalConfig {
    double sigma_eps = 3.0;  // match cutoff (px)

    void validate() const;  // throws unless sigma_eps > 0
};

// Output of match_tp_fn.
struct EvalReport {
    std::vector<double> adtw_values;  // one per matched label/prediction pair
    double tp_rate = 0.0;  // matched predictions within sigma_eps / all predictions
    double fn_rate = 0.0;  // labels with no match within sigma_eps / all labels
    std::size_t n_labels = 0;
    std::size_t n_predictions = 0;
    std::size_t n_matched = 0;
    // With zero predictions the TP denominator vanishes; tp_rate is reported
    // as 1 and this flag raised instead of returning NaN.
    bool tp_denominator_zero = false;
};

// Per-worm tracking integrity and its mean over the scene.
struct IntegrityReport {
    std::vector<double> per_worm;
    double mean = 0.0;
};

// Euclidean distance from p to the closed segment [a, b] (which may
// degenerate to a point).
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Mean distance from the N label points to the prediction polyline under the
// best monotone (order-preserving) assignment of points to segments,
// minimized over both traversal directions of the prediction. Asymmetric:
// prediction parts without nearby labels are not penalized. Throws on empty
// labels or a prediction with fewer than 2 points.
double adtw(const LabeledCurve& label, const Spline& prediction);

// One-to-one label/prediction matching minimizing total adtw (exact
// assignment; pairs beyond a large sentinel distance are excluded), then
// TP/FN accounting at the sigma_eps cutoff.
EvalReport match_tp_fn(const std::vector<LabeledCurve>& labels,
                       const std::vector<Spline>& predictions,
                       const EvalConfig& config);

// Probability that two uniformly drawn time points of the series carry the
// same identity: sum over identities of (count/N)^2. Throws on empty input.
double tracking_integrity(const std::vector<long long>& series);

// Integrity of a tracked scene against its ground truth. Per worm and frame
// (over the frame range covered by the tracks, restricted to frames where
// the worm is inside the field of view), the identity is the id of the
// track owning the detection with minimum flip distance to the true spline,
// at RMS-per-point distance <= sigma_eps; frames without such a detection
// get a unique sentinel identity, so lost worms lower the score. Worms
// never visible in the tracked range score 1.
IntegrityReport scene_integrity(const wormsim::Scene& scene,
                                const std::vector<track::Track>& tracks,
                                const EvalConfig& config);

}  // namespace tanglekit::evaluate
