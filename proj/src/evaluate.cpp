#include "tanglekit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "tanglekit/lap.hpp"

namespace tanglekit::evaluate {

namespace {

// Pairs farther apart than this can never influence TP/FN at pixel-scale
// cutoffs; excluding them keeps the assignment local and cheap.
double match_sentinel(double sigma_eps) { return std::max(10.0 * sigma_eps, 30.0); }

struct Bbox {
    double min_x, min_y, max_x, max_y;
};

Bbox bbox_of_points(const std::vector<Vec2>& pts) {
    Bbox b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (const Vec2& p : pts) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

// Lower bound on any point-to-point distance between the two boxes.
double bbox_gap(const Bbox& a, const Bbox& b) {
    const double dx = std::max({0.0, a.min_x - b.max_x, b.min_x - a.max_x});
    const double dy = std::max({0.0, a.min_y - b.max_y, b.min_y - a.max_y});
    return std::hypot(dx, dy);
}

// One pass of the monotone-assignment DP over a distance matrix view.
// dist(i, j) gives the label-i / segment-j distance.
template <typename DistFn>
double adtw_dp(std::size_t n, std::size_t m, DistFn dist) {
    std::vector<double> row(m);
    row[0] = dist(0, 0);
    for (std::size_t j = 1; j < m; ++j) row[j] = std::min(row[j - 1], dist(0, j));
    for (std::size_t i = 1; i < n; ++i) {
        row[0] += dist(i, 0);
        for (std::size_t j = 1; j < m; ++j) {
            row[j] = std::min(row[j - 1], row[j] + dist(i, j));
        }
    }
    return row[m - 1];
}

}  // namespace

void EvalConfig::validate() const {
    if (!(sigma_eps > 0.0)) {
        throw std::invalid_argument("sigma_eps must be positive");
    }
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    if (len_sq <= 0.0) return dist(p, a);
    const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
    return dist(p, a + ab * t);
}

double adtw(const LabeledCurve& label, const Spline& prediction) {
    const std::size_t n = label.points.size();
    if (n == 0) throw std::invalid_argument("adtw: empty label");
    if (prediction.k() < 2) {
        throw std::invalid_argument("adtw: prediction needs >= 2 points");
    }
    const std::size_t m = prediction.k() - 1;  // segment count

    std::vector<double> d(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            d[i * m + j] = point_segment_distance(
                label.points[i], prediction.points[j], prediction.points[j + 1]);
        }
    }

    const double forward =
        adtw_dp(n, m, [&](std::size_t i, std::size_t j) { return d[i * m + j]; });
    // Reversed traversal reuses the same distances in mirrored segment order.
    const double backward = adtw_dp(n, m, [&](std::size_t i, std::size_t j) {
        return d[i * m + (m - 1 - j)];
    });
    return std::min(forward, backward) / static_cast<double>(n);
}

EvalReport match_tp_fn(const std::vector<LabeledCurve>& labels,
                       const std::vector<Spline>& predictions,
                       const EvalConfig& config) {
    config.validate();
    const std::size_t nl = labels.size();
    const std::size_t np = predictions.size();
    const double sentinel = match_sentinel(config.sigma_eps);
    const double inf = std::numeric_limits<double>::infinity();

    EvalReport report;
    report.n_labels = nl;
    report.n_predictions = np;

    std::vector<Bbox> label_boxes(nl), pred_boxes(np);
    for (std::size_t i = 0; i < nl; ++i) {
        if (labels[i].points.empty()) {
            throw std::invalid_argument("match_tp_fn: empty label curve");
        }
        label_boxes[i] = bbox_of_points(labels[i].points);
    }
    for (std::size_t j = 0; j < np; ++j) pred_boxes[j] = bbox_of_points(predictions[j].points);

    // Augmented square assignment; staying unmatched costs one sentinel per
    // item, so pairs beyond ~2x the sentinel can never be matched.
    const std::size_t size = nl + np;
    std::vector<double> delta(nl * np, inf);
    std::vector<double> cost(size * size, inf);
    for (std::size_t i = 0; i < nl; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            if (bbox_gap(label_boxes[i], pred_boxes[j]) > sentinel) continue;
            delta[i * np + j] = adtw(labels[i], predictions[j]);
            cost[i * size + j] = delta[i * np + j];
        }
        cost[i * size + (np + i)] = sentinel;
    }
    for (std::size_t j = 0; j < np; ++j) cost[(nl + j) * size + j] = sentinel;
    for (std::size_t i = nl; i < size; ++i) {
        for (std::size_t j = np; j < size; ++j) cost[i * size + j] = 0.0;
    }

    std::size_t tp_count = 0;
    std::size_t fn_count = 0;
    if (size > 0) {
        const std::vector<int> row_to_col = lap::solve_square(cost, size);
        std::vector<char> label_hit(nl, 0);
        for (std::size_t i = 0; i < nl; ++i) {
            const auto j = static_cast<std::size_t>(row_to_col[i]);
            if (j >= np) continue;
            const double value = delta[i * np + j];
            report.adtw_values.push_back(value);
            ++report.n_matched;
            if (value <= config.sigma_eps) {
                ++tp_count;
                label_hit[i] = 1;
            }
        }
        for (std::size_t i = 0; i < nl; ++i) {
            if (!label_hit[i]) ++fn_count;
        }
    }

    if (np == 0) {
        report.tp_rate = 1.0;
        report.tp_denominator_zero = true;
    } else {
        report.tp_rate = static_cast<double>(tp_count) / static_cast<double>(np);
    }
    report.fn_rate =
        nl == 0 ? 0.0 : static_cast<double>(fn_count) / static_cast<double>(nl);
    return report;
}

double tracking_integrity(const std::vector<long long>& series) {
    if (series.empty()) {
        throw std::invalid_argument("tracking_integrity: empty series");
    }
    std::unordered_map<long long, std::size_t> counts;
    for (long long id : series) ++counts[id];
    const double n = static_cast<double>(series.size());
    double acc = 0.0;
    for (const auto& [id, c] : counts) {
        acc += static_cast<double>(c) * static_cast<double>(c);
    }
    return acc / (n * n);
}

IntegrityReport scene_integrity(const wormsim::Scene& scene,
                                const std::vector<track::Track>& tracks,
                                const EvalConfig& config) {
    config.validate();
    IntegrityReport report;
    if (scene.worms.empty()) {
        report.mean = 1.0;
        return report;
    }

    // Frame range covered by the tracker's output.
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    std::map<int, std::vector<std::pair<const Spline*, int>>> by_frame;
    for (const track::Track& t : tracks) {
        for (const track::Detection& d : t.detections) {
            by_frame[d.frame].emplace_back(&d.triplet.present, t.id);
            lo = std::min(lo, d.frame);
            hi = std::max(hi, d.frame);
        }
    }
    if (by_frame.empty()) {
        report.per_worm.assign(scene.worms.size(), 0.0);
        report.mean = 0.0;
        return report;
    }

    const auto visible = [&scene](const Spline& s) {
        return std::any_of(s.points.begin(), s.points.end(), [&](const Vec2& p) {
            return p.x >= 0.0 && p.x < scene.width && p.y >= 0.0 &&
                   p.y < scene.height;
        });
    };

    long long sentinel = -1;
    for (const auto& worm : scene.worms) {
        std::vector<long long> series;
        series.reserve(static_cast<std::size_t>(hi - lo + 1));
        for (int f = lo; f <= hi; ++f) {
            if (static_cast<std::size_t>(f) >= worm.states.size()) break;
            const Spline& truth = worm.states[static_cast<std::size_t>(f)].spline;
            // Frames where the worm has wandered out of the field are not
            // trackable by anything and do not enter its identity series.
            if (!visible(truth)) continue;
            long long identity = sentinel--;
            const auto it = by_frame.find(f);
            if (it != by_frame.end()) {
                const Vec2 c = truth.centroid();
                const double k = static_cast<double>(truth.k());
                double best = std::numeric_limits<double>::infinity();
                int best_id = 0;
                for (const auto& [spline, id] : it->second) {
                    // Mean offset never exceeds RMS distance, so this gate is safe.
                    if (dist(spline->centroid(), c) > config.sigma_eps) continue;
                    const double d = flip_distance_sq(*spline, truth);
                    if (d < best) {
                        best = d;
                        best_id = id;
                    }
                }
                if (std::sqrt(best / k) <= config.sigma_eps) identity = best_id;
            }
            series.push_back(identity);
        }
        // A worm never visible in the tracked range has nothing to hold
        // together; score it as intact rather than undefined.
        report.per_worm.push_back(series.empty() ? 1.0
                                                 : tracking_integrity(series));
    }

    double sum = 0.0;
    for (double v : report.per_worm) sum += v;
    report.mean = sum / static_cast<double>(report.per_worm.size());
    return report;
}

}  // namespace tanglekit::evaluate
