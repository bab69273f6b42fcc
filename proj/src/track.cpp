#include "tanglekit/track.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "tanglekit/lap.hpp"
#include "tanglekit/vec2.hpp"

namespace tanglekit::track {

namespace {

const Vec2& midpoint(const Detection& det) {
    const Spline& s = det.triplet.present;
    return s.points[s.k() / 2];
}

double pair_cost(const Detection& a, const Detection& b,
                 LinkConfig::CostMode mode) {
    return mode == LinkConfig::CostMode::directed ? directed_cost(a, b)
                                                  : present_cost(a, b);
}

}  // namespace

void LinkConfig::validate() const {
    if (!(gate_radius > 0.0)) {
        throw std::invalid_argument("gate_radius must be positive");
    }
    if (!(birth_death_cost > 0.0)) {
        throw std::invalid_argument("birth_death_cost must be positive");
    }
    if (min_track_length < 1) {
        throw std::invalid_argument("min_track_length must be >= 1");
    }
}

double directed_cost(const Detection& det_t, const Detection& det_t1) {
    return flip_distance_sq(det_t.triplet.present, det_t1.triplet.past) +
           flip_distance_sq(det_t.triplet.future, det_t1.triplet.present);
}

double present_cost(const Detection& det_t, const Detection& det_t1) {
    return flip_distance_sq(det_t.triplet.present, det_t1.triplet.present);
}

Assignment link_frames(const std::vector<Detection>& dets_t,
                       const std::vector<Detection>& dets_t1,
                       const LinkConfig& config) {
    config.validate();
    const std::size_t n = dets_t.size();
    const std::size_t m = dets_t1.size();
    const std::size_t size = n + m;
    const double inf = std::numeric_limits<double>::infinity();

    Assignment out;
    if (size == 0) return out;

    // Square augmentation: real rows may take a private death column, real
    // columns a private birth row, and dummy-dummy pairings are free.
    std::vector<double> cost(size * size, inf);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (dist(midpoint(dets_t[i]), midpoint(dets_t1[j])) >
                config.gate_radius) {
                continue;
            }
            cost[i * size + j] = pair_cost(dets_t[i], dets_t1[j], config.cost_mode);
        }
        cost[i * size + (m + i)] = config.birth_death_cost;  // death of row i
    }
    for (std::size_t j = 0; j < m; ++j) {
        cost[(n + j) * size + j] = config.birth_death_cost;  // birth of col j
    }
    for (std::size_t i = n; i < size; ++i) {
        for (std::size_t j = m; j < size; ++j) cost[i * size + j] = 0.0;
    }

    const std::vector<int> row_to_col = lap::solve_square(cost, size);

    for (std::size_t i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(row_to_col[i]);
        if (j < m) {
            out.matches.emplace_back(i, j);
            out.total_cost += cost[i * size + j];
        } else {
            out.deaths.push_back(i);
            out.total_cost += config.birth_death_cost;
        }
    }
    std::vector<char> col_matched(m, 0);
    for (const auto& [i, j] : out.matches) col_matched[j] = 1;
    for (std::size_t j = 0; j < m; ++j) {
        if (!col_matched[j]) {
            out.births.push_back(j);
            out.total_cost += config.birth_death_cost;
        }
    }
    return out;
}

TrackBuilder::TrackBuilder(LinkConfig config) : config_(config) {
    config_.validate();
}

void TrackBuilder::push_frame(std::vector<Detection> detections) {
    std::vector<std::size_t> cur_track(detections.size());

    if (!started_) {
        started_ = true;
        for (std::size_t j = 0; j < detections.size(); ++j) {
            detections[j].identity = next_id_;
            Track t;
            t.id = next_id_++;
            t.detections.push_back(detections[j]);
            cur_track[j] = tracks_.size();
            tracks_.push_back(std::move(t));
        }
    } else {
        const Assignment link = link_frames(prev_frame_, detections, config_);
        for (const auto& [i, j] : link.matches) {
            const std::size_t t = prev_track_[i];
            detections[j].identity = tracks_[t].id;
            tracks_[t].detections.push_back(detections[j]);
            cur_track[j] = t;
        }
        for (std::size_t j : link.births) {
            detections[j].identity = next_id_;
            Track t;
            t.id = next_id_++;
            t.detections.push_back(detections[j]);
            cur_track[j] = tracks_.size();
            tracks_.push_back(std::move(t));
        }
        // Deaths need no action: their tracks simply stop growing.
    }

    prev_frame_ = std::move(detections);
    prev_track_ = std::move(cur_track);
}

std::vector<Track> TrackBuilder::finish() {
    prev_frame_.clear();
    prev_track_.clear();
    started_ = false;
    next_id_ = 0;
    return std::move(tracks_);
}

std::vector<Track> build_tracks(std::vector<std::vector<Detection>> frames,
                                const LinkConfig& config) {
    TrackBuilder builder(config);
    for (auto& frame : frames) builder.push_frame(std::move(frame));
    return builder.finish();
}

namespace {

// Cost of joining a track that ends with `tail` to one that starts with
// `head`, `gap` frames later. Adjacent fragments (gap 1) pay the full
// directed cost. Across one missing frame (gap 2), both boundary triplets
// carry a prediction of the skipped frame — the tail's future spline and the
// head's past spline — so the comparison happens there, at detector-noise
// scale rather than at the (much larger) one-frame shape-change scale.
// Doubled to stay commensurate with the two-term directed cost.
//
// In present mode there are no frame predictions to lean on, so fragments
// are compared by their present splines across the gap, same as the linker.
double bridge_cost(const Detection& tail, const Detection& head, int gap,
                   LinkConfig::CostMode mode) {
    if (mode == LinkConfig::CostMode::present) {
        return flip_distance_sq(tail.triplet.present, head.triplet.present);
    }
    if (gap == 1) return directed_cost(tail, head);
    return 2.0 * flip_distance_sq(tail.triplet.future, head.triplet.past);
}

}  // namespace

std::vector<Track> fix_stubs(std::vector<Track> tracks, const LinkConfig& config) {
    config.validate();
    const double merge_limit = config.birth_death_cost;

    // Repeatedly merge one unambiguous fragment pair, rebuilding the
    // boundary indices after every merge. A merge is taken only when the
    // head is the single cheap continuation of the tail AND the tail is the
    // single cheap predecessor of the head (in both gap classes); contested
    // boundaries are left alone.
    std::vector<char> dead(tracks.size(), 0);
    bool progress = true;
    while (progress) {
        progress = false;
        std::map<int, std::vector<std::size_t>> by_start;
        std::map<int, std::vector<std::size_t>> by_end;
        for (std::size_t t = 0; t < tracks.size(); ++t) {
            if (!dead[t] && !tracks[t].detections.empty()) {
                by_start[tracks[t].first_frame()].push_back(t);
                by_end[tracks[t].last_frame()].push_back(t);
            }
        }
        for (std::size_t t = 0; t < tracks.size() && !progress; ++t) {
            if (dead[t] || tracks[t].detections.empty()) continue;
            const Detection& tail = tracks[t].detections.back();
            for (int gap = 1; gap <= 2; ++gap) {
                const auto it = by_start.find(tail.frame + gap);
                if (it == by_start.end()) continue;
                std::size_t found = tracks.size();
                int n_heads = 0;
                for (std::size_t s : it->second) {
                    if (s == t || dead[s]) continue;
                    if (bridge_cost(tail, tracks[s].detections.front(), gap,
                                    config.cost_mode) < merge_limit) {
                        ++n_heads;
                        found = s;
                    }
                }
                if (n_heads > 1) break;  // ambiguous continuation: leave alone
                if (n_heads == 0) continue;

                // Reverse check: every live tail that could also claim this
                // head, at either gap (`t` itself counts once).
                const Detection& head = tracks[found].detections.front();
                int n_tails = 0;
                for (int g2 = 1; g2 <= 2 && n_tails <= 1; ++g2) {
                    const auto eit = by_end.find(head.frame - g2);
                    if (eit == by_end.end()) continue;
                    for (std::size_t t2 : eit->second) {
                        if (dead[t2] || t2 == found) continue;
                        if (bridge_cost(tracks[t2].detections.back(), head,
                                        g2, config.cost_mode) < merge_limit) {
                            ++n_tails;
                        }
                    }
                }
                if (n_tails > 1) break;  // contested head: leave alone

                for (Detection& d : tracks[found].detections) {
                    d.identity = tracks[t].id;
                    tracks[t].detections.push_back(d);
                }
                dead[found] = 1;
                progress = true;
                break;
            }
        }
    }

    std::vector<Track> out;
    out.reserve(tracks.size());
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        if (dead[t]) continue;
        if (tracks[t].length() < static_cast<std::size_t>(config.min_track_length)) {
            continue;
        }
        out.push_back(std::move(tracks[t]));
    }
    return out;
}

std::vector<double> com_speed(const Track& track, double dt, double mm_per_px) {
    if (track.length() < 2) {
        throw std::invalid_argument("com_speed: track needs >= 2 detections");
    }
    if (!(dt > 0.0) || !(mm_per_px > 0.0)) {
        throw std::invalid_argument("com_speed: dt and mm_per_px must be positive");
    }
    std::vector<double> speeds;
    speeds.reserve(track.length() - 1);
    for (std::size_t i = 1; i < track.length(); ++i) {
        const Detection& a = track.detections[i - 1];
        const Detection& b = track.detections[i];
        const double span = static_cast<double>(b.frame - a.frame) * dt;
        const double step =
            dist(a.triplet.present.centroid(), b.triplet.present.centroid());
        speeds.push_back(step / span * mm_per_px);
    }
    return speeds;
}

}  // namespace tanglekit::track
