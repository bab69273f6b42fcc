#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tanglekit/splines.hpp"

namespace tanglekit::track {

// One accepted detection, carrying its frame index and (once tracked) the
// identity of the track that owns it.
struct Detection {
    int frame = 0;
    SplineTriplet triplet;
    int identity = -1;  // -1 until assigned by the tracker
};

// Linking parameters. The gate applies to the distance between the present
// splines' midpoints; birth/death cost is the price of leaving a detection
// unmatched on either side (same units as the directed cost, px^2).
struct LinkConfig {
    enum class CostMode { directed, present };

    double gate_radius = 15.0;       // px
    double birth_death_cost = 225.0; // px^2 (gate_radius^2: one full miss)
    int min_track_length = 5;        // frames; shorter tracks are stubs
    CostMode cost_mode = CostMode::directed;

    void validate() const;  // throws on non-positive gate or cost
};

// A single identity over time. Frames are strictly increasing; stub repair
// may bridge a single missing frame, so consecutive entries can be 2 apart.
struct Track {
    int id = 0;
    std::vector<Detection> detections;

    std::size_t length() const { return detections.size(); }
    int first_frame() const { return detections.front().frame; }
    int last_frame() const { return detections.back().frame; }
};

// Result of linking two consecutive frames: index pairs into the inputs,
// plus the detections left unmatched on either side. total_cost counts
// matched-pair costs plus one birth/death penalty per unmatched detection.
struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> matches;
    std::vector<std::size_t> deaths;  // indices into the earlier frame
    std::vector<std::size_t> births;  // indices into the later frame
    double total_cost = 0.0;
};

// Asymmetric pair cost between a detection at t and one at t+1:
// d^2(present_t, past_{t+1}) + d^2(future_t, present_{t+1}), each term the
// flip-invariant squared distance. Symmetric under head-tail reversal of
// either detection's splines. Throws on mismatched k.
double directed_cost(const Detection& det_t, const Detection& det_t1);

// Baseline cost: flip-invariant squared distance of the present splines.
double present_cost(const Detection& det_t, const Detection& det_t1);

// Optimal one-to-one linking between consecutive frames: pairs whose
// present-spline midpoints lie farther apart than the gate are forbidden;
// birth/death is modelled by cost augmentation and the square problem is
// solved exactly.
Assignment link_frames(const std::vector<Detection>& dets_t,
                       const std::vector<Detection>& dets_t1,
                       const LinkConfig& config);

// Incremental track assembly: frames must be pushed in order; linking one
// boundary can overlap with producing the next frame's detections.
class TrackBuilder {
  public:
    explicit TrackBuilder(LinkConfig config);

    void push_frame(std::vector<Detection> detections);

    // Returns every track built so far (open and closed) and resets.
    std::vector<Track> finish();

  private:
    LinkConfig config_;
    std::vector<Track> tracks_;
    std::vector<Detection> prev_frame_;
    std::vector<std::size_t> prev_track_;  // track index per prev detection
    int next_id_ = 0;
    bool started_ = false;
};

// Chains link_frames over the full per-frame detection sequence.
std::vector<Track> build_tracks(std::vector<std::vector<Detection>> frames,
                                const LinkConfig& config);

// Stub repair: re-joins fragments whose boundary detections are one or two
// frames apart with a boundary cost below birth_death_cost (adjacent
// fragments pay the configured pair cost; across one missing frame the
// directed mode compares the two predictions of the skipped frame, while
// present mode sticks to the present splines). A merge happens only when it
// is unambiguous from both sides; merging runs before stub removal so short
// mid-fragments can still be absorbed, then tracks shorter than
// min_track_length are dropped. Bridged tracks keep a one-frame hole.
std::vector<Track> fix_stubs(std::vector<Track> tracks, const LinkConfig& config);

// Centre-of-mass speeds (mm/s) between consecutive detections of one track,
// from finite differences of the present-spline centroid. Needs length >= 2.
std::vector<double> com_speed(const Track& track, double dt, double mm_per_px);

}  // namespace tanglekit::track
