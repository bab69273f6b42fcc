#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tanglekit/rng.hpp"
#include "tanglekit/splines.hpp"
#include "tanglekit/vec2.hpp"
#include "tanglekit/wormsim.hpp"

namespace tanglekit::detect {

// One detection proposal: decoded past/present/future splines, their
// coefficient-space descriptors, a confidence score, and a latent embedding
// where proximity means "same object".
struct Candidate {
    SplineTriplet triplet;
    std::array<ShapeDescriptor, 3> descriptors;  // past, present, future
    double score = 0.0;
    std::vector<double> latent;

    // Spatial anchor: the present spline's centroid offset.
    const Vec2& x0() const { return descriptors[1].offset; }
};

// Score/overlap cutoffs and the two length scales of the detector.
struct Thresholds {
    double tau_s = 0.5;    // minimum score to keep a candidate
    double tau_o = 0.5;    // same-object probability above which we suppress
    double sigma_l = 48.0; // physical visibility cutoff (px)
    double sigma_s = 5.0;  // score length scale (px)

    // Equivalent latent exclusion radius: P(r_l) == tau_o.
    double r_l() const;

    void validate() const;  // throws on out-of-range values
};

// Synthetic candidate generator standing in for a learned detector:
// perturbs ground-truth triplets, scores them against their own label,
// occasionally drops worms and adds low-score spurious proposals.
struct OracleDetectorConfig {
    int candidates_per_worm = 8;
    double sigma_pert = 0.3;      // per-point Gaussian noise (px)
    double score_noise = 0.02;    // additive score jitter, clipped to [0,1]
    double latent_spread = 0.0;   // additive per-dimension latent jitter
    double quality_spread = 0.0;  // candidate c gets sigma_pert*(1 + c*this)
    double miss_probability = 0.0;  // per worm per frame
    double spurious_rate = 0.0;     // expected spurious candidates per frame

    std::uint64_t latent_map_seed = 0x7a11;  // embedding map seed
    std::size_t latent_dim = 8;
    double latent_scale = 0.125;

    void validate() const;
};

// Ground-truth quality of a proposal z against its label:
// exp(-d_s^2(z, zhat) / sigma_s^2). Throws when sigma_s <= 0.
double true_score(const SplineTriplet& z, const SplineTriplet& zhat,
                  double sigma_s);

// exp(-||p_i - p_j||^2) when the present offsets are within sigma_l,
// otherwise 0. Latent dimensions must match.
double same_object_probability(const Candidate& ci, const Candidate& cj,
                               double sigma_l);

// Deterministic latent embedding. The feature vector (each descriptor's
// leading shape coefficients, neighbor offsets relative to the present
// offset, and the absolute present offset) and its head-tail-flipped
// counterpart are each passed through one seeded random affine map and
// summed, then scaled -- so a proposal and its flip embed identically by
// construction.
std::vector<double> latent_encode_standin(
    const std::array<ShapeDescriptor, 3>& descriptors, const PcaBasis& basis,
    std::uint64_t seed, std::size_t dim = 8, double scale = 0.125);

// Emits candidates for one frame of a scene. Requires both temporal
// neighbors (throws std::invalid_argument at the clip edges). Per worm, one
// miss draw, then `candidates_per_worm` perturbed copies of the true
// triplet, encoded/decoded through `basis`; then Poisson-many spurious
// candidates built from random basis coefficients with scores ~ U(0.05,
// 0.55). Deterministic for a fixed rng state.
std::vector<Candidate> oracle_detect(const wormsim::Scene& scene,
                                     std::size_t frame_index,
                                     const OracleDetectorConfig& config,
                                     const Thresholds& thresholds,
                                     const PcaBasis& basis, Rng& rng);

// Greedy score-ordered suppression: drop scores below tau_s, then repeatedly
// accept the best remaining candidate and remove every candidate whose
// same-object probability with it exceeds tau_o. Ties broken by input index.
// Returns accepted candidates in acceptance order.
std::vector<Candidate> nms_filter(const std::vector<Candidate>& candidates,
                                  const Thresholds& thresholds);

// Mean over visible labels of the squared triplet distance to the closest
// prediction. Zero visible labels -> 0; throws when labels are visible but
// predictions empty, or when the mask length mismatches.
double loss_splines(const std::vector<SplineTriplet>& predictions,
                    const std::vector<SplineTriplet>& labels,
                    const std::vector<bool>& visible_mask);

// Mean squared gap between each predicted score and the score its proposal
// should have (exp(-min_n d_s^2 / sigma_s^2); 0 when there are no labels).
double loss_score(const std::vector<double>& predicted_scores,
                  const std::vector<SplineTriplet>& predictions,
                  const std::vector<SplineTriplet>& labels, double sigma_s);

// Score-weighted negated cross-entropy over candidate pairs within sigma_l:
// pairs aiming at the same label should embed close, others far. Nonnegative;
// probabilities clamped to [1e-7, 1 - 1e-7]; no in-range pairs -> 0.
double loss_latent(const std::vector<Candidate>& candidates,
                   const std::vector<SplineTriplet>& labels, double sigma_s,
                   double sigma_l);

}  // namespace tanglekit::detect
