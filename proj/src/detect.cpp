#include "tanglekit/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "tanglekit/kernels.hpp"

namespace tanglekit::detect {

namespace {

constexpr double kProbabilityClamp = 1e-7;

// Only the leading shape modes feed the embedding. Worm shape variance
// concentrates in the first few principal directions, while per-point
// observation noise spreads evenly over all of them -- truncating keeps
// genuinely different shapes far apart in the latent without letting noise
// in the low-variance tail blur same-object proposals together.
constexpr std::size_t kLatentFeatureModes = 8;

std::size_t latent_feature_modes(const PcaBasis& basis) {
    return std::min<std::size_t>(basis.dim, kLatentFeatureModes);
}

std::size_t latent_feature_dim(const PcaBasis& basis) {
    return 3 * latent_feature_modes(basis) + 6;
}

// The seeded random affine map behind latent_encode_standin.
struct LatentMap {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;  // out_dim x in_dim, row-major
    std::vector<double> bias;     // out_dim
};

LatentMap build_latent_map(std::uint64_t seed, std::size_t in_dim,
                           std::size_t out_dim) {
    LatentMap map;
    map.in_dim = in_dim;
    map.out_dim = out_dim;
    map.weights.resize(in_dim * out_dim);
    map.bias.resize(out_dim);
    Rng rng(derive_seed(seed, 0x6d61706cu));
    // Rows are normalized by the input width so per-feature observation
    // noise stays small in the embedding while genuinely different shapes
    // (whose features differ by tens of pixels) remain far apart.
    const double entry_scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (double& w : map.weights) w = rng.normal() * entry_scale;
    for (double& b : map.bias) b = rng.normal();
    return map;
}

// Feature layout: (lambda_past, lambda_present, lambda_future,
//                  x0_past - x0, x0_future - x0, x0).
std::vector<double> descriptor_features(
    const std::array<ShapeDescriptor, 3>& descriptors, bool flipped,
    const PcaBasis& basis) {
    const std::size_t modes = latent_feature_modes(basis);
    std::vector<double> f;
    f.reserve(3 * modes + 6);
    for (const ShapeDescriptor& d : descriptors) {
        if (d.eigenvalues.size() != basis.dim) {
            throw std::invalid_argument("descriptor does not match basis dim");
        }
        if (flipped) {
            const std::vector<double> lf = flip_eigenvalues(d.eigenvalues, basis);
            f.insert(f.end(), lf.begin(), lf.begin() + modes);
        } else {
            f.insert(f.end(), d.eigenvalues.begin(),
                     d.eigenvalues.begin() + modes);
        }
    }
    const Vec2 x0 = descriptors[1].offset;
    const Vec2 rel_past = descriptors[0].offset - x0;
    const Vec2 rel_future = descriptors[2].offset - x0;
    f.insert(f.end(), {rel_past.x, rel_past.y, rel_future.x, rel_future.y,
                       x0.x, x0.y});
    return f;
}

std::vector<double> apply_latent_map(
    const LatentMap& map, const std::array<ShapeDescriptor, 3>& descriptors,
    const PcaBasis& basis, double scale) {
    const std::vector<double> f = descriptor_features(descriptors, false, basis);
    const std::vector<double> ff = descriptor_features(descriptors, true, basis);
    std::vector<double> sum(map.in_dim);
    for (std::size_t j = 0; j < map.in_dim; ++j) sum[j] = f[j] + ff[j];

    std::vector<double> latent(map.out_dim);
    const auto& ops = kernels::active();
    for (std::size_t r = 0; r < map.out_dim; ++r) {
        latent[r] = scale * (ops.dot(&map.weights[r * map.in_dim], sum.data(),
                                     map.in_dim) +
                             2.0 * map.bias[r]);
    }
    return latent;
}

Spline perturbed_copy(const Spline& spline, double sigma, Rng& rng) {
    Spline out = spline;
    for (Vec2& p : out.points) {
        p.x += rng.normal(0.0, sigma);
        p.y += rng.normal(0.0, sigma);
    }
    return out;
}

bool any_point_in_frame(const Spline& spline, int width, int height) {
    for (const Vec2& p : spline.points) {
        if (p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height) return true;
    }
    return false;
}

std::uint64_t cell_key(double x, double y, double cell) {
    const auto cx = static_cast<std::int32_t>(std::floor(x / cell));
    const auto cy = static_cast<std::int32_t>(std::floor(y / cell));
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
}

}  // namespace

double Thresholds::r_l() const { return std::sqrt(-std::log(tau_o)); }

void Thresholds::validate() const {
    if (!(tau_s > 0.0 && tau_s < 1.0)) {
        throw std::invalid_argument("tau_s must lie in (0, 1)");
    }
    if (!(tau_o > 0.0 && tau_o < 1.0)) {
        throw std::invalid_argument("tau_o must lie in (0, 1)");
    }
    if (!(sigma_l > 0.0)) throw std::invalid_argument("sigma_l must be positive");
    if (!(sigma_s > 0.0)) throw std::invalid_argument("sigma_s must be positive");
}

void OracleDetectorConfig::validate() const {
    if (candidates_per_worm < 0) {
        throw std::invalid_argument("candidates_per_worm must be >= 0");
    }
    if (sigma_pert < 0.0 || score_noise < 0.0 || latent_spread < 0.0 ||
        quality_spread < 0.0 || spurious_rate < 0.0) {
        throw std::invalid_argument("oracle rates must be nonnegative");
    }
    if (miss_probability < 0.0 || miss_probability > 1.0) {
        throw std::invalid_argument("miss_probability must lie in [0, 1]");
    }
    if (latent_dim == 0) throw std::invalid_argument("latent_dim must be >= 1");
    if (!(latent_scale > 0.0)) {
        throw std::invalid_argument("latent_scale must be positive");
    }
}

double true_score(const SplineTriplet& z, const SplineTriplet& zhat,
                  double sigma_s) {
    if (!(sigma_s > 0.0)) throw std::invalid_argument("sigma_s must be positive");
    return std::exp(-triplet_distance_sq(z, zhat) / (sigma_s * sigma_s));
}

double same_object_probability(const Candidate& ci, const Candidate& cj,
                               double sigma_l) {
    if (ci.latent.size() != cj.latent.size()) {
        throw std::invalid_argument("latent dimensions differ");
    }
    if (dist(ci.x0(), cj.x0()) > sigma_l) return 0.0;
    const double d_sq = kernels::active().sum_sq_diff(
        ci.latent.data(), cj.latent.data(), ci.latent.size());
    return std::exp(-d_sq);
}

std::vector<double> latent_encode_standin(
    const std::array<ShapeDescriptor, 3>& descriptors, const PcaBasis& basis,
    std::uint64_t seed, std::size_t dim, double scale) {
    const LatentMap map = build_latent_map(seed, latent_feature_dim(basis), dim);
    return apply_latent_map(map, descriptors, basis, scale);
}

std::vector<Candidate> oracle_detect(const wormsim::Scene& scene,
                                     std::size_t frame_index,
                                     const OracleDetectorConfig& config,
                                     const Thresholds& thresholds,
                                     const PcaBasis& basis, Rng& rng) {
    config.validate();
    thresholds.validate();
    if (frame_index == 0 || frame_index + 1 >= scene.n_frames()) {
        throw std::invalid_argument(
            "oracle_detect: frame needs previous and next neighbors");
    }

    const LatentMap map = build_latent_map(
        config.latent_map_seed, latent_feature_dim(basis), config.latent_dim);
    std::vector<Candidate> candidates;

    auto finish_candidate = [&](Candidate& cand) {
        cand.latent = apply_latent_map(map, cand.descriptors, basis,
                                       config.latent_scale);
        for (double& v : cand.latent) v += rng.normal(0.0, config.latent_spread);
        candidates.push_back(std::move(cand));
    };

    for (const auto& worm : scene.worms) {
        const bool missed = rng.uniform() < config.miss_probability;
        const Spline& present = worm.states[frame_index].spline;
        if (missed || !any_point_in_frame(present, scene.width, scene.height)) {
            continue;
        }
        SplineTriplet label{worm.states[frame_index - 1].spline, present,
                            worm.states[frame_index + 1].spline};
        for (int c = 0; c < config.candidates_per_worm; ++c) {
            const double sigma =
                config.sigma_pert * (1.0 + config.quality_spread * c);
            Candidate cand;
            cand.descriptors[0] = encode(perturbed_copy(label.past, sigma, rng), basis);
            cand.descriptors[1] = encode(perturbed_copy(label.present, sigma, rng), basis);
            cand.descriptors[2] = encode(perturbed_copy(label.future, sigma, rng), basis);
            cand.triplet = SplineTriplet{decode(cand.descriptors[0], basis),
                                         decode(cand.descriptors[1], basis),
                                         decode(cand.descriptors[2], basis)};
            const double noise = rng.normal(0.0, config.score_noise);
            cand.score = std::clamp(
                true_score(cand.triplet, label, thresholds.sigma_s) + noise, 0.0,
                1.0);
            finish_candidate(cand);
        }
    }

    const unsigned spurious = rng.poisson(config.spurious_rate);
    for (unsigned s = 0; s < spurious; ++s) {
        const Vec2 offset{rng.uniform(0.0, static_cast<double>(scene.width)),
                          rng.uniform(0.0, static_cast<double>(scene.height))};
        std::vector<double> base(basis.dim);
        for (std::size_t c = 0; c < basis.dim; ++c) {
            base[c] = rng.normal() * std::sqrt(basis.variances[c]);
        }
        Candidate cand;
        for (std::size_t t = 0; t < 3; ++t) {
            ShapeDescriptor d;
            d.eigenvalues = base;
            for (std::size_t c = 0; c < basis.dim; ++c) {
                d.eigenvalues[c] += rng.normal() * 0.05 * std::sqrt(basis.variances[c]);
            }
            d.offset = offset + Vec2{rng.normal(), rng.normal()};
            cand.descriptors[t] = d;
        }
        cand.triplet = SplineTriplet{decode(cand.descriptors[0], basis),
                                     decode(cand.descriptors[1], basis),
                                     decode(cand.descriptors[2], basis)};
        cand.score = rng.uniform(0.05, 0.55);
        finish_candidate(cand);
    }
    return candidates;
}

std::vector<Candidate> nms_filter(const std::vector<Candidate>& candidates,
                                  const Thresholds& thresholds) {
    thresholds.validate();

    std::vector<std::size_t> order;
    order.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].score >= thresholds.tau_s) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (candidates[a].score != candidates[b].score) {
            return candidates[a].score > candidates[b].score;
        }
        return a < b;
    });

    // Spatial hash on present offsets: a suppressing pair must sit within
    // sigma_l, i.e. in the 3x3 cell neighborhood at this cell size.
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    std::vector<Candidate> accepted;
    const double cell = thresholds.sigma_l;

    for (std::size_t idx : order) {
        const Candidate& cand = candidates[idx];
        bool suppressed = false;
        for (int dy = -1; dy <= 1 && !suppressed; ++dy) {
            for (int dx = -1; dx <= 1 && !suppressed; ++dx) {
                const auto it = grid.find(cell_key(cand.x0().x + dx * cell,
                                                   cand.x0().y + dy * cell, cell));
                if (it == grid.end()) continue;
                for (std::size_t a : it->second) {
                    if (same_object_probability(accepted[a], cand,
                                                thresholds.sigma_l) >
                        thresholds.tau_o) {
                        suppressed = true;
                        break;
                    }
                }
            }
        }
        if (suppressed) continue;
        grid[cell_key(cand.x0().x, cand.x0().y, cell)].push_back(accepted.size());
        accepted.push_back(cand);
    }
    return accepted;
}

double loss_splines(const std::vector<SplineTriplet>& predictions,
                    const std::vector<SplineTriplet>& labels,
                    const std::vector<bool>& visible_mask) {
    if (visible_mask.size() != labels.size()) {
        throw std::invalid_argument("visible mask length must match labels");
    }
    std::size_t n_visible = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!visible_mask[i]) continue;
        ++n_visible;
        if (predictions.empty()) {
            throw std::invalid_argument(
                "predictions required when labels are visible");
        }
        double best = std::numeric_limits<double>::infinity();
        for (const SplineTriplet& pred : predictions) {
            best = std::min(best, triplet_distance_sq(labels[i], pred));
        }
        acc += best;
    }
    return n_visible == 0 ? 0.0 : acc / static_cast<double>(n_visible);
}

double loss_score(const std::vector<double>& predicted_scores,
                  const std::vector<SplineTriplet>& predictions,
                  const std::vector<SplineTriplet>& labels, double sigma_s) {
    if (predicted_scores.size() != predictions.size()) {
        throw std::invalid_argument("scores and predictions must align");
    }
    if (!(sigma_s > 0.0)) throw std::invalid_argument("sigma_s must be positive");
    if (predictions.empty()) return 0.0;

    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double target = 0.0;
        if (!labels.empty()) {
            double best = std::numeric_limits<double>::infinity();
            for (const SplineTriplet& label : labels) {
                best = std::min(best, triplet_distance_sq(predictions[i], label));
            }
            target = std::exp(-best / (sigma_s * sigma_s));
        }
        const double diff = target - predicted_scores[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(predictions.size());
}

double loss_latent(const std::vector<Candidate>& candidates,
                   const std::vector<SplineTriplet>& labels, double sigma_s,
                   double sigma_l) {
    if (!(sigma_s > 0.0)) throw std::invalid_argument("sigma_s must be positive");
    if (candidates.size() < 2) return 0.0;
    if (labels.empty()) throw std::invalid_argument("labels required");

    const std::size_t n = candidates.size();
    std::vector<std::size_t> nearest(n);
    std::vector<double> s_hat(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t l = 0; l < labels.size(); ++l) {
            const double d = triplet_distance_sq(candidates[i].triplet, labels[l]);
            if (d < best) {
                best = d;
                best_idx = l;
            }
        }
        nearest[i] = best_idx;
        s_hat[i] = std::exp(-best / (sigma_s * sigma_s));
    }

    double weight_sum = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dist(candidates[i].x0(), candidates[j].x0()) > sigma_l) continue;
            const double p =
                std::clamp(same_object_probability(candidates[i], candidates[j],
                                                   sigma_l),
                           kProbabilityClamp, 1.0 - kProbabilityClamp);
            const double w = s_hat[i] * s_hat[j];
            const double bracket =
                nearest[i] == nearest[j] ? std::log(p) : std::log(1.0 - p);
            weight_sum += w;
            acc += w * bracket;
        }
    }
    if (weight_sum <= 0.0) return 0.0;
    return -acc / weight_sum;
}

}  // namespace tanglekit::detect
