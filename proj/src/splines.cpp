#include "tanglekit/splines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tanglekit/kernels.hpp"

namespace tanglekit {

namespace {
constexpr double kPi = std::numbers::pi;
}  // namespace

Vec2 Spline::centroid() const {
    Vec2 c;
    for (const auto& p : points) c += p;
    return points.empty() ? c : c / static_cast<double>(points.size());
}

Spline Spline::reversed() const {
    Spline r;
    r.points.assign(points.rbegin(), points.rend());
    return r;
}

double Spline::polyline_length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) len += dist(points[i - 1], points[i]);
    return len;
}

SplineTriplet SplineTriplet::reversed() const {
    return {past.reversed(), present.reversed(), future.reversed(), weights};
}

Spline resample_equidistant(const std::vector<Vec2>& polyline, std::size_t k) {
    if (k < 2) throw std::invalid_argument("resample_equidistant: k must be >= 2");
    if (polyline.size() < 2) throw std::invalid_argument("resample_equidistant: need >= 2 points");
    for (const auto& p : polyline) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("resample_equidistant: non-finite coordinate");
    }

    std::vector<double> cum(polyline.size(), 0.0);
    for (std::size_t i = 1; i < polyline.size(); ++i)
        cum[i] = cum[i - 1] + dist(polyline[i - 1], polyline[i]);
    double total = cum.back();
    if (!(total > 0.0)) throw std::runtime_error("degenerate curve");

    Spline out;
    out.points.resize(k);
    out.points.front() = polyline.front();
    out.points.back() = polyline.back();

    std::size_t seg = 0;
    for (std::size_t i = 1; i + 1 < k; ++i) {
        double target = total * static_cast<double>(i) / static_cast<double>(k - 1);
        while (seg + 2 < polyline.size() && cum[seg + 1] < target) ++seg;
        double seg_len = cum[seg + 1] - cum[seg];
        double u = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
        out.points[i] = polyline[seg] + (polyline[seg + 1] - polyline[seg]) * u;
    }
    return out;
}

double plain_distance_sq(const Spline& a, const Spline& b) {
    if (a.k() != b.k()) throw std::invalid_argument("spline distance: mismatched k");
    if (a.k() == 0) return 0.0;
    return kernels::active().sum_sq_diff(a.flat(), b.flat(), 2 * a.k());
}

double flip_distance_sq(const Spline& a, const Spline& b) {
    if (a.k() != b.k()) throw std::invalid_argument("spline distance: mismatched k");
    if (a.k() == 0) return 0.0;
    const auto& ops = kernels::active();
    double fwd = ops.sum_sq_diff(a.flat(), b.flat(), 2 * a.k());
    double rev = ops.sum_sq_diff_flipped(a.flat(), b.flat(), a.k());
    return std::min(fwd, rev);
}

double triplet_distance_sq(const SplineTriplet& z, const SplineTriplet& z2) {
    return z.weights[0] * flip_distance_sq(z.past, z2.past) +
           z.weights[1] * flip_distance_sq(z.present, z2.present) +
           z.weights[2] * flip_distance_sq(z.future, z2.future);
}

namespace {

// planar flattening: (x_0..x_{k-1}, y_0..y_{k-1}), centered at the centroid
std::vector<double> flatten_centered(const Spline& s) {
    Vec2 c = s.centroid();
    std::size_t k = s.k();
    std::vector<double> v(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        v[i] = s.points[i].x - c.x;
        v[k + i] = s.points[i].y - c.y;
    }
    return v;
}

// point-order reversal in the planar layout: exchange within each coordinate block
std::vector<double> reverse_flat(const std::vector<double>& v, std::size_t k) {
    std::vector<double> r(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        r[i] = v[k - 1 - i];
        r[k + i] = v[2 * k - 1 - i];
    }
    return r;
}

} // namespace

PcaBasis fit_pca(const std::vector<Spline>& shapes, std::size_t dim) {
    if (shapes.empty()) throw std::invalid_argument("fit_pca: no samples");
    std::size_t k = shapes.front().k();
    for (const auto& s : shapes) {
        if (s.k() != k) throw std::invalid_argument("fit_pca: mismatched k");
    }
    std::size_t d = 2 * k;
    if (dim > d) throw std::invalid_argument("fit_pca: dim exceeds 2k");
    if (shapes.size() < dim) throw std::invalid_argument("fit_pca: fewer samples than dim");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    std::vector<std::vector<double>> flats;
    flats.reserve(shapes.size());
    for (const auto& s : shapes) {
        flats.push_back(flatten_centered(s));
        mean += Eigen::Map<const Eigen::VectorXd>(flats.back().data(), d);
    }
    mean /= static_cast<double>(shapes.size());

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& f : flats) {
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(f.data(), d) - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    Eigen::MatrixXd full = cov.selfadjointView<Eigen::Lower>();
    cov = full / static_cast<double>(shapes.size());

    // Head-tail reversal acts on the planar layout as an index exchange
    // within the x and y blocks. When the sample covariance commutes with
    // that exchange (reversal-closed training sets), diagonalize the
    // exchange-even and exchange-odd subspaces separately: every component
    // is then exactly parity-pure, which keeps coefficient-space flips an
    // exact involution even when tail eigenvalues cluster. Plain data falls
    // back to an ordinary eigendecomposition.
    const std::size_t n_pairs = k / 2;
    const bool has_middle = (k % 2) != 0;
    const std::size_t n_even = 2 * (n_pairs + (has_middle ? 1 : 0));
    const std::size_t n_odd = 2 * n_pairs;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                              static_cast<Eigen::Index>(d));
    {
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        Eigen::Index col = 0;
        for (std::size_t block = 0; block < 2; ++block) {  // x block, then y
            const std::size_t base = block * k;
            for (std::size_t i = 0; i < n_pairs; ++i) {
                Q(static_cast<Eigen::Index>(base + i), col) = inv_sqrt2;
                Q(static_cast<Eigen::Index>(base + k - 1 - i), col) = inv_sqrt2;
                ++col;
            }
            if (has_middle) {
                Q(static_cast<Eigen::Index>(base + n_pairs), col) = 1.0;
                ++col;
            }
        }
        for (std::size_t block = 0; block < 2; ++block) {
            const std::size_t base = block * k;
            for (std::size_t i = 0; i < n_pairs; ++i) {
                Q(static_cast<Eigen::Index>(base + i), col) = inv_sqrt2;
                Q(static_cast<Eigen::Index>(base + k - 1 - i), col) = -inv_sqrt2;
                ++col;
            }
        }
    }
    const Eigen::MatrixXd M = Q.transpose() * cov * Q;
    const auto ne = static_cast<Eigen::Index>(n_even);
    const auto no = static_cast<Eigen::Index>(n_odd);
    const double cross_norm =
        n_odd == 0 ? 0.0 : M.block(0, ne, ne, no).cwiseAbs().maxCoeff();
    const double cov_scale = std::max(1.0, cov.cwiseAbs().maxCoeff());

    std::vector<std::pair<double, Eigen::VectorXd>> candidates;
    candidates.reserve(d);
    if (cross_norm <= 1e-9 * cov_scale) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_e(M.topLeftCorner(ne, ne));
        if (eig_e.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");
        for (Eigen::Index c = 0; c < ne; ++c) {
            candidates.emplace_back(eig_e.eigenvalues()(c),
                                    Q.leftCols(ne) * eig_e.eigenvectors().col(c));
        }
        if (n_odd > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_o(
                M.block(ne, ne, no, no));
            if (eig_o.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");
            for (Eigen::Index c = 0; c < no; ++c) {
                candidates.emplace_back(eig_o.eigenvalues()(c),
                                        Q.rightCols(no) * eig_o.eigenvectors().col(c));
            }
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(d); ++c) {
            candidates.emplace_back(eig.eigenvalues()(c), eig.eigenvectors().col(c));
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    PcaBasis basis;
    basis.dim = dim;
    basis.k = k;
    basis.mean.assign(mean.data(), mean.data() + d);
    basis.components.resize(dim * d);
    basis.variances.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        basis.variances[c] = std::max(0.0, candidates[c].first);
        const Eigen::VectorXd& col = candidates[c].second;
        for (std::size_t j = 0; j < d; ++j) basis.components[c * d + j] = col(static_cast<Eigen::Index>(j));
    }
    return basis;
}

ShapeDescriptor encode(const Spline& spline, const PcaBasis& basis) {
    if (spline.k() != basis.k) throw std::invalid_argument("encode: spline k does not match basis");
    std::size_t d = 2 * basis.k;
    std::vector<double> v = flatten_centered(spline);
    for (std::size_t j = 0; j < d; ++j) v[j] -= basis.mean[j];

    ShapeDescriptor desc;
    desc.offset = spline.centroid();
    desc.eigenvalues.resize(basis.dim);
    const auto& ops = kernels::active();
    for (std::size_t c = 0; c < basis.dim; ++c)
        desc.eigenvalues[c] = ops.dot(&basis.components[c * d], v.data(), d);
    return desc;
}

Spline decode(const ShapeDescriptor& descriptor, const PcaBasis& basis) {
    if (descriptor.eigenvalues.size() != basis.dim)
        throw std::invalid_argument("decode: descriptor does not match basis dim");
    std::size_t k = basis.k;
    std::size_t d = 2 * k;
    std::vector<double> v = basis.mean;
    for (std::size_t c = 0; c < basis.dim; ++c) {
        double lambda = descriptor.eigenvalues[c];
        const double* row = &basis.components[c * d];
        for (std::size_t j = 0; j < d; ++j) v[j] += lambda * row[j];
    }

    Spline out;
    out.points.resize(k);
    for (std::size_t i = 0; i < k; ++i) out.points[i] = {v[i], v[k + i]};
    // place the reconstruction so its centroid sits at the stored offset
    Vec2 shift = descriptor.offset - out.centroid();
    for (auto& p : out.points) p += shift;
    return out;
}

std::vector<double> flip_eigenvalues(const std::vector<double>& eigenvalues,
                                     const PcaBasis& basis) {
    if (eigenvalues.size() != basis.dim)
        throw std::invalid_argument("flip_eigenvalues: dim mismatch");
    std::size_t k = basis.k;
    std::size_t d = 2 * k;

    // reconstruct the shape part, reverse point order, re-encode
    std::vector<double> v = basis.mean;
    for (std::size_t c = 0; c < basis.dim; ++c) {
        double lambda = eigenvalues[c];
        const double* row = &basis.components[c * d];
        for (std::size_t j = 0; j < d; ++j) v[j] += lambda * row[j];
    }
    std::vector<double> rv = reverse_flat(v, k);
    for (std::size_t j = 0; j < d; ++j) rv[j] -= basis.mean[j];

    std::vector<double> out(basis.dim);
    const auto& ops = kernels::active();
    for (std::size_t c = 0; c < basis.dim; ++c)
        out[c] = ops.dot(&basis.components[c * d], rv.data(), d);
    return out;
}

SplineTriplet align_triplet(const SplineTriplet& z) {
    SplineTriplet out = z;
    if (plain_distance_sq(out.past.reversed(), out.present) <
        plain_distance_sq(out.past, out.present))
        out.past = out.past.reversed();
    if (plain_distance_sq(out.future.reversed(), out.present) <
        plain_distance_sq(out.future, out.present))
        out.future = out.future.reversed();
    return out;
}

std::vector<double> spline_angle(const Spline& spline, bool* had_degenerate) {
    Vec2 c = spline.centroid();
    std::vector<double> angles(spline.k());
    bool degenerate = false;
    for (std::size_t i = 0; i < spline.k(); ++i) {
        Vec2 r = spline.points[i] - c;
        if (r.x == 0.0 && r.y == 0.0) {
            angles[i] = 0.0;
            degenerate = true;
        } else {
            double a = std::atan2(r.y, r.x);
            if (a <= -kPi) a = kPi;  // keep the branch cut at (-pi, pi]
            angles[i] = a;
        }
    }
    if (had_degenerate) *had_degenerate = degenerate;
    return angles;
}

std::vector<Spline> with_reversals(std::vector<Spline> shapes) {
    std::size_t n = shapes.size();
    shapes.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) shapes.push_back(shapes[i].reversed());
    return shapes;
}

} // namespace tanglekit
