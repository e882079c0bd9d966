#pragma once

// Volume and second moments of a polytope from its facet complex, using the
// cone decomposition K = union of conv(0, F_i), and a Monte Carlo oracle that
// samples K exactly.

#include "isohull/errors.hpp"
#include "isohull/hull.hpp"
#include "isohull/linalg.hpp"
#include "isohull/rng.hpp"
#include "isohull/special.hpp"
#include "isohull/sphere_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace isohull {

struct MomentSummary
{
    double volume = 0.0;
    double mean_square = 0.0;
    Matrix covariance;
    double inradius = 0.0;
};

/// (1/|D|) \int_D x_i x_j dx over the standard (n-1)-simplex with n vertices.
constexpr double simplex_pair_moment(std::size_t n, bool same) noexcept
{
    const double dn = static_cast<double>(n);
    return (same ? 2.0 : 1.0) / (dn * (dn + 1.0));
}

/// Mean of |x|^2 over the simplex facet conv(Q_1..Q_n) of unit vectors:
/// 2/(n+1) + sum_{i != j} <Q_i, Q_j> / (n(n+1)).
inline double facet_mean_square(std::span<const std::span<const double>> vertices)
{
    const std::size_t n = vertices.size();
    if (n == 0) {
        throw domain_error("facet_mean_square: no vertices");
    }
    for (const auto& v : vertices) {
        if (std::abs(norm(v) - 1.0) > 1e-9) {
            throw domain_error("facet_mean_square: vertex is not unit; use the covariance path for general vertices");
        }
    }
    const double dn = static_cast<double>(n);
    return 2.0 / (dn + 1.0) + sum_cross_inner(vertices) / (dn * (dn + 1.0));
}

/// Same quantity through the pullback F = T(simplex): sum over coordinates j
/// and vertex pairs of Q_a(j) Q_b(j) times the simplex pair moment. Works for
/// any vertices.
inline double facet_mean_square_pullback(std::span<const std::span<const double>> vertices)
{
    const std::size_t n = vertices.size();
    if (n == 0) {
        throw domain_error("facet_mean_square_pullback: no vertices");
    }
    const std::size_t dim = vertices.front().size();
    double total = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                total += vertices[a][j] * vertices[b][j] * simplex_pair_moment(n, a == b);
            }
        }
    }
    return total;
}

/// |K| = (1/n) sum_i d(0, F_i) |F_i|.
inline double polytope_volume(const FacetComplex& fc)
{
    double s = 0.0;
    for (const auto& f : fc.facets) {
        s += f.dist * f.volume;
    }
    const double vol = s / static_cast<double>(fc.n);
    if (!(vol > 0.0)) {
        throw numerical_error("polytope_volume: non-positive volume, invalid complex");
    }
    return vol;
}

/// (1/|K|) \int_K |x|^2 = (1/|K|) sum_i d(0, F_i)/(n+2) \int_{F_i} |y|^2 dy.
/// Needs unit vertices.
inline double polytope_mean_square(const FacetComplex& fc)
{
    const double vol = polytope_volume(fc);
    const double dn = static_cast<double>(fc.n);
    double s = 0.0;
    for (std::size_t f = 0; f < fc.facets.size(); ++f) {
        const auto& facet = fc.facets[f];
        const auto vs = fc.facet_vertices(f);
        s += facet.dist / (dn + 2.0) * facet.volume * facet_mean_square(vs);
    }
    return s / vol;
}

/// (1/|K|) \int_K x x^T dx. Each cone C_i = conv(0, F_i) contributes
/// |C_i| / ((n+1)(n+2)) (sum_k v_k v_k^T + s s^T) with s = sum_k v_k.
/// Valid for general vertices.
inline Matrix polytope_covariance(const FacetComplex& fc)
{
    const std::size_t n = fc.n;
    const double dn = static_cast<double>(n);
    Matrix acc(n, n);
    double vol = 0.0;
    Vector s(n);
    for (const auto& facet : fc.facets) {
        const double cone = facet.dist * facet.volume / dn;
        vol += cone;
        const double w = cone / ((dn + 1.0) * (dn + 2.0));
        std::fill(s.begin(), s.end(), 0.0);
        for (int id : facet.vertex_ids) {
            const auto v = fc.vertex(static_cast<std::size_t>(id));
            for (std::size_t a = 0; a < n; ++a) {
                s[a] += v[a];
                for (std::size_t b = 0; b <= a; ++b) {
                    acc(a, b) += w * v[a] * v[b];
                }
            }
        }
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                acc(a, b) += w * s[a] * s[b];
            }
        }
    }
    if (!(vol > 0.0)) {
        throw numerical_error("polytope_covariance: non-positive volume, invalid complex");
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            acc(a, b) /= vol;
            acc(b, a) = acc(a, b);
        }
    }
    try {
        (void)cholesky(acc);
    } catch (const degenerate_error& e) {
        throw degenerate_error(std::string("polytope_covariance: ") + e.what());
    }
    return acc;
}

/// Volume, mean square, covariance and inradius in one pass. The mean square
/// is the covariance trace, so it is defined for general vertices too.
inline MomentSummary summarize_moments(const FacetComplex& fc)
{
    MomentSummary out;
    out.volume = polytope_volume(fc);
    out.covariance = polytope_covariance(fc);
    out.mean_square = out.covariance.trace();
    out.inradius = inradius(fc);
    return out;
}

/// Cumulative cone-volume table used to pick facets proportionally to |C_i|.
class ConeSampler
{
public:
    explicit ConeSampler(const FacetComplex& fc) : fc_(&fc)
    {
        cumulative_.reserve(fc.facets.size());
        double run = 0.0;
        for (const auto& f : fc.facets) {
            run += f.dist * f.volume;
            cumulative_.push_back(run);
        }
        if (!(run > 0.0)) {
            throw numerical_error("ConeSampler: invalid complex");
        }
    }

    /// Uniform point of K: choose a cone by volume, then flat Dirichlet
    /// weights over its n + 1 vertices (origin included).
    void sample(RngStream& stream, std::span<double> out) const
    {
        const double u = stream.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) {
            --it;
        }
        const auto& facet = fc_->facets[static_cast<std::size_t>(it - cumulative_.begin())];
        const std::size_t n = fc_->n;
        double total = stream.exponential(); // origin weight
        weights_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            weights_[k] = stream.exponential();
            total += weights_[k];
        }
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const auto v = fc_->vertex(static_cast<std::size_t>(facet.vertex_ids[k]));
            const double w = weights_[k] / total;
            for (std::size_t a = 0; a < n; ++a) {
                out[a] += w * v[a];
            }
        }
    }

private:
    const FacetComplex* fc_;
    std::vector<double> cumulative_;
    mutable std::vector<double> weights_;
};

inline Vector sample_in_polytope(const FacetComplex& fc, RngStream& stream)
{
    Vector x(fc.n);
    ConeSampler(fc).sample(stream, x);
    return x;
}

inline bool contains(const FacetComplex& fc, std::span<const double> x, double tol = kCoplanarTol)
{
    for (const auto& f : fc.facets) {
        if (dot(x, f.normal) > f.dist + tol) {
            return false;
        }
    }
    return true;
}

/// Running mean and M2 accumulators merged with Chan's pairwise update, so
/// totals do not depend on how samples are chunked.
struct MomentAccumulator
{
    std::size_t count = 0;
    Vector mean;  // of x (n) then vec(x x^T) (n*n) then |x|^2
    Vector m2;

    explicit MomentAccumulator(std::size_t dim = 0) : mean(dim, 0.0), m2(dim, 0.0) {}

    void add(std::span<const double> y)
    {
        ++count;
        const double c = static_cast<double>(count);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double delta = y[i] - mean[i];
            mean[i] += delta / c;
            m2[i] += delta * (y[i] - mean[i]);
        }
    }

    void merge(const MomentAccumulator& o)
    {
        if (o.count == 0) {
            return;
        }
        if (count == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(o.count);
        const double nt = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double delta = o.mean[i] - mean[i];
            mean[i] += delta * nb / nt;
            m2[i] += o.m2[i] + delta * delta * na * nb / nt;
        }
        count += o.count;
    }

    double standard_error(std::size_t i) const
    {
        if (count < 2) {
            return 0.0;
        }
        const double c = static_cast<double>(count);
        return std::sqrt(m2[i] / (c - 1.0) / c);
    }
};

struct OracleEstimate
{
    std::size_t samples = 0;
    std::optional<double> volume;
    std::optional<double> volume_se;
    double mean_square = 0.0;
    double mean_square_se = 0.0;
    Matrix covariance;
    Matrix covariance_se;
    Vector mean;
    Vector mean_se;
};

inline constexpr std::size_t kOracleChunk = 4096;
inline constexpr std::size_t kRejectionMaxDim = 5;

/// Monte Carlo estimates of volume (rejection from the circumscribed ball,
/// n <= 5 only), mean square and covariance (exact cone sampling), with
/// standard errors. Samples are drawn in fixed chunks, each from its own
/// stream derived from `seed` and the chunk index.
inline OracleEstimate mc_moment_oracle(const FacetComplex& fc, std::size_t samples, std::uint64_t seed,
                                       bool estimate_volume = true)
{
    const std::size_t n = fc.n;
    if (samples < 2) {
        throw domain_error("mc_moment_oracle: need at least two samples");
    }
    if (estimate_volume && n > kRejectionMaxDim) {
        throw domain_error("rejection oracle disabled at this dimension (n > 5)");
    }

    const std::size_t dim = n + n * n + 1;
    MomentAccumulator total(dim);
    MomentAccumulator hits(1);
    ConeSampler sampler(fc);

    double radius = 0.0;
    for (std::size_t p = 0; p < fc.point_count(); ++p) {
        radius = std::max(radius, norm(fc.vertex(p)));
    }

    Vector x(n);
    Vector y(dim);
    const std::size_t chunks = (samples + kOracleChunk - 1) / kOracleChunk;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t todo = std::min(kOracleChunk, samples - c * kOracleChunk);
        RngStream moments_stream = RngStream::derived(seed, {0, c});
        MomentAccumulator part(dim);
        for (std::size_t s = 0; s < todo; ++s) {
            sampler.sample(moments_stream, x);
            for (std::size_t a = 0; a < n; ++a) {
                y[a] = x[a];
                for (std::size_t b = 0; b < n; ++b) {
                    y[n + a * n + b] = x[a] * x[b];
                }
            }
            y[dim - 1] = dot(x, x);
            part.add(y);
        }
        total.merge(part);

        if (estimate_volume) {
            RngStream ball_stream = RngStream::derived(seed, {1, c});
            MomentAccumulator part_hits(1);
            for (std::size_t s = 0; s < todo; ++s) {
                const auto dir = sample_unit_vector(n, ball_stream);
                const double r = radius * std::pow(ball_stream.uniform(), 1.0 / static_cast<double>(n));
                for (std::size_t a = 0; a < n; ++a) {
                    x[a] = r * dir[a];
                }
                const double hit = contains(fc, x, 0.0) ? 1.0 : 0.0;
                part_hits.add(std::span<const double>(&hit, 1));
            }
            hits.merge(part_hits);
        }
    }

    OracleEstimate est;
    est.samples = samples;
    est.mean.resize(n);
    est.mean_se.resize(n);
    est.covariance = Matrix(n, n);
    est.covariance_se = Matrix(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        est.mean[a] = total.mean[a];
        est.mean_se[a] = total.standard_error(a);
        for (std::size_t b = 0; b < n; ++b) {
            est.covariance(a, b) = total.mean[n + a * n + b];
            est.covariance_se(a, b) = total.standard_error(n + a * n + b);
        }
    }
    est.mean_square = total.mean[dim - 1];
    est.mean_square_se = total.standard_error(dim - 1);
    if (estimate_volume) {
        const double ball = unit_ball_volume(static_cast<int>(n)) * std::pow(radius, static_cast<double>(n));
        est.volume = hits.mean[0] * ball;
        est.volume_se = hits.standard_error(0) * ball;
    }
    return est;
}

} // namespace isohull
