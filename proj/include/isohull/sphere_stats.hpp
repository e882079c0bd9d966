#pragma once

// Uniform sampling on the unit sphere S^{n-1} and closed-form statistics of
// the coordinate functionals <u, theta>.

#include "isohull/errors.hpp"
#include "isohull/linalg.hpp"
#include "isohull/rng.hpp"
#include "isohull/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace isohull {

/// A point of S^{n-1}. The only way to build one is to normalize, so the
/// norm is 1 up to rounding.
class UnitVector
{
public:
    static UnitVector normalized(Vector v)
    {
        const double len = norm(v);
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw domain_error("UnitVector: cannot normalize a zero or non-finite vector");
        }
        for (auto& x : v) {
            x /= len;
        }
        return UnitVector(std::move(v));
    }

    std::size_t dim() const noexcept { return coords_.size(); }
    std::span<const double> coords() const noexcept { return coords_; }
    double operator[](std::size_t i) const noexcept { return coords_[i]; }
    operator std::span<const double>() const noexcept { return coords_; }

private:
    explicit UnitVector(Vector v) : coords_(std::move(v)) {}
    Vector coords_;
};

/// m points in R^n stored row-major. Index i + m in the symmetrized list
/// stands for -P_i; that list is materialized only by the hull.
struct PointCloud
{
    std::size_t n = 0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::vector<double> coords;

    std::span<const double> point(std::size_t i) const noexcept { return {coords.data() + i * n, n}; }

    /// Wraps arbitrary points (not necessarily unit). Used by test paths and
    /// by transformed clouds.
    static PointCloud from_points(std::size_t n, const std::vector<Vector>& points, std::uint64_t seed = 0)
    {
        PointCloud c{n, points.size(), seed, {}};
        c.coords.reserve(n * points.size());
        for (const auto& p : points) {
            if (p.size() != n) {
                throw domain_error("PointCloud: point dimension mismatch");
            }
            c.coords.insert(c.coords.end(), p.begin(), p.end());
        }
        return c;
    }

    bool all_unit(double tol = 1e-12) const
    {
        for (std::size_t i = 0; i < m; ++i) {
            if (std::abs(norm(point(i)) - 1.0) > tol) {
                return false;
            }
        }
        return true;
    }
};

/// Gaussian vector normalized onto the sphere. A zero draw is redrawn.
inline UnitVector sample_unit_vector(std::size_t n, RngStream& stream)
{
    if (n < 1) {
        throw domain_error("sample_unit_vector: n must be >= 1");
    }
    Vector v(n);
    for (;;) {
        double sq = 0.0;
        for (auto& x : v) {
            x = stream.normal();
            sq += x * x;
        }
        if (sq > 0.0) {
            return UnitVector::normalized(std::move(v));
        }
    }
}

/// m independent uniform points of S^{n-1}, reproducible from seed.
inline PointCloud sample_symmetric_cloud(std::size_t n, std::size_t m, std::uint64_t seed)
{
    if (n < 2) {
        throw domain_error("sample_symmetric_cloud: n must be >= 2");
    }
    if (m <= n) {
        throw domain_error("insufficient points for full-dimensional symmetric hull: need m > n, got n=" +
                           std::to_string(n) + " m=" + std::to_string(m));
    }
    RngStream stream(derive_seed(seed, {}));
    PointCloud cloud{n, m, seed, {}};
    cloud.coords.reserve(n * m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto u = sample_unit_vector(n, stream);
        cloud.coords.insert(cloud.coords.end(), u.coords().begin(), u.coords().end());
    }
    return cloud;
}

/// E|<u, theta>|^q for u uniform on S^{n-1}, evaluated in log space.
inline double sphere_abs_moment(std::size_t n, double q)
{
    if (n < 2 || !(q >= 1.0)) {
        throw domain_error("sphere_abs_moment: need n >= 2 and q >= 1");
    }
    const double dn = static_cast<double>(n);
    const double log_value = std::log(2.0) + log_gamma(0.5 * (1.0 + q)) + log_gamma(1.0 + 0.5 * dn) -
                             0.5 * std::log(std::numbers::pi) - std::log(dn) - log_gamma(0.5 * (dn + q));
    return std::exp(log_value);
}

/// Density normalizer of <u, theta> on [-1, 1]: (n-1) w_{n-1} / (n w_n).
inline double sphere_marginal_constant(std::size_t n)
{
    const double dn = static_cast<double>(n);
    return std::exp(log_gamma(0.5 * dn) - log_gamma(0.5 * (dn - 1.0)) - 0.5 * std::log(std::numbers::pi));
}

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth, int min_levels)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || (min_levels <= 0 && std::abs(delta) <= 15.0 * tol)) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, min_levels - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, min_levels - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
/// The first `min_levels` bisections are unconditional so a sharply peaked
/// integrand cannot pass the error test on its coarse samples.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth = 48,
                               int min_levels = 5)
{
    if (a == b) {
        return 0.0;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, min_levels);
}

namespace detail {

// Integral of (1 - x^2)^{(n-3)/2} over [sin lo, sin hi] after x = sin t,
// i.e. of cos^{n-2} t over [lo, hi].
inline double cap_angle_integral(std::size_t n, double lo, double hi, double tol)
{
    const double power = static_cast<double>(n) - 2.0;
    return adaptive_simpson([power](double t) { return std::pow(std::cos(t), power); }, lo, hi, tol);
}

} // namespace detail

/// sigma{ u : |<u, theta>| > alpha }.
inline double cap_tail_prob(std::size_t n, double alpha)
{
    if (n < 2) {
        throw domain_error("cap_tail_prob: n must be >= 2");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw domain_error("cap_tail_prob: alpha must lie in [0, 1]");
    }
    if (alpha == 0.0) {
        return 1.0;
    }
    if (alpha == 1.0) {
        return 0.0;
    }
    const double scale = 2.0 * sphere_marginal_constant(n);
    const double integral = detail::cap_angle_integral(n, std::asin(alpha), 0.5 * std::numbers::pi, 1e-11 / scale);
    return std::clamp(scale * integral, 0.0, 1.0);
}

/// sigma{ u : |<u, theta>| <= eps }, integrated directly so that small slabs
/// keep their relative accuracy.
inline double slab_prob(std::size_t n, double eps)
{
    if (n < 2) {
        throw domain_error("slab_prob: n must be >= 2");
    }
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw domain_error("slab_prob: eps must lie in [0, 1]");
    }
    const double scale = 2.0 * sphere_marginal_constant(n);
    const double hi = std::asin(eps);
    return std::clamp(scale * detail::cap_angle_integral(n, 0.0, hi, 1e-14 * std::max(hi, 1e-300) / scale), 0.0, 1.0);
}

/// Empirical psi_2 norm: the smallest lambda with mean(exp(v^2 / lambda^2)) <= 2.
inline double psi2_norm_estimate(std::span<const double> values, double rel_tol = 1e-10)
{
    if (values.empty()) {
        throw domain_error("psi2_norm_estimate: empty sample");
    }
    double max_abs = 0.0;
    for (double v : values) {
        max_abs = std::max(max_abs, std::abs(v));
    }
    if (max_abs == 0.0) {
        return 0.0;
    }
    const auto mean_exp = [&](double lambda) {
        const double inv = 1.0 / (lambda * lambda);
        double s = 0.0;
        for (double v : values) {
            s += std::exp(v * v * inv);
        }
        return s / static_cast<double>(values.size());
    };
    // exp(max^2 / hi^2) == 2 bounds the mean, so hi is always feasible.
    double hi = max_abs / std::sqrt(std::log(2.0));
    double lo = 0.5 * hi;
    while (mean_exp(lo) <= 2.0) {
        hi = lo;
        lo *= 0.5;
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mean_exp(mid) <= 2.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

/// 2 exp(-eps^2 N / (8 A^2)).
inline double bernstein_bound(std::size_t count, double eps, double a)
{
    if (count < 1 || !(eps > 0.0) || !(a > 0.0)) {
        throw domain_error("bernstein_bound: need N >= 1, eps > 0, A > 0");
    }
    const double n = static_cast<double>(count);
    return 2.0 * std::exp(-eps * eps * n / (8.0 * a * a));
}

/// Sum over ordered pairs i != j of <P_i, P_j>, as |sum P_i|^2 - sum |P_i|^2.
inline double sum_cross_inner(std::span<const std::span<const double>> points)
{
    if (points.empty()) {
        throw domain_error("sum_cross_inner: no vectors");
    }
    const std::size_t dim = points.front().size();
    Vector total(dim, 0.0);
    double squares = 0.0;
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw domain_error("sum_cross_inner: dimension mismatch");
        }
        for (std::size_t k = 0; k < dim; ++k) {
            total[k] += p[k];
        }
        squares += dot(p, p);
    }
    return dot(total, total) - squares;
}

inline double sum_cross_inner(const std::vector<Vector>& points)
{
    std::vector<std::span<const double>> views(points.begin(), points.end());
    return sum_cross_inner(views);
}

} // namespace isohull
