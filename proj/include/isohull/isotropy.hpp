#pragma once

// Isotropy constant L_K of a centred convex body from its volume and
// covariance, and the linear map that puts the body in isotropic position.
//
// For a centred body, n L_K^2 = min over T in GL(n) of
//   |TK|^{-1-2/n} \int_{TK} |x|^2 dx,
// and the minimum equals n det(Cov)^{1/n} / |K|^{2/n}; T = I gives the upper
// bound trace(Cov) / |K|^{2/n}.

#include "isohull/errors.hpp"
#include "isohull/hull.hpp"
#include "isohull/linalg.hpp"
#include "isohull/moments.hpp"
#include "isohull/special.hpp"

#include <cmath>

namespace isohull {

struct IsotropyReport
{
    double l_k = 0.0;
    double identity_bound = 0.0;
    double vol_root = 0.0; // |K|^{1/n}
    double det_cov = 0.0;
};

/// Determinant of a symmetric positive-definite matrix from its Cholesky
/// factor. Throws degenerate_error("not SPD ...") otherwise.
inline double spd_cholesky_det(const Matrix& a)
{
    const Matrix l = cholesky(a);
    double det = 1.0;
    for (std::size_t i = 0; i < l.rows(); ++i) {
        det *= l(i, i);
    }
    return det * det;
}

inline IsotropyReport isotropy_constant(double volume, const Matrix& covariance)
{
    if (!(volume > 0.0)) {
        throw domain_error("isotropy_constant: volume must be positive");
    }
    const double n = static_cast<double>(covariance.rows());
    IsotropyReport r;
    r.det_cov = spd_cholesky_det(covariance);
    r.vol_root = std::pow(volume, 1.0 / n);
    const double vol_2n = r.vol_root * r.vol_root;
    r.l_k = std::sqrt(std::pow(r.det_cov, 1.0 / n) / vol_2n);
    r.identity_bound = std::sqrt(covariance.trace() / (n * vol_2n));
    return r;
}

inline IsotropyReport isotropy_constant(const MomentSummary& m) { return isotropy_constant(m.volume, m.covariance); }

/// |TK|^{-1-2/n} \int_{TK} |x|^2 for a linear T, from K's volume and
/// covariance: trace(T Cov T^T) / (|det T| |K|)^{2/n}.
inline double isotropic_functional(double volume, const Matrix& covariance, const Matrix& t)
{
    const double n = static_cast<double>(covariance.rows());
    const Matrix c = t * covariance * t.transposed();
    const double scaled_volume = std::abs(determinant(t)) * volume;
    return c.trace() / std::pow(scaled_volume, 2.0 / n);
}

struct IsotropicPosition
{
    Matrix transform; // c Cov^{-1/2}
    PointCloud cloud; // T applied to the base points
};

/// T = c Cov^{-1/2} with c chosen so |TK| = 1. Symmetric square root, so the
/// rotation part is the identity.
inline IsotropicPosition isotropic_transform(const FacetComplex& fc, const PointCloud& cloud)
{
    const double volume = polytope_volume(fc);
    const Matrix cov = polytope_covariance(fc);
    const double det = spd_cholesky_det(cov);
    const double n = static_cast<double>(fc.n);
    const double c = std::pow(std::sqrt(det) / volume, 1.0 / n);
    Matrix t = inverse_sqrt_spd(cov);
    t *= c;

    PointCloud out{cloud.n, cloud.m, cloud.seed, {}};
    out.coords.reserve(cloud.coords.size());
    for (std::size_t i = 0; i < cloud.m; ++i) {
        const auto y = t.apply(cloud.point(i));
        out.coords.insert(out.coords.end(), y.begin(), y.end());
    }
    return {std::move(t), std::move(out)};
}

/// Upper bound on L_K implied by rB_2^n being contained in K:
/// n L_K^2 <= |rB_2^n|^{-2/n}.
inline double ball_fallback_bound(std::size_t n, double inradius)
{
    if (!(inradius > 0.0)) {
        throw domain_error("ball_fallback_bound: inradius must be positive");
    }
    const double dn = static_cast<double>(n);
    const double log_ball = log_unit_ball_volume(static_cast<int>(n)) + dn * std::log(inradius);
    return std::sqrt(std::exp(-2.0 / dn * log_ball) / dn);
}

} // namespace isohull
