#include "helpers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace isohull;
using testutil::cross_polytope;
using testutil::factorial;
using testutil::rel_err;

namespace {

Matrix to_matrix(const Eigen::MatrixXd& e)
{
    Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (int i = 0; i < e.rows(); ++i) {
        for (int j = 0; j < e.cols(); ++j) {
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
        }
    }
    return m;
}

/// U diag(s) V^T with singular values in [1, 10], so the condition number is at most 10.
Matrix random_well_conditioned(std::size_t n, RngStream& s)
{
    const auto g = [&] { return s.normal(); };
    const auto u = oracle::random_rotation(static_cast<int>(n), g);
    const auto v = oracle::random_rotation(static_cast<int>(n), g);
    Eigen::VectorXd sv(static_cast<int>(n));
    for (int i = 0; i < static_cast<int>(n); ++i) {
        sv(i) = 1.0 + 9.0 * s.uniform();
    }
    return to_matrix(u * sv.asDiagonal() * v.transpose());
}

double l_k_of(const PointCloud& c) { return isotropy_constant(summarize_moments(symmetric_hull(c))).l_k; }

double cross_polytope_l_k(std::size_t n)
{
    const double dn = static_cast<double>(n);
    return std::sqrt(2.0 / ((dn + 1) * (dn + 2))) * std::pow(factorial(n) / std::pow(2.0, dn), 1.0 / dn);
}

} // namespace

TEST(SpdCholeskyDet, SmallCases)
{
    EXPECT_NEAR(spd_cholesky_det(Matrix::identity(4)), 1.0, 1e-15);
    EXPECT_NEAR(spd_cholesky_det(Matrix::scaled_identity(2, 0.25)), 1.0 / 16.0, 1e-16);
}

TEST(SpdCholeskyDet, MatchesCofactorExpansion)
{
    RngStream s(6);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(rep) % 4;
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) = s.normal();
            }
        }
        Matrix spd = a * a.transposed();
        spd += Matrix::scaled_identity(n, 0.1);
        std::vector<std::vector<double>> rows(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                rows[i][j] = spd(i, j);
            }
        }
        EXPECT_LT(rel_err(spd_cholesky_det(spd), oracle::cofactor_det(rows)), 1e-10);
    }
}

TEST(SpdCholeskyDet, RejectsIndefinite)
{
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;
    try {
        spd_cholesky_det(a);
        FAIL();
    } catch (const degenerate_error& e) {
        EXPECT_NE(std::string(e.what()).find("not SPD"), std::string::npos);
    }
    Matrix z(3, 3);
    EXPECT_THROW(spd_cholesky_det(z), degenerate_error);
}

TEST(IsotropyConstant, Square)
{
    const auto r = isotropy_constant(2.0, Matrix::scaled_identity(2, 1.0 / 6.0));
    EXPECT_NEAR(r.l_k, 1.0 / (2.0 * std::sqrt(3.0)), 1e-15);
    EXPECT_NEAR(r.l_k, 0.288675, 1e-6);
    EXPECT_NEAR(isotropy_constant(summarize_moments(cross_polytope(2))).l_k, 1.0 / (2.0 * std::sqrt(3.0)), 1e-12);
}

TEST(IsotropyConstant, Octahedron)
{
    const auto r = isotropy_constant(4.0 / 3.0, Matrix::scaled_identity(3, 0.1));
    EXPECT_NEAR(r.l_k, std::sqrt(0.1 / std::pow(4.0 / 3.0, 2.0 / 3.0)), 1e-15);
    EXPECT_NEAR(r.l_k, 0.28731, 1e-5);
    EXPECT_NEAR(r.l_k, cross_polytope_l_k(3), 1e-14);
}

TEST(IsotropyConstant, CrossPolytopesAttainIdentityBound)
{
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto r = isotropy_constant(summarize_moments(cross_polytope(n)));
        EXPECT_LT(rel_err(r.l_k, cross_polytope_l_k(n)), 1e-10) << n;
        EXPECT_NEAR(r.l_k, r.identity_bound, 1e-12) << n;
    }
}

TEST(IsotropyConstant, BelowIdentityBoundAndStrictOffIsotropy)
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const std::size_t n = 2 + seed % 7;
        const auto m = summarize_moments(symmetric_hull(sample_symmetric_cloud(n, n + 2 + seed % 5, seed)));
        const auto r = isotropy_constant(m);
        EXPECT_GT(r.l_k, 0.0);
        EXPECT_LE(r.l_k, r.identity_bound + 1e-10);
        // random bodies are not isotropic, so the inequality is strict
        const double scale = m.covariance.trace() / static_cast<double>(n);
        if (m.covariance.max_abs_diff(Matrix::scaled_identity(n, scale)) > 1e-10) {
            EXPECT_GT(r.identity_bound - r.l_k, 1e-12);
        }
    }
}

TEST(IsotropyConstant, RejectsBadInput)
{
    EXPECT_THROW(isotropy_constant(0.0, Matrix::identity(2)), domain_error);
    Matrix bad(2, 2);
    bad(0, 0) = 1.0;
    EXPECT_THROW(isotropy_constant(1.0, bad), degenerate_error);
}

TEST(IsotropyConstant, RotationInvariant)
{
    RngStream g(12);
    for (std::size_t n : {2u, 3u, 4u, 6u}) {
        const auto cloud = sample_symmetric_cloud(n, 2 * n + 1, 40 + n);
        const double base = l_k_of(cloud);
        for (int rep = 0; rep < 3; ++rep) {
            const auto r = to_matrix(oracle::random_rotation(static_cast<int>(n), [&] { return g.normal(); }));
            EXPECT_LT(rel_err(l_k_of(testutil::transform_cloud(cloud, r)), base), 1e-10);
        }
    }
}

TEST(IsotropyConstant, AffineInvariant)
{
    RngStream g(13);
    for (std::size_t n : {2u, 3u, 4u, 5u}) {
        for (int rep = 0; rep < 4; ++rep) {
            const auto cloud = sample_symmetric_cloud(n, 3 * n, derive_seed(n, {static_cast<std::uint64_t>(rep)}));
            const double base = l_k_of(cloud);
            const auto t = random_well_conditioned(n, g);
            EXPECT_LT(rel_err(l_k_of(testutil::transform_cloud(cloud, t)), base), 1e-8);
        }
    }
}

TEST(IsotropyConstant, ClosedFormIsMinimumOverSampledMaps)
{
    RngStream g(14);
    for (std::uint64_t inst = 0; inst < 5; ++inst) {
        const std::size_t n = 2 + inst % 3;
        const auto m = summarize_moments(symmetric_hull(sample_symmetric_cloud(n, 3 * n, 500 + inst)));
        const double target = static_cast<double>(n) * std::pow(isotropy_constant(m).l_k, 2);
        for (int k = 0; k < 10000; ++k) {
            Matrix t(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    t(i, j) = g.normal();
                }
            }
            const double det = determinant(t);
            if (std::abs(det) < 1e-6) {
                continue;
            }
            t *= 1.0 / std::pow(std::abs(det), 1.0 / static_cast<double>(n)); // volume preserving
            ASSERT_LE(target, isotropic_functional(m.volume, m.covariance, t) + 1e-10);
        }
        EXPECT_NEAR(isotropic_functional(m.volume, m.covariance, Matrix::identity(n)),
                    static_cast<double>(n) * std::pow(isotropy_constant(m).identity_bound, 2), 1e-12);
    }
}

TEST(IsotropicTransform, CrossPolytopeIsScalar)
{
    for (std::size_t n = 2; n <= 5; ++n) {
        const auto cloud = testutil::axes_cloud(n);
        const auto pos = isotropic_transform(symmetric_hull(cloud), cloud);
        const double diag = pos.transform(0, 0);
        EXPECT_GT(diag, 0.0);
        EXPECT_LT(pos.transform.max_abs_diff(Matrix::scaled_identity(n, diag)), 1e-10);
    }
}

TEST(IsotropicTransform, PutsBodyInIsotropicPosition)
{
    RngStream g(15);
    for (std::size_t n : {3u, 4u, 5u}) {
        const auto cloud = sample_symmetric_cloud(n, 3 * n, 900 + n);
        const auto fc = symmetric_hull(cloud);
        const double l_k = isotropy_constant(summarize_moments(fc)).l_k;
        const auto pos = isotropic_transform(fc, cloud);
        const auto moved = summarize_moments(symmetric_hull(pos.cloud));
        EXPECT_NEAR(moved.volume, 1.0, 1e-10);
        EXPECT_LT(moved.covariance.max_abs_diff(Matrix::scaled_identity(n, l_k * l_k)), 1e-8);

        double lo = 1e300;
        double hi = 0.0;
        for (int k = 0; k < 100; ++k) {
            const auto theta = sample_unit_vector(n, g);
            const auto c_theta = moved.covariance.apply(theta.coords());
            const double q = dot(theta.coords(), c_theta) * moved.volume;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        EXPECT_LT((hi - lo) / hi, 1e-8) << n;
        EXPECT_LT(rel_err(isotropy_constant(moved).l_k, l_k), 1e-10);
    }
}

TEST(BallFallbackBound, Values)
{
    for (std::size_t n = 2; n <= 20; ++n) {
        const double dn = static_cast<double>(n);
        const double want = 4.0 / (std::sqrt(dn) * std::pow(unit_ball_volume(static_cast<int>(n)), 1.0 / dn));
        EXPECT_LT(rel_err(ball_fallback_bound(n, 0.25), want), 1e-12);
        EXPECT_TRUE(std::isfinite(want));
        EXPECT_LT(want, 4.0); // O(1) in n
        double prev = ball_fallback_bound(n, 0.01);
        for (double r = 0.02; r <= 1.0; r += 0.01) {
            const double cur = ball_fallback_bound(n, r);
            EXPECT_LT(cur, prev);
            prev = cur;
        }
    }
    EXPECT_THROW(ball_fallback_bound(3, 0.0), domain_error);
}

TEST(BallFallbackBound, BoundsComputedConstant)
{
    EXPECT_LE(cross_polytope_l_k(3), ball_fallback_bound(3, 1.0 / std::sqrt(3.0)));
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const std::size_t n = 2 + seed % 7;
        const auto m = summarize_moments(symmetric_hull(sample_symmetric_cloud(n, n + 1 + seed % 11, seed)));
        EXPECT_LE(isotropy_constant(m).l_k, ball_fallback_bound(n, m.inradius));
    }
}

TEST(Linalg, JacobiMatchesEigen)
{
    RngStream s(16);
    for (std::size_t n : {2u, 3u, 5u, 8u}) {
        Matrix a(n, n);
        Eigen::MatrixXd e(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = s.normal();
                a(i, j) = a(j, i) = v;
                e(i, j) = e(j, i) = v;
            }
        }
        auto got = jacobi_eigen(a).values;
        std::sort(got.begin(), got.end());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(got[i], solver.eigenvalues()(static_cast<int>(i)), 1e-10);
        }
        Matrix spd = a * a.transposed();
        spd += Matrix::identity(n);
        const auto r = inverse_sqrt_spd(spd);
        EXPECT_LT((r * spd * r).max_abs_diff(Matrix::identity(n)), 1e-10);
        EXPECT_LT(rel_err(determinant(spd), (e * e.transpose() + Eigen::MatrixXd::Identity(n, n)).determinant()), 1e-10);
    }
}
