#include "helpers.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace isohull;
using testutil::source_path;

namespace {

harness::Fixture fixture() { return harness::load_fixture(source_path("fixtures/calibration.json")); }

// E|t|^q for the first coordinate of a uniform point of S^{n-1}, integrating
// the marginal density Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2)) (1-t^2)^{(n-3)/2}.
double abs_moment_by_quadrature(std::size_t n, double q)
{
    const double dn = static_cast<double>(n);
    const double c = boost::math::tgamma(dn / 2) / (std::sqrt(std::numbers::pi) * boost::math::tgamma((dn - 1) / 2));
    boost::math::quadrature::tanh_sinh<double> integrator;
    // t = sin(phi) removes the endpoint singularity at n = 2; the kink of |t|^q at 0 is kept at an endpoint
    const double v = integrator.integrate(
        [&](double phi) { return std::pow(std::sin(phi), q) * std::pow(std::cos(phi), dn - 2); }, 0.0,
        std::numbers::pi / 2, 1e-14);
    return 2.0 * c * v;
}

// sigma{|<u,theta>| > alpha} = I_{1-alpha^2}((n-1)/2, 1/2)
double cap_by_incomplete_beta(std::size_t n, double alpha)
{
    return boost::math::ibeta((static_cast<double>(n) - 1) / 2, 0.5, 1 - alpha * alpha);
}

} // namespace

TEST(SampleUnitVector, UnitNorm)
{
    RngStream s(3);
    for (std::size_t n : {1u, 2u, 3u, 8u, 64u}) {
        for (int i = 0; i < 1000; ++i) {
            const auto v = sample_unit_vector(n, s);
            ASSERT_EQ(v.dim(), n);
            ASSERT_NEAR(norm(v.coords()), 1.0, 1e-12);
        }
    }
    EXPECT_THROW(sample_unit_vector(0, s), domain_error);
}

TEST(SampleUnitVector, SecondMomentIsOneOverN)
{
    RngStream s(17);
    constexpr int kDraws = 100000;
    const auto u = UnitVector::normalized({1.0, -2.0, 0.5, 3.0, 1.0});
    const Vector theta(u.coords().begin(), u.coords().end());
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        const double x = std::pow(dot(sample_unit_vector(5, s), theta), 2);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / kDraws;
    const double se = std::sqrt((sq / kDraws - mean * mean) / kDraws);
    EXPECT_LT(std::abs(mean - 0.2), 4 * se);
}

TEST(SampleUnitVector, HalfCapFrequencyInThreeDimensions)
{
    RngStream s(23);
    constexpr int kDraws = 100000;
    const Vector theta = {0.0, 0.6, 0.8};
    for (double alpha : {0.1, 0.25, 0.5, 0.9}) {
        int hits = 0;
        for (int i = 0; i < kDraws; ++i) {
            if (dot(sample_unit_vector(3, s), theta) > alpha) {
                ++hits;
            }
        }
        const double p = (1.0 - alpha) / 2.0;
        EXPECT_NEAR(static_cast<double>(hits) / kDraws, p, 4 * std::sqrt(p * (1 - p) / kDraws)) << alpha;
        EXPECT_NEAR(cap_tail_prob(3, alpha) / 2.0, p, 1e-12);
    }
}

TEST(SampleUnitVector, RotationInvariantInDistribution)
{
    constexpr int kDraws = 100000;
    for (std::size_t n : {3u, 6u}) {
        RngStream s(31 + n);
        RngStream g(77 + n);
        const auto rot = oracle::random_rotation(static_cast<int>(n), [&] { return g.normal(); });
        std::vector<double> plain;
        std::vector<double> rotated;
        for (int i = 0; i < kDraws; ++i) {
            const auto v = sample_unit_vector(n, s);
            plain.push_back(v[0]);
            const auto w = sample_unit_vector(n, s);
            double rw0 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                rw0 += rot(0, static_cast<int>(k)) * w[k];
            }
            rotated.push_back(rw0);
        }
        // two-sample KS critical value at two-sided level 6.3e-5 (4 sigma)
        const double crit = std::sqrt(-0.5 * std::log(6.3e-5 / 2)) * std::sqrt(2.0 / kDraws);
        EXPECT_LT(oracle::ks_statistic(plain, rotated), crit) << n;
    }
}

TEST(SampleSymmetricCloud, Deterministic)
{
    const auto a = sample_symmetric_cloud(3, 10, 42);
    const auto b = sample_symmetric_cloud(3, 10, 42);
    EXPECT_EQ(a.coords, b.coords);
    EXPECT_EQ(a.m, 10u);
    EXPECT_TRUE(a.all_unit(1e-12));
    EXPECT_NE(a.coords, sample_symmetric_cloud(3, 10, 43).coords);
}

TEST(SampleSymmetricCloud, RejectsTooFewPoints)
{
    EXPECT_THROW(sample_symmetric_cloud(3, 2, 1), domain_error);
    EXPECT_THROW(sample_symmetric_cloud(3, 3, 1), domain_error);
    EXPECT_THROW(sample_symmetric_cloud(1, 5, 1), domain_error);
    try {
        sample_symmetric_cloud(3, 2, 1);
    } catch (const domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient points"), std::string::npos);
    }
}

TEST(SampleSymmetricCloud, PooledCoordinateMeansVanish)
{
    std::vector<double> sum(4, 0.0);
    std::vector<double> sq(4, 0.0);
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto c = sample_symmetric_cloud(4, 20, seed);
        for (std::size_t i = 0; i < c.m; ++i) {
            for (std::size_t k = 0; k < 4; ++k) {
                sum[k] += c.point(i)[k];
                sq[k] += c.point(i)[k] * c.point(i)[k];
            }
            ++count;
        }
    }
    for (std::size_t k = 0; k < 4; ++k) {
        const double mean = sum[k] / count;
        const double se = std::sqrt((sq[k] / count - mean * mean) / count);
        EXPECT_LT(std::abs(mean), 4 * se) << k;
    }
}

TEST(SphereAbsMoment, SecondMomentIsOneOverN)
{
    for (std::size_t n = 2; n <= 50; ++n) {
        EXPECT_NEAR(sphere_abs_moment(n, 2.0), 1.0 / static_cast<double>(n), 1e-13) << n;
    }
}

TEST(SphereAbsMoment, FirstMomentClosedForms)
{
    EXPECT_NEAR(sphere_abs_moment(2, 1.0), 2.0 / std::numbers::pi, 1e-14);
    EXPECT_NEAR(sphere_abs_moment(3, 1.0), 0.5, 1e-14);
    boost::math::quadrature::tanh_sinh<double> integrator;
    // quarter period, so |cos| has no kink inside the interval
    const double circle =
        4.0 * integrator.integrate([](double phi) { return std::cos(phi); }, 0.0, std::numbers::pi / 2, 1e-14) /
        (2 * std::numbers::pi);
    EXPECT_NEAR(sphere_abs_moment(2, 1.0), circle, 1e-12);
}

TEST(SphereAbsMoment, MatchesQuadratureOracle)
{
    for (std::size_t n : {2u, 3u, 5u, 8u, 17u, 40u}) {
        for (double q : {1.0, 1.5, 2.0, 3.0, 4.5, 8.0}) {
            EXPECT_NEAR(sphere_abs_moment(n, q), abs_moment_by_quadrature(n, q), 1e-11) << n << " " << q;
        }
    }
}

TEST(SphereAbsMoment, OverflowSafe)
{
    for (std::size_t n : {100u, 1000u, 10000u}) {
        for (double q : {1.0, 100.0, 10000.0}) {
            const double v = sphere_abs_moment(n, q);
            EXPECT_TRUE(std::isfinite(v));
            EXPECT_GE(v, 0.0);
        }
    }
    EXPECT_NEAR(sphere_abs_moment(10000, 2.0), 1e-4, 1e-15);
    EXPECT_THROW(sphere_abs_moment(1, 2.0), domain_error);
    EXPECT_THROW(sphere_abs_moment(3, 0.5), domain_error);
}

TEST(SphereAbsMoment, StirlingBandFromFixture)
{
    const auto f = fixture();
    EXPECT_GT(f.moment_band_lo, 0.0);
    EXPECT_LE(f.moment_band_hi / f.moment_band_lo, 4.0);
    for (std::size_t n = 2; n <= 64; ++n) {
        for (int q = 1; q <= 64; ++q) {
            const double r = std::pow(sphere_abs_moment(n, q), 1.0 / q) / std::sqrt(q / (q + static_cast<double>(n)));
            EXPECT_GE(r, f.moment_band_lo);
            EXPECT_LE(r, f.moment_band_hi);
        }
    }
}

TEST(CapTailProb, Endpoints)
{
    for (std::size_t n : {2u, 3u, 10u, 64u}) {
        EXPECT_EQ(cap_tail_prob(n, 0.0), 1.0);
        EXPECT_EQ(cap_tail_prob(n, 1.0), 0.0);
    }
    EXPECT_THROW(cap_tail_prob(3, -0.1), domain_error);
    EXPECT_THROW(cap_tail_prob(3, 1.1), domain_error);
}

TEST(CapTailProb, ClosedFormsInLowDimension)
{
    for (double a : {0.1, 0.25, 0.5}) {
        EXPECT_NEAR(cap_tail_prob(3, a), 1.0 - a, 1e-10);
    }
    for (double a : {0.05, 0.1, 0.3, 0.5, 0.7, 0.99}) {
        EXPECT_NEAR(cap_tail_prob(2, a), 1.0 - 2.0 / std::numbers::pi * std::asin(a), 1e-10);
    }
}

TEST(CapTailProb, MatchesIncompleteBeta)
{
    for (std::size_t n : {2u, 3u, 4u, 7u, 16u, 33u, 64u}) {
        for (double a = 0.01; a < 1.0; a += 0.07) {
            EXPECT_NEAR(cap_tail_prob(n, a), cap_by_incomplete_beta(n, a), 1e-10) << n << " " << a;
        }
    }
}

TEST(CapTailProb, StrictlyDecreasing)
{
    for (std::size_t n : {2u, 5u, 20u}) {
        double prev = cap_tail_prob(n, 0.0);
        for (int k = 1; k <= 100; ++k) {
            const double cur = cap_tail_prob(n, k / 100.0);
            EXPECT_LT(cur, prev) << n << " " << k;
            prev = cur;
        }
    }
}

TEST(CapTailProb, MatchesEmpiricalFrequency)
{
    constexpr int kDraws = 100000;
    for (std::size_t n : {4u, 9u}) {
        RngStream s(101 + n);
        std::vector<double> first;
        for (int i = 0; i < kDraws; ++i) {
            first.push_back(std::abs(sample_unit_vector(n, s)[0]));
        }
        for (double a : {0.05, 0.2, 0.4, 0.7}) {
            const double p = cap_tail_prob(n, a);
            const double freq =
                static_cast<double>(std::count_if(first.begin(), first.end(), [&](double x) { return x > a; })) / kDraws;
            EXPECT_NEAR(freq, p, 4 * std::sqrt(p * (1 - p) / kDraws)) << n << " " << a;
        }
    }
}

TEST(SmallCap, SlabBoundedByFittedConstant)
{
    const double c = fixture().small_cap_c;
    EXPECT_GT(c, 0.0);
    for (std::size_t n = 2; n <= 64; ++n) {
        const double top = 1.0 / std::sqrt(static_cast<double>(n));
        for (double frac : {1e-6, 1e-3, 0.01, 0.1, 0.37, 0.5, 0.8, 1.0}) {
            const double eps = frac * top;
            EXPECT_LE(1.0 - cap_tail_prob(n, eps), c * std::sqrt(static_cast<double>(n)) * eps + 1e-10) << n << " " << eps;
            EXPECT_LE(slab_prob(n, eps), c * std::sqrt(static_cast<double>(n)) * eps) << n << " " << eps;
        }
    }
}

TEST(SlabProb, ComplementsCap)
{
    for (std::size_t n : {2u, 5u, 30u}) {
        for (double e : {0.01, 0.2, 0.6}) {
            EXPECT_NEAR(slab_prob(n, e) + cap_tail_prob(n, e), 1.0, 1e-10);
        }
    }
}

TEST(Psi2, ClosedForms)
{
    const std::vector<double> zeros(50, 0.0);
    EXPECT_EQ(psi2_norm_estimate(zeros), 0.0);
    const std::vector<double> ones(50, 1.0);
    EXPECT_NEAR(psi2_norm_estimate(ones), 1.0 / std::sqrt(std::log(2.0)), 1e-8);
    EXPECT_NEAR(psi2_norm_estimate(ones), 1.20112, 1e-5);
    const std::vector<double> signs = {1.0, -1.0, 1.0, -1.0};
    EXPECT_NEAR(psi2_norm_estimate(signs), 1.0 / std::sqrt(std::log(2.0)), 1e-8);
    EXPECT_THROW(psi2_norm_estimate(std::vector<double>{}), domain_error);
}

TEST(Psi2, DefiningInequalityAtEstimate)
{
    RngStream s(5);
    std::vector<double> v;
    for (int i = 0; i < 5000; ++i) {
        v.push_back(s.normal());
    }
    const double lam = psi2_norm_estimate(v);
    const auto mean_exp = [&](double l) {
        double acc = 0.0;
        for (double x : v) {
            acc += std::exp(x * x / (l * l));
        }
        return acc / v.size();
    };
    EXPECT_LE(mean_exp(lam), 2.0);
    EXPECT_GT(mean_exp(lam * (1 - 1e-6)), 2.0);
}

TEST(Psi2, PositivelyHomogeneous)
{
    RngStream s(9);
    std::vector<double> v;
    for (int i = 0; i < 2000; ++i) {
        v.push_back(s.normal() * 0.7 + 0.1);
    }
    const double base = psi2_norm_estimate(v);
    for (double t : {0.01, 0.5, 3.0, 250.0}) {
        std::vector<double> w(v);
        for (auto& x : w) {
            x *= t;
        }
        EXPECT_NEAR(psi2_norm_estimate(w), t * base, 1e-6 * t * base) << t;
    }
}

TEST(Psi2, CoordinateFunctionalBoundedByFittedConstant)
{
    const auto f = fixture();
    for (std::size_t n : harness::kPsi2Dims) {
        // fresh draws, independent of the calibration sample
        const auto v = harness::coordinate_functional_sample(n, harness::kPsi2Draws, derive_seed(0x7E57, {n}));
        EXPECT_LE(psi2_norm_estimate(v), f.psi2_a_hat) << n;
        EXPECT_LE(f.psi2_estimates.at(n), f.psi2_a_hat);
    }
}

TEST(Bernstein, ClosedForms)
{
    EXPECT_NEAR(bernstein_bound(100, 1e-9, 1.0), 2.0, 1e-12);
    // eps^2 N = 8 A^2
    EXPECT_NEAR(bernstein_bound(8, 1.0, 1.0), 2.0 / std::exp(1.0), 1e-15);
    EXPECT_NEAR(bernstein_bound(32, 1.0, 2.0), 0.73576, 1e-5);
    EXPECT_NEAR(bernstein_bound(100, 0.5, 1.0), 2.0 * std::exp(-25.0 / 8.0), 1e-15);
    EXPECT_NEAR(bernstein_bound(100, 0.5, 1.0), 0.08787, 1e-5);
    EXPECT_THROW(bernstein_bound(0, 0.5, 1.0), domain_error);
}

TEST(Bernstein, EmpiricalTailsStayBelowBound)
{
    const double a_hat = fixture().psi2_a_hat;
    for (std::size_t n : {2u, 8u, 32u}) {
        for (std::size_t count : {10u, 50u, 200u}) {
            for (double eps : {0.25, 0.5, 1.0}) {
                const auto t = harness::bernstein_tail_check(n, count, eps, 2000, derive_seed(0xB0B, {n, count}), a_hat);
                EXPECT_LE(t.empirical, t.bound) << n << " " << count << " " << eps;
            }
        }
    }
}

TEST(SumCrossInner, SmallCases)
{
    EXPECT_NEAR(sum_cross_inner(std::vector<Vector>{{1, 0, 0}, {0, 1, 0}}), 0.0, 1e-15);
    const auto v = UnitVector::normalized({0.3, -0.4, 2.0});
    const Vector vv(v.coords().begin(), v.coords().end());
    EXPECT_NEAR(sum_cross_inner(std::vector<Vector>{vv, vv}), 2.0, 1e-15);
    EXPECT_NEAR(sum_cross_inner(std::vector<Vector>{vv}), 0.0, 1e-15);
    EXPECT_THROW(sum_cross_inner(std::vector<Vector>{{1, 0}, {1, 0, 0}}), domain_error);
    EXPECT_THROW(sum_cross_inner(std::vector<Vector>{}), domain_error);
}

TEST(SumCrossInner, MatchesDoubleLoop)
{
    RngStream s(2024);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Vector> pts;
        for (int i = 0; i < 10; ++i) {
            Vector p(6);
            for (auto& x : p) {
                x = s.normal();
            }
            pts.push_back(p);
        }
        EXPECT_NEAR(sum_cross_inner(pts), oracle::double_loop_cross(pts), 1e-12 * std::max(1.0, std::abs(oracle::double_loop_cross(pts))));
    }
}
