#pragma once

#include "isohull/errors.hpp"
#include "isohull/hull.hpp"
#include "isohull/isotropy.hpp"
#include "isohull/moments.hpp"
#include "isohull/rng.hpp"
#include "isohull/sphere_stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace isohull::harness {

inline constexpr int kMaxResamples = 8;

/// Oracle minus exact, in units of the oracle's standard error.
struct OracleDeltas
{
    std::size_t samples = 0;
    std::optional<double> volume_z;
    double mean_square_z = 0.0;
    double covariance_max_abs_z = 0.0;

    double max_abs_z() const
    {
        double worst = std::max(std::abs(mean_square_z), covariance_max_abs_z);
        if (volume_z) {
            worst = std::max(worst, std::abs(*volume_z));
        }
        return worst;
    }
};

struct TrialRecord
{
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double l_k = 0.0;
    double identity_bound = 0.0;
    double vol_root = 0.0;
    double inradius = 0.0;
    double mean_square = 0.0;
    double max_facet_cross = 0.0;
    std::size_t facet_count = 0;
    std::size_t resampled = 0;
    double wall_time_ms = 0.0;

    std::optional<OracleDeltas> oracle; // not part of the flat record files

    friend bool operator==(const TrialRecord& a, const TrialRecord& b)
    {
        return a.n == b.n && a.m == b.m && a.trial == b.trial && a.seed == b.seed && a.l_k == b.l_k &&
               a.identity_bound == b.identity_bound && a.vol_root == b.vol_root && a.inradius == b.inradius &&
               a.mean_square == b.mean_square && a.max_facet_cross == b.max_facet_cross &&
               a.facet_count == b.facet_count && a.resampled == b.resampled && a.wall_time_ms == b.wall_time_ms;
    }
};

struct TrialOptions
{
    std::size_t trial_index = 0;
    std::size_t oracle_samples = 0;
    bool record_timings = true;
};

/// Seed of re-draw `attempt` for a trial seed; attempt 0 is the seed itself.
inline std::uint64_t attempt_seed(std::uint64_t seed, int attempt)
{
    return attempt == 0 ? seed : derive_seed(seed, {static_cast<std::uint64_t>(attempt)});
}

/// Maximum over facets of sum_{i != j} <Q_i, Q_j>.
inline double max_facet_cross(const FacetComplex& fc)
{
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < fc.facets.size(); ++f) {
        best = std::max(best, sum_cross_inner(fc.facet_vertices(f)));
    }
    return best;
}

/// Builds the (possibly re-drawn) sample for a trial and its hull.
struct TrialSample
{
    PointCloud cloud;
    FacetComplex complex;
    std::size_t resampled = 0;
};

inline TrialSample build_trial_sample(std::size_t n, std::size_t m, std::uint64_t seed)
{
    std::string last_error;
    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        auto cloud = sample_symmetric_cloud(n, m, attempt_seed(seed, attempt));
        try {
            auto fc = symmetric_hull(cloud);
            return {std::move(cloud), std::move(fc), static_cast<std::size_t>(attempt)};
        } catch (const degenerate_error& e) {
            last_error = e.what();
        }
    }
    throw degenerate_error("trial failed after " + std::to_string(kMaxResamples) + " re-draws: " + last_error);
}

/// sample -> hull -> validate -> moments -> isotropy for one random body.
/// Deterministic in (n, m, seed) apart from wall_time_ms.
inline TrialRecord run_trial(std::size_t n, std::size_t m, std::uint64_t seed, const TrialOptions& opt = {})
{
    const auto start = std::chrono::steady_clock::now();
    auto sample = build_trial_sample(n, m, seed);
    const auto& fc = sample.complex;

    const auto report = validate_complex(fc);
    if (!report.ok()) {
        std::string failed;
        for (const auto& c : report.checks) {
            if (!c.passed) {
                failed += (failed.empty() ? "" : ", ") + c.name;
            }
        }
        throw numerical_error("hull validation failed (" + failed + ")");
    }

    const double volume = polytope_volume(fc);
    const Matrix cov = polytope_covariance(fc);
    const double mean_square = polytope_mean_square(fc);
    if (std::abs(cov.trace() - mean_square) > 1e-10 * mean_square) {
        throw numerical_error("trace(covariance) disagrees with the facet mean square");
    }
    const auto iso = isotropy_constant(volume, cov);
    if (!(iso.l_k > 0.0) || iso.l_k > iso.identity_bound + 1e-10) {
        throw numerical_error("isotropy constant exceeds the identity bound");
    }

    TrialRecord r;
    r.n = n;
    r.m = m;
    r.trial = opt.trial_index;
    r.seed = seed;
    r.l_k = iso.l_k;
    r.identity_bound = iso.identity_bound;
    r.vol_root = iso.vol_root;
    r.inradius = inradius(fc);
    r.mean_square = mean_square;
    r.max_facet_cross = max_facet_cross(fc);
    r.facet_count = fc.facets.size();
    r.resampled = sample.resampled;

    if (opt.oracle_samples > 0) {
        const bool with_volume = n <= kRejectionMaxDim;
        const auto est = mc_moment_oracle(fc, opt.oracle_samples, derive_seed(seed, {0x0AC1Eu}), with_volume);
        OracleDeltas d;
        d.samples = opt.oracle_samples;
        if (with_volume) {
            d.volume_z = (*est.volume - volume) / *est.volume_se;
        }
        d.mean_square_z = (est.mean_square - mean_square) / est.mean_square_se;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                const double z = (est.covariance(a, b) - cov(a, b)) / est.covariance_se(a, b);
                d.covariance_max_abs_z = std::max(d.covariance_max_abs_z, std::abs(z));
            }
        }
        r.oracle = d;
    }

    if (opt.record_timings) {
        r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return r;
}

} // namespace isohull::harness
