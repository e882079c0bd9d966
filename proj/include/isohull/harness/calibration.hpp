#pragma once

// Fit-and-freeze constants. The bounds being checked only assert that some
// constants exist, so values are measured on a pilot run and checked in as a
// fixture; tests then assert against the fixture.

#include "isohull/errors.hpp"
#include "isohull/harness/config.hpp"
#include "isohull/harness/experiment.hpp"
#include "isohull/sphere_stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace isohull::harness {

inline constexpr std::array<std::size_t, 4> kPsi2Dims = {2, 8, 32, 64};
inline constexpr std::size_t kPsi2Draws = 100000;
inline constexpr std::size_t kCempMinN = 4;
inline constexpr std::uint64_t kPilotLabel = 0xCA11B;

/// sqrt(n) <P, e_1> for `draws` uniform points of S^{n-1}.
inline std::vector<double> coordinate_functional_sample(std::size_t n, std::size_t draws, std::uint64_t seed)
{
    RngStream stream(seed);
    std::vector<double> v(draws);
    const double root_n = std::sqrt(static_cast<double>(n));
    for (auto& x : v) {
        x = root_n * sample_unit_vector(n, stream)[0];
    }
    return v;
}

/// Largest sigma{|<u, theta>| <= eps} / (sqrt(n) eps) over n in {2..64} and
/// eps in (0, 1/sqrt(n)]. The ratio decreases in eps, so the eps -> 0 limit
/// 2 c_n / sqrt(n) (c_n the marginal density at 0) is included.
inline double fit_small_cap_constant()
{
    double worst = 0.0;
    for (std::size_t n = 2; n <= 64; ++n) {
        const double top = 1.0 / std::sqrt(static_cast<double>(n));
        worst = std::max(worst, 2.0 * sphere_marginal_constant(n) * top);
        for (int k = 1; k <= 20; ++k) {
            const double eps = top * k / 20.0;
            worst = std::max(worst, slab_prob(n, eps) / (std::sqrt(static_cast<double>(n)) * eps));
        }
    }
    return worst;
}

/// Range of (E|<u,theta>|^q)^{1/q} / sqrt(q/(q+n)) over n in {2..64}, q in {1..64}.
inline std::pair<double, double> fit_moment_band()
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t n = 2; n <= 64; ++n) {
        for (int q = 1; q <= 64; ++q) {
            const double dq = q;
            const double r = std::pow(sphere_abs_moment(n, dq), 1.0 / dq) / std::sqrt(dq / (dq + static_cast<double>(n)));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    return {lo, hi};
}

struct CempBand
{
    double ratio = 0.0;
    std::size_t n_min = kCempMinN;
    double lo = 0.0;
    double hi = 0.0;
};

struct CellCount
{
    std::size_t n = 0, m = 0, violations = 0;
};

struct Fixture
{
    std::uint64_t config_hash = 0;
    std::uint64_t reference_seed = 0; // campaign seed the violation counts belong to
    std::uint64_t pilot_seed = 0; // independent seed used for the fitted thresholds
    std::size_t trials = 0;

    double psi2_a_hat = 0.0;
    std::map<std::size_t, double> psi2_estimates;
    double small_cap_c = 0.0;
    double moment_band_lo = 0.0;
    double moment_band_hi = 0.0;
    double c_star = 0.0;
    double pilot_l_k_max = 0.0;
    std::vector<CempBand> cemp_bands;
    std::vector<CellCount> inradius_violations;
};

/// Per-ratio band of C_emp across cells with n >= n_min, widened by `slack`
/// on each side but never wider than a factor of two overall.
inline std::vector<CempBand> fit_cemp_bands(const SecondMomentReport& rep, const std::vector<Cell>& cells,
                                            double slack = 1.1)
{
    std::map<double, std::pair<double, double>> by_ratio;
    for (const auto& c : rep.cells) {
        const auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& x) { return x.n == c.n && x.m == c.m; });
        if (it == cells.end() || !it->ratio || c.n < kCempMinN) {
            continue;
        }
        auto [slot, inserted] = by_ratio.try_emplace(*it->ratio, c.c_emp, c.c_emp);
        if (!inserted) {
            slot->second.first = std::min(slot->second.first, c.c_emp);
            slot->second.second = std::max(slot->second.second, c.c_emp);
        }
    }
    std::vector<CempBand> out;
    for (const auto& [ratio, range] : by_ratio) {
        const double spread = range.second / range.first;
        const double s = std::min(slack, std::sqrt(std::max(2.0 / spread, 1.0)));
        out.push_back({ratio, kCempMinN, range.first / s, range.second * s});
    }
    return out;
}

/// Cells of `rep` whose C_emp falls outside the band for their ratio.
inline std::vector<SecondMomentCellReport> cemp_band_violations(const SecondMomentReport& rep,
                                                                const std::vector<Cell>& cells,
                                                                const std::vector<CempBand>& bands)
{
    std::vector<SecondMomentCellReport> bad;
    for (const auto& c : rep.cells) {
        const auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& x) { return x.n == c.n && x.m == c.m; });
        if (it == cells.end() || !it->ratio) {
            continue;
        }
        for (const auto& b : bands) {
            if (b.ratio == *it->ratio && c.n >= b.n_min && (c.c_emp < b.lo || c.c_emp > b.hi)) {
                bad.push_back(c);
            }
        }
    }
    return bad;
}

inline nlohmann::json to_json(const Fixture& f)
{
    nlohmann::json psi2 = nlohmann::json::object();
    for (const auto& [n, v] : f.psi2_estimates) {
        psi2[std::to_string(n)] = v;
    }
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : f.cemp_bands) {
        bands.push_back({{"ratio", b.ratio}, {"n_min", b.n_min}, {"lo", b.lo}, {"hi", b.hi}});
    }
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& c : f.inradius_violations) {
        counts.push_back({{"n", c.n}, {"m", c.m}, {"violations", c.violations}});
    }
    return {{"provenance",
             {{"config_hash", f.config_hash},
              {"reference_seed", f.reference_seed},
              {"pilot_seed", f.pilot_seed},
              {"trials", f.trials},
              {"psi2_draws", kPsi2Draws}}},
            {"psi2_a_hat", f.psi2_a_hat},
            {"psi2_estimates", psi2},
            {"small_cap_c", f.small_cap_c},
            {"moment_band", {f.moment_band_lo, f.moment_band_hi}},
            {"c_star", f.c_star},
            {"pilot_l_k_max", f.pilot_l_k_max},
            {"cemp_bands", bands},
            {"inradius_violations", counts}};
}

inline Fixture fixture_from_json(const nlohmann::json& j)
{
    Fixture f;
    const auto& p = j.at("provenance");
    f.config_hash = p.at("config_hash").get<std::uint64_t>();
    f.reference_seed = p.at("reference_seed").get<std::uint64_t>();
    f.pilot_seed = p.at("pilot_seed").get<std::uint64_t>();
    f.trials = p.at("trials").get<std::size_t>();
    f.psi2_a_hat = j.at("psi2_a_hat").get<double>();
    for (const auto& [k, v] : j.at("psi2_estimates").items()) {
        f.psi2_estimates[std::stoul(k)] = v.get<double>();
    }
    f.small_cap_c = j.at("small_cap_c").get<double>();
    f.moment_band_lo = j.at("moment_band").at(0).get<double>();
    f.moment_band_hi = j.at("moment_band").at(1).get<double>();
    f.c_star = j.at("c_star").get<double>();
    f.pilot_l_k_max = j.at("pilot_l_k_max").get<double>();
    for (const auto& b : j.at("cemp_bands")) {
        f.cemp_bands.push_back(
            {b.at("ratio").get<double>(), b.at("n_min").get<std::size_t>(), b.at("lo").get<double>(), b.at("hi").get<double>()});
    }
    for (const auto& c : j.at("inradius_violations")) {
        f.inradius_violations.push_back(
            {c.at("n").get<std::size_t>(), c.at("m").get<std::size_t>(), c.at("violations").get<std::size_t>()});
    }
    return f;
}

inline Fixture load_fixture(const std::filesystem::path& path)
{
    try {
        return fixture_from_json(nlohmann::json::parse(read_text(path)));
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string(), std::string("malformed fixture: ") + e.what());
    }
}

inline void save_fixture(const Fixture& f, const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    write_text(path, to_json(f).dump(2) + "\n");
}

/// Rounds up to `digits` decimals so fixtures read cleanly.
inline double round_up(double v, int digits)
{
    const double s = std::pow(10.0, digits);
    return std::ceil(v * s) / s;
}

inline double round_down(double v, int digits)
{
    const double s = std::pow(10.0, digits);
    return std::floor(v * s) / s;
}

/// Runs the pilot campaign (config with a derived seed) for the fitted
/// thresholds and the reference campaign (config as given) for the exact
/// violation counts.
inline Fixture calibrate(const ExperimentConfig& config, const RunOptions& opt = {},
                         const std::function<void(const std::string&)>& log = {})
{
    const auto say = [&](const std::string& s) {
        if (log) {
            log(s);
        }
    };
    Fixture f;
    f.config_hash = config_hash(config);
    f.reference_seed = config.master_seed;
    f.pilot_seed = derive_seed(config.master_seed, {kPilotLabel});
    f.trials = config.trials;

    double psi2_max = 0.0;
    for (std::size_t n : kPsi2Dims) {
        const auto v = coordinate_functional_sample(n, kPsi2Draws, derive_seed(f.pilot_seed, {1, n}));
        const double est = psi2_norm_estimate(v);
        f.psi2_estimates[n] = est;
        psi2_max = std::max(psi2_max, est);
    }
    f.psi2_a_hat = round_up(psi2_max * 1.05, 3);
    say("psi2 A_hat = " + std::to_string(f.psi2_a_hat));

    f.small_cap_c = round_up(fit_small_cap_constant() * 1.001, 4);
    const auto [blo, bhi] = fit_moment_band();
    f.moment_band_lo = round_down(blo / 1.001, 4);
    f.moment_band_hi = round_up(bhi * 1.001, 4);

    RunOptions quiet = opt;
    quiet.write_outputs = false;
    quiet.record_timings = false;

    auto pilot_cfg = config;
    pilot_cfg.master_seed = f.pilot_seed;
    say("pilot campaign (seed " + std::to_string(f.pilot_seed) + ")");
    const auto pilot = run_experiment(pilot_cfg, quiet);
    if (!pilot.failures.empty()) {
        throw numerical_error("calibration pilot had " + std::to_string(pilot.failures.size()) + " failed trials");
    }
    for (const auto& r : pilot.records) {
        f.pilot_l_k_max = std::max(f.pilot_l_k_max, r.l_k);
    }
    f.c_star = round_up(f.pilot_l_k_max * 1.02, 4);
    f.cemp_bands = fit_cemp_bands(pilot.second_moment, config.cells());

    say("reference campaign (seed " + std::to_string(config.master_seed) + ")");
    const auto reference = run_experiment(config, quiet);
    if (!reference.failures.empty()) {
        throw numerical_error("calibration reference run had " + std::to_string(reference.failures.size()) +
                              " failed trials");
    }
    for (const auto& c : reference.inradius) {
        f.inradius_violations.push_back({c.n, c.m, c.violations});
    }
    return f;
}

} // namespace isohull::harness
