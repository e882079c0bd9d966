#pragma once

#include "isohull/errors.hpp"
#include "isohull/harness/config.hpp"
#include "isohull/harness/records_io.hpp"
#include "isohull/harness/trial.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace isohull::harness {

struct TrialFailure
{
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string error;
};

/// Linear-interpolated quantiles of one scalar across a cell.
struct Quantiles
{
    double min = 0, q10 = 0, q25 = 0, median = 0, q75 = 0, q90 = 0, max = 0;
};

inline double quantile_sorted(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) {
        return std::nan("");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline Quantiles quantiles_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return {quantile_sorted(v, 0.0),  quantile_sorted(v, 0.10), quantile_sorted(v, 0.25), quantile_sorted(v, 0.5),
            quantile_sorted(v, 0.75), quantile_sorted(v, 0.90), quantile_sorted(v, 1.0)};
}

struct CellSummary
{
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    Quantiles l_k, vol_root, inradius, mean_square, max_facet_cross;
};

/// Records grouped by (n, m) in canonical order.
inline std::map<std::pair<std::size_t, std::size_t>, std::vector<const TrialRecord*>>
group_by_cell(const std::vector<TrialRecord>& records)
{
    std::map<std::pair<std::size_t, std::size_t>, std::vector<const TrialRecord*>> cells;
    for (const auto& r : records) {
        cells[{r.n, r.m}].push_back(&r);
    }
    return cells;
}

inline std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records,
                                          const std::vector<TrialFailure>& failures = {})
{
    std::vector<CellSummary> out;
    for (const auto& [key, rs] : group_by_cell(records)) {
        CellSummary s;
        s.n = key.first;
        s.m = key.second;
        s.trials = rs.size();
        s.failures = static_cast<std::size_t>(std::count_if(failures.begin(), failures.end(), [&](const TrialFailure& f) {
            return f.n == s.n && f.m == s.m;
        }));
        const auto pick = [&](auto field) {
            std::vector<double> v;
            for (const auto* r : rs) {
                v.push_back(field(*r));
            }
            return quantiles_of(std::move(v));
        };
        s.l_k = pick([](const TrialRecord& r) { return r.l_k; });
        s.vol_root = pick([](const TrialRecord& r) { return r.vol_root; });
        s.inradius = pick([](const TrialRecord& r) { return r.inradius; });
        s.mean_square = pick([](const TrialRecord& r) { return r.mean_square; });
        s.max_facet_cross = pick([](const TrialRecord& r) { return r.max_facet_cross; });
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bound checks

struct InradiusCellReport
{
    std::size_t n = 0, m = 0, trials = 0, violations = 0;
    double alpha = 0.0;
    double rate = 0.0;
    double reference_rate = 0.0; // e^{-n}, for comparison only
};

/// Counts trials whose inradius falls below the rule's alpha, per cell.
inline std::vector<InradiusCellReport> check_inradius_bound(const std::vector<TrialRecord>& records,
                                                            const AlphaRule& rule)
{
    if (records.empty()) {
        throw domain_error("check_inradius_bound: no records");
    }
    std::vector<InradiusCellReport> out;
    for (const auto& [key, rs] : group_by_cell(records)) {
        InradiusCellReport c;
        c.n = key.first;
        c.m = key.second;
        c.trials = rs.size();
        c.alpha = rule.alpha(c.n, c.m);
        for (const auto* r : rs) {
            if (r->inradius < c.alpha) {
                ++c.violations;
            }
        }
        c.rate = static_cast<double>(c.violations) / static_cast<double>(c.trials);
        c.reference_rate = std::exp(-static_cast<double>(c.n));
        out.push_back(c);
    }
    return out;
}

struct SecondMomentCellReport
{
    std::size_t n = 0, m = 0, trials = 0;
    double log_ratio = 0.0;
    double c_emp = 0.0; // max mean_square * n / log(m/n)
    double facet_ratio = 0.0; // max max_facet_cross / (n log(m/n))
};

struct SecondMomentReport
{
    std::vector<SecondMomentCellReport> cells;
    double c_emp_min = 0.0;
    double c_emp_max = 0.0;
    double spread() const { return c_emp_max / c_emp_min; }
};

inline SecondMomentReport check_second_moment_bound(const std::vector<TrialRecord>& records)
{
    SecondMomentReport rep;
    rep.c_emp_min = std::numeric_limits<double>::infinity();
    rep.c_emp_max = 0.0;
    for (const auto& [key, rs] : group_by_cell(records)) {
        SecondMomentCellReport c;
        c.n = key.first;
        c.m = key.second;
        if (c.m <= c.n) {
            throw domain_error("check_second_moment_bound: cell with m <= n");
        }
        c.trials = rs.size();
        c.log_ratio = std::log(static_cast<double>(c.m) / static_cast<double>(c.n));
        const double dn = static_cast<double>(c.n);
        c.facet_ratio = -std::numeric_limits<double>::infinity();
        for (const auto* r : rs) {
            c.c_emp = std::max(c.c_emp, r->mean_square * dn / c.log_ratio);
            c.facet_ratio = std::max(c.facet_ratio, r->max_facet_cross / (dn * c.log_ratio));
        }
        rep.c_emp_min = std::min(rep.c_emp_min, c.c_emp);
        rep.c_emp_max = std::max(rep.c_emp_max, c.c_emp);
        rep.cells.push_back(c);
    }
    return rep;
}

struct LkThresholdCellReport
{
    std::size_t n = 0, m = 0, trials = 0, below = 0;
    double fraction = 0.0;
    double bound_shape = 0.0; // 1 - exp(-n min(1, log(m/n))), constants set to 1
};

inline std::vector<LkThresholdCellReport> check_l_k_threshold(const std::vector<TrialRecord>& records, double c_star)
{
    if (!(c_star > 0.0)) {
        throw domain_error("check_l_k_threshold: c_star must be positive");
    }
    std::vector<LkThresholdCellReport> out;
    for (const auto& [key, rs] : group_by_cell(records)) {
        LkThresholdCellReport c;
        c.n = key.first;
        c.m = key.second;
        c.trials = rs.size();
        for (const auto* r : rs) {
            if (r->l_k <= c_star) {
                ++c.below;
            }
        }
        c.fraction = static_cast<double>(c.below) / static_cast<double>(c.trials);
        const double dn = static_cast<double>(c.n);
        c.bound_shape = 1.0 - std::exp(-dn * std::min(1.0, std::log(static_cast<double>(c.m) / dn)));
        out.push_back(c);
    }
    return out;
}

/// Median of vol_root * n / sqrt(log(m/n)) per cell.
struct VolRootCellReport
{
    std::size_t n = 0, m = 0;
    double normalized_median = 0.0;
};

inline std::vector<VolRootCellReport> vol_root_growth(const std::vector<TrialRecord>& records)
{
    std::vector<VolRootCellReport> out;
    for (const auto& [key, rs] : group_by_cell(records)) {
        const double dn = static_cast<double>(key.first);
        const double scale = dn / std::sqrt(std::log(static_cast<double>(key.second) / dn));
        std::vector<double> v;
        for (const auto* r : rs) {
            v.push_back(r->vol_root * scale);
        }
        std::sort(v.begin(), v.end());
        out.push_back({key.first, key.second, quantile_sorted(v, 0.5)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Campaign

struct RunOptions
{
    std::size_t workers = 1;
    bool record_timings = true;
    bool write_outputs = true;
};

struct ExperimentResult
{
    std::vector<TrialRecord> records; // sorted by (n, m, trial)
    std::vector<TrialFailure> failures;
    std::vector<CellSummary> summaries;
    std::vector<InradiusCellReport> inradius;
    SecondMomentReport second_moment;
    EmittedPaths paths;
};

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t m, std::size_t trial)
{
    return derive_seed(master, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m),
                                static_cast<std::uint64_t>(trial)});
}

inline nlohmann::json summary_to_json(const ExperimentResult& res)
{
    const auto q = [](const Quantiles& x) {
        return nlohmann::json{{"min", x.min}, {"q10", x.q10},       {"q25", x.q25}, {"median", x.median},
                              {"q75", x.q75}, {"q90", x.q90},       {"max", x.max}};
    };
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t i = 0; i < res.summaries.size(); ++i) {
        const auto& s = res.summaries[i];
        nlohmann::json c{{"n", s.n},
                         {"m", s.m},
                         {"trials", s.trials},
                         {"failures", s.failures},
                         {"l_k", q(s.l_k)},
                         {"vol_root", q(s.vol_root)},
                         {"inradius", q(s.inradius)},
                         {"mean_square", q(s.mean_square)},
                         {"max_facet_cross", q(s.max_facet_cross)}};
        for (const auto& r : res.inradius) {
            if (r.n == s.n && r.m == s.m) {
                c["inradius_check"] = {{"alpha", r.alpha}, {"violations", r.violations}, {"rate", r.rate},
                                       {"reference_rate", r.reference_rate}};
            }
        }
        for (const auto& r : res.second_moment.cells) {
            if (r.n == s.n && r.m == s.m) {
                c["second_moment_check"] = {{"c_emp", r.c_emp}, {"facet_ratio", r.facet_ratio}};
            }
        }
        cells.push_back(std::move(c));
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : res.failures) {
        failures.push_back({{"n", f.n}, {"m", f.m}, {"trial", f.trial}, {"seed", f.seed}, {"error", f.error}});
    }
    return {{"cells", cells},
            {"failures", failures},
            {"c_emp_min", res.second_moment.c_emp_min},
            {"c_emp_max", res.second_moment.c_emp_max}};
}

/// Runs every trial of the config. Per-trial seeds are fixed before dispatch
/// and results are stored by index, so the output does not depend on the
/// number of workers. Failed trials are collected, not fatal.
inline ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& opt = {})
{
    config.validate();
    struct Task
    {
        std::size_t n, m, trial;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& cell : config.cells()) {
        for (std::size_t t = 0; t < config.trials; ++t) {
            tasks.push_back({cell.n, cell.m, t, trial_seed(config.master_seed, cell.n, cell.m, t)});
        }
    }

    std::vector<std::optional<TrialRecord>> results(tasks.size());
    std::vector<std::optional<TrialFailure>> failed(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) {
                return;
            }
            const auto& task = tasks[i];
            try {
                TrialOptions to;
                to.trial_index = task.trial;
                to.oracle_samples = config.oracle_samples;
                to.record_timings = opt.record_timings;
                results[i] = run_trial(task.n, task.m, task.seed, to);
            } catch (const std::exception& e) {
                failed[i] = TrialFailure{task.n, task.m, task.trial, task.seed, e.what()};
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(opt.workers, tasks.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    ExperimentResult res;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i]) {
            res.records.push_back(std::move(*results[i]));
        } else if (failed[i]) {
            res.failures.push_back(std::move(*failed[i]));
        }
    }
    std::sort(res.records.begin(), res.records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        return std::tie(a.n, a.m, a.trial) < std::tie(b.n, b.m, b.trial);
    });
    res.summaries = summarize(res.records, res.failures);
    if (!res.records.empty()) {
        res.inradius = check_inradius_bound(res.records, config.alpha_rule);
        res.second_moment = check_second_moment_bound(res.records);
    }

    if (opt.write_outputs && !config.output_dir.empty()) {
        res.paths = emit_records(res.records, config.output_dir, config.emit.csv, config.emit.jsonl);
        write_text(std::filesystem::path(config.output_dir) / "summary.json", summary_to_json(res).dump(2) + "\n");
    }
    return res;
}

// ---------------------------------------------------------------------------
// Sphere-only tail check

struct TailCheck
{
    std::size_t n = 0, count = 0, trials = 0, exceed = 0;
    double eps = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
};

/// Empirical P{ |sum_{i<=N} sqrt(n) <P_i, theta>| > eps N } against the
/// Bernstein bound with constant a_hat. theta is e_1 (rotation invariance).
inline TailCheck bernstein_tail_check(std::size_t n, std::size_t count, double eps, std::size_t trials,
                                      std::uint64_t seed, double a_hat)
{
    RngStream stream(seed);
    TailCheck t{n, count, trials, 0, eps, 0.0, bernstein_bound(count, eps, a_hat)};
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < trials; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            s += root_n * sample_unit_vector(n, stream)[0];
        }
        if (std::abs(s) > eps * static_cast<double>(count)) {
            ++t.exceed;
        }
    }
    t.empirical = static_cast<double>(t.exceed) / static_cast<double>(trials);
    return t;
}

} // namespace isohull::harness
