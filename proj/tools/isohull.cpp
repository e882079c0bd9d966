#include "isohull/isohull.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace ih = isohull;
namespace hs = isohull::harness;
using nlohmann::json;

namespace {

enum Exit : int { ok = 0, usage = 1, numerical = 2, io = 3 };

struct Args
{
    std::string config;
    std::uint64_t seed = 271828;
    std::size_t n = 3;
    std::size_t m = 9;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> oracle_samples;
    std::string out;
    std::string format = "both";
    std::size_t workers = 0;
    bool no_timings = false;
    std::string off;
    std::string records;
    std::string fixture;
};

std::size_t worker_count(std::size_t requested)
{
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

hs::ExperimentConfig resolve_config(const Args& a, bool apply_out)
{
    auto cfg = a.config.empty() ? hs::default_config() : hs::load_config(a.config);
    if (a.trials) {
        cfg.trials = *a.trials;
    }
    if (a.oracle_samples) {
        cfg.oracle_samples = *a.oracle_samples;
    }
    if (apply_out && !a.out.empty()) {
        cfg.output_dir = a.out;
    }
    if (a.format == "csv") {
        cfg.emit = {true, false};
    } else if (a.format == "jsonl") {
        cfg.emit = {false, true};
    } else if (a.format != "both") {
        throw ih::config_error("--format must be csv, jsonl or both");
    }
    cfg.validate();
    return cfg;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_sample(const Args& a)
{
    const auto cloud = ih::sample_symmetric_cloud(a.n, a.m, a.seed);
    json pts = json::array();
    for (std::size_t i = 0; i < cloud.m; ++i) {
        const auto p = cloud.point(i);
        pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    const json doc{{"n", a.n}, {"m", a.m}, {"seed", a.seed}, {"points", pts}};
    if (a.out.empty()) {
        print(doc);
    } else {
        hs::write_text(a.out, doc.dump(2) + "\n");
    }
    return ok;
}

int cmd_hull(const Args& a)
{
    const auto sample = hs::build_trial_sample(a.n, a.m, a.seed);
    const auto& fc = sample.complex;
    const auto report = ih::validate_complex(fc);
    json checks = json::object();
    for (const auto& c : report.checks) {
        checks[c.name] = {{"passed", c.passed}, {"offenders", c.offenders.size()}, {"detail", c.detail}};
    }
    print({{"n", a.n},
           {"m", a.m},
           {"seed", a.seed},
           {"resampled", sample.resampled},
           {"facet_count", fc.facets.size()},
           {"inradius", ih::inradius(fc)},
           {"valid", report.ok()},
           {"checks", checks}});
    if (!a.off.empty()) {
        ih::write_off(fc, a.off);
    }
    return report.ok() ? ok : numerical;
}

int cmd_trial(const Args& a)
{
    hs::TrialOptions opt;
    opt.oracle_samples = a.oracle_samples.value_or(0);
    opt.record_timings = !a.no_timings;
    print(hs::record_to_json(hs::run_trial(a.n, a.m, a.seed, opt)));
    return ok;
}

int cmd_oracle(const Args& a)
{
    hs::TrialOptions opt;
    opt.oracle_samples = a.oracle_samples.value_or(100000);
    opt.record_timings = !a.no_timings;
    const auto r = hs::run_trial(a.n, a.m, a.seed, opt);
    auto j = hs::record_to_json(r);
    j["oracle"]["max_abs_z"] = r.oracle->max_abs_z();
    print(j);
    return ok;
}

int cmd_experiment(const Args& a)
{
    const auto cfg = resolve_config(a, true);
    hs::RunOptions opt;
    opt.workers = worker_count(a.workers);
    opt.record_timings = !a.no_timings;
    const auto res = hs::run_experiment(cfg, opt);
    std::fprintf(stderr, "%zu trials, %zu failed\n", res.records.size() + res.failures.size(), res.failures.size());
    for (const auto& f : res.failures) {
        std::fprintf(stderr, "  n=%zu m=%zu trial=%zu seed=%llu: %s\n", f.n, f.m, f.trial,
                     static_cast<unsigned long long>(f.seed), f.error.c_str());
    }
    if (cfg.output_dir.empty()) {
        std::cout << hs::to_jsonl(res.records);
    } else {
        std::fprintf(stderr, "wrote %s\n", cfg.output_dir.c_str());
    }
    return res.failures.empty() ? ok : numerical;
}

int cmd_calibrate(const Args& a)
{
    const auto cfg = resolve_config(a, false);
    hs::RunOptions opt;
    opt.workers = worker_count(a.workers);
    const auto fixture =
        hs::calibrate(cfg, opt, [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); });
    const std::string path = a.out.empty() ? "fixtures/calibration.json" : a.out;
    hs::save_fixture(fixture, path);
    std::fprintf(stderr, "wrote %s\n", path.c_str());
    return ok;
}

int cmd_check(const Args& a)
{
    const auto records = hs::read_jsonl(a.records);
    if (records.empty()) {
        throw ih::config_error("no records in " + a.records);
    }
    const auto cfg = a.config.empty() ? hs::default_config() : hs::load_config(a.config);
    const auto inr = hs::check_inradius_bound(records, cfg.alpha_rule);
    const auto sm = hs::check_second_moment_bound(records);
    std::optional<hs::Fixture> fx;
    if (!a.fixture.empty()) {
        fx = hs::load_fixture(a.fixture);
    }
    const double c_star = fx ? fx->c_star : 0.2887;
    const auto main = hs::check_l_k_threshold(records, c_star);

    bool pass = true;
    json inradius = json::array();
    for (const auto& c : inr) {
        json row{{"n", c.n}, {"m", c.m}, {"alpha", c.alpha}, {"violations", c.violations}, {"rate", c.rate}};
        if (fx) {
            for (const auto& e : fx->inradius_violations) {
                if (e.n == c.n && e.m == c.m) {
                    row["expected"] = e.violations;
                    pass = pass && e.violations == c.violations;
                }
            }
        }
        inradius.push_back(row);
    }
    json second = json::array();
    for (const auto& c : sm.cells) {
        second.push_back({{"n", c.n}, {"m", c.m}, {"c_emp", c.c_emp}, {"facet_ratio", c.facet_ratio}});
    }
    json threshold = json::array();
    for (const auto& c : main) {
        threshold.push_back({{"n", c.n}, {"m", c.m}, {"fraction", c.fraction}, {"bound_shape", c.bound_shape}});
        if (fx) {
            pass = pass && c.fraction == 1.0;
        }
    }
    json doc{{"records", records.size()},
             {"inradius", inradius},
             {"second_moment", {{"cells", second}, {"c_emp_min", sm.c_emp_min}, {"c_emp_max", sm.c_emp_max}}},
             {"l_k_threshold", {{"c_star", c_star}, {"cells", threshold}}}};
    if (fx) {
        const auto bad = hs::cemp_band_violations(sm, cfg.cells(), fx->cemp_bands);
        pass = pass && bad.empty();
        doc["c_emp_band_violations"] = bad.size();
        doc["pass"] = pass;
    }
    print(doc);
    return pass ? ok : numerical;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Symmetric random polytopes: hulls, exact moments, isotropy constants"};
    app.require_subcommand(1);
    Args a;

    const auto add_nm = [&](CLI::App* c) {
        c->add_option("--n", a.n, "dimension")->check(CLI::Range(2, 64));
        c->add_option("--m", a.m, "number of sampled points (the hull uses 2m)");
        c->add_option("--seed", a.seed, "seed");
    };

    auto* sample = app.add_subcommand("sample", "emit a seeded point cloud as JSON");
    add_nm(sample);
    sample->add_option("--out", a.out, "output file");

    auto* hull = app.add_subcommand("hull", "build and validate the symmetric hull");
    add_nm(hull);
    hull->add_option("--off", a.off, "write the facet complex in OFF-style text");

    auto* trial = app.add_subcommand("trial", "run one trial and print its record");
    add_nm(trial);
    trial->add_option("--oracle-samples", a.oracle_samples, "Monte Carlo cross-check sample count");
    trial->add_flag("--no-timings", a.no_timings, "write 0 for wall_time_ms");

    auto* oracle = app.add_subcommand("oracle", "Monte Carlo cross-check of one trial");
    add_nm(oracle);
    oracle->add_option("--oracle-samples", a.oracle_samples, "sample count (default 100000)");
    oracle->add_flag("--no-timings", a.no_timings, "write 0 for wall_time_ms");

    auto* experiment = app.add_subcommand("experiment", "run a campaign");
    experiment->add_option("--config", a.config, "JSON config")->check(CLI::ExistingFile);
    experiment->add_option("--trials", a.trials, "override trials per cell");
    experiment->add_option("--oracle-samples", a.oracle_samples, "override oracle samples per trial");
    experiment->add_option("--out", a.out, "override output directory");
    experiment->add_option("--format", a.format, "csv, jsonl or both");
    experiment->add_option("--workers", a.workers, "worker threads (0 = all cores)");
    experiment->add_flag("--no-timings", a.no_timings, "write 0 for wall_time_ms");

    auto* calibrate = app.add_subcommand("calibrate", "fit and write threshold fixtures");
    calibrate->add_option("--config", a.config, "JSON config")->check(CLI::ExistingFile);
    calibrate->add_option("--trials", a.trials, "override trials per cell");
    calibrate->add_option("--out", a.out, "fixture path (default fixtures/calibration.json)");
    calibrate->add_option("--workers", a.workers, "worker threads (0 = all cores)");

    auto* check = app.add_subcommand("check", "re-run the bound checks on a JSONL record file");
    check->add_option("records", a.records, "records.jsonl")->required();
    check->add_option("--config", a.config, "config whose alpha rule and grid apply")->check(CLI::ExistingFile);
    check->add_option("--fixture", a.fixture, "calibration fixture to assert against");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*sample) return cmd_sample(a);
        if (*hull) return cmd_hull(a);
        if (*trial) return cmd_trial(a);
        if (*oracle) return cmd_oracle(a);
        if (*experiment) return cmd_experiment(a);
        if (*calibrate) return cmd_calibrate(a);
        if (*check) return cmd_check(a);
    } catch (const ih::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return io;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return numerical;
    }
    return usage;
}
