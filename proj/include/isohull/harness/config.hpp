#pragma once

#include "isohull/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace isohull::harness {

/// One (n, m) cell of a campaign. ratio is set when the cell came from an
/// m/n rule, and groups cells for the per-ratio checks.
struct Cell
{
    std::size_t n = 0;
    std::size_t m = 0;
    std::optional<double> ratio;

    friend bool operator<(const Cell& a, const Cell& b) { return std::tie(a.n, a.m) < std::tie(b.n, b.m); }
    friend bool operator==(const Cell& a, const Cell& b) { return a.n == b.n && a.m == b.m; }
};

/// m for an m/n rule: round half up, never below n + 1.
inline std::size_t m_for_ratio(std::size_t n, double ratio)
{
    const auto m = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
    return std::max(m, n + 1);
}

/// Grid entry: the cross product of `n` with either explicit `m` values or
/// m/n `ratio` values.
struct GridSpec
{
    std::vector<std::size_t> n;
    std::vector<std::size_t> m;
    std::vector<double> ratio;
};

struct AlphaRule
{
    enum class Kind { log_ratio, fixed };
    Kind kind = Kind::log_ratio;
    double value = 0.0;

    /// Radius tested against the inradius. The default is
    /// sqrt(log(m/n) / n) / (2 sqrt 2).
    double alpha(std::size_t n, std::size_t m) const
    {
        if (kind == Kind::fixed) {
            return value;
        }
        const double dn = static_cast<double>(n);
        return std::sqrt(std::log(static_cast<double>(m) / dn) / dn) / (2.0 * std::sqrt(2.0));
    }
};

struct EmitFlags
{
    bool csv = true;
    bool jsonl = true;
};

struct ExperimentConfig
{
    std::vector<GridSpec> grid;
    std::size_t trials = 200;
    std::uint64_t master_seed = 271828;
    std::size_t oracle_samples = 0;
    AlphaRule alpha_rule;
    std::string output_dir;
    EmitFlags emit;

    /// Expanded cells in canonical (n, m) order, duplicates removed.
    std::vector<Cell> cells() const
    {
        std::vector<Cell> out;
        for (const auto& spec : grid) {
            for (std::size_t n : spec.n) {
                for (std::size_t m : spec.m) {
                    out.push_back({n, m, std::nullopt});
                }
                for (double r : spec.ratio) {
                    out.push_back({n, m_for_ratio(n, r), r});
                }
            }
        }
        std::stable_sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Throws config_error describing the first problem found.
    void validate() const
    {
        if (trials < 1) {
            throw config_error("trials must be >= 1");
        }
        if (grid.empty()) {
            throw config_error("grid is empty");
        }
        for (const auto& spec : grid) {
            if (spec.n.empty() || (spec.m.empty() && spec.ratio.empty())) {
                throw config_error("grid entry needs n and one of m or ratio");
            }
            for (double r : spec.ratio) {
                if (!(r > 1.0)) {
                    throw config_error("grid ratio must be > 1, got " + std::to_string(r));
                }
            }
        }
        for (const auto& c : cells()) {
            if (c.n < 2) {
                throw config_error("grid cell has n < 2");
            }
            if (c.m <= c.n) {
                throw config_error("grid cell (n=" + std::to_string(c.n) + ", m=" + std::to_string(c.m) +
                                   ") violates m > n");
            }
        }
        if (alpha_rule.kind == AlphaRule::Kind::fixed && !(alpha_rule.value >= 0.0)) {
            throw config_error("alpha_rule fixed value must be >= 0");
        }
        if (!emit.csv && !emit.jsonl && !output_dir.empty()) {
            throw config_error("emit selects no output format");
        }
    }
};

/// n in {2..8}, m/n in {1.5, 2, 3, 8}, 200 trials per cell.
inline ExperimentConfig default_config()
{
    ExperimentConfig c;
    c.grid.push_back({{2, 3, 4, 5, 6, 7, 8}, {}, {1.5, 2.0, 3.0, 8.0}});
    return c;
}

// JSON mapping. Keys match the ExperimentConfig fields exactly.

namespace detail {

template <typename T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key)) {
        return {};
    }
    const auto& v = j.at(key);
    if (v.is_array()) {
        return v.get<std::vector<T>>();
    }
    return {v.get<T>()};
}

} // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c)
{
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& spec : c.grid) {
        nlohmann::json g;
        g["n"] = spec.n;
        if (!spec.m.empty()) {
            g["m"] = spec.m;
        }
        if (!spec.ratio.empty()) {
            g["ratio"] = spec.ratio;
        }
        grid.push_back(std::move(g));
    }
    nlohmann::json alpha;
    if (c.alpha_rule.kind == AlphaRule::Kind::log_ratio) {
        alpha = "log_ratio";
    } else {
        alpha = {{"fixed", c.alpha_rule.value}};
    }
    nlohmann::json emit = nlohmann::json::array();
    if (c.emit.csv) {
        emit.push_back("csv");
    }
    if (c.emit.jsonl) {
        emit.push_back("jsonl");
    }
    return {{"grid", grid},
            {"trials", c.trials},
            {"master_seed", c.master_seed},
            {"oracle_samples", c.oracle_samples},
            {"alpha_rule", alpha},
            {"output_dir", c.output_dir},
            {"emit", emit}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> known = {"grid",        "trials",     "master_seed", "oracle_samples",
                                                "alpha_rule",  "output_dir", "emit"};
    if (!j.is_object()) {
        throw config_error("config must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) {
            throw config_error("unknown config key '" + key + "'");
        }
    }
    ExperimentConfig c;
    try {
        if (j.contains("grid")) {
            c.grid.clear();
            for (const auto& g : j.at("grid")) {
                GridSpec spec;
                spec.n = detail::scalar_or_list<std::size_t>(g, "n");
                spec.m = detail::scalar_or_list<std::size_t>(g, "m");
                spec.ratio = detail::scalar_or_list<double>(g, "ratio");
                c.grid.push_back(std::move(spec));
            }
        } else {
            c.grid = default_config().grid;
        }
        if (j.contains("trials")) {
            const auto t = j.at("trials").get<long long>();
            if (t < 1) {
                throw config_error("trials must be >= 1");
            }
            c.trials = static_cast<std::size_t>(t);
        }
        if (j.contains("master_seed")) {
            c.master_seed = j.at("master_seed").get<std::uint64_t>();
        }
        if (j.contains("oracle_samples")) {
            c.oracle_samples = j.at("oracle_samples").get<std::size_t>();
        }
        if (j.contains("alpha_rule")) {
            const auto& a = j.at("alpha_rule");
            if (a.is_string() && a.get<std::string>() == "log_ratio") {
                c.alpha_rule = {};
            } else if (a.is_object() && a.contains("fixed")) {
                c.alpha_rule = {AlphaRule::Kind::fixed, a.at("fixed").get<double>()};
            } else {
                throw config_error("alpha_rule must be \"log_ratio\" or {\"fixed\": value}");
            }
        }
        if (j.contains("output_dir")) {
            c.output_dir = j.at("output_dir").get<std::string>();
        }
        if (j.contains("emit")) {
            c.emit = {false, false};
            for (const auto& e : j.at("emit")) {
                const auto s = e.get<std::string>();
                if (s == "csv") {
                    c.emit.csv = true;
                } else if (s == "jsonl") {
                    c.emit.jsonl = true;
                } else {
                    throw config_error("emit entries must be \"csv\" or \"jsonl\"");
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw io_error(path, "cannot open config");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    return config_from_json(j);
}

/// FNV-1a over the canonical JSON text; used as fixture provenance.
inline std::uint64_t config_hash(const ExperimentConfig& c)
{
    auto j = to_json(c);
    j.erase("output_dir");
    j.erase("emit");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace isohull::harness
