#pragma once

#include "isohull/errors.hpp"
#include "isohull/harness/trial.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace isohull::harness {

inline constexpr std::string_view kCsvHeader =
    "n,m,trial,seed,l_k,identity_bound,vol_root,inradius,mean_square,max_facet_cross,facet_count,resampled,wall_time_ms";

/// Shortest form is not used on purpose: every double gets 17 significant
/// digits, which round-trips exactly.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace detail {

template <typename Emit>
void for_each_field(const TrialRecord& r, Emit&& emit)
{
    emit("n", std::to_string(r.n));
    emit("m", std::to_string(r.m));
    emit("trial", std::to_string(r.trial));
    emit("seed", std::to_string(r.seed));
    emit("l_k", format_double(r.l_k));
    emit("identity_bound", format_double(r.identity_bound));
    emit("vol_root", format_double(r.vol_root));
    emit("inradius", format_double(r.inradius));
    emit("mean_square", format_double(r.mean_square));
    emit("max_facet_cross", format_double(r.max_facet_cross));
    emit("facet_count", std::to_string(r.facet_count));
    emit("resampled", std::to_string(r.resampled));
    emit("wall_time_ms", format_double(r.wall_time_ms));
}

} // namespace detail

inline std::string csv_row(const TrialRecord& r)
{
    std::string row;
    detail::for_each_field(r, [&](std::string_view, const std::string& v) {
        if (!row.empty()) {
            row += ',';
        }
        row += v;
    });
    return row;
}

inline std::string jsonl_row(const TrialRecord& r)
{
    std::string row = "{";
    bool first = true;
    detail::for_each_field(r, [&](std::string_view key, const std::string& v) {
        if (!first) {
            row += ',';
        }
        first = false;
        row += '"';
        row += key;
        row += "\":";
        row += v;
    });
    row += '}';
    return row;
}

inline std::string to_csv(const std::vector<TrialRecord>& records)
{
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        out += csv_row(r);
        out += '\n';
    }
    return out;
}

inline std::string to_jsonl(const std::vector<TrialRecord>& records)
{
    std::string out;
    for (const auto& r : records) {
        out += jsonl_row(r);
        out += '\n';
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error(path.string(), "cannot open for writing");
    }
    out << text;
    if (!out) {
        throw io_error(path.string(), "write failed");
    }
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error(path.string(), "cannot open for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct EmittedPaths
{
    std::filesystem::path csv;
    std::filesystem::path jsonl;
};

/// Writes records.csv and/or records.jsonl into `dir` (created if needed).
inline EmittedPaths emit_records(const std::vector<TrialRecord>& records, const std::filesystem::path& dir, bool csv,
                                 bool jsonl)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw io_error(dir.string(), "cannot create output directory: " + ec.message());
    }
    EmittedPaths paths;
    if (csv) {
        paths.csv = dir / "records.csv";
        write_text(paths.csv, to_csv(records));
    }
    if (jsonl) {
        paths.jsonl = dir / "records.jsonl";
        write_text(paths.jsonl, to_jsonl(records));
    }
    return paths;
}

inline TrialRecord record_from_json(const nlohmann::json& j)
{
    TrialRecord r;
    r.n = j.at("n").get<std::size_t>();
    r.m = j.at("m").get<std::size_t>();
    r.trial = j.at("trial").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.l_k = j.at("l_k").get<double>();
    r.identity_bound = j.at("identity_bound").get<double>();
    r.vol_root = j.at("vol_root").get<double>();
    r.inradius = j.at("inradius").get<double>();
    r.mean_square = j.at("mean_square").get<double>();
    r.max_facet_cross = j.at("max_facet_cross").get<double>();
    r.facet_count = j.at("facet_count").get<std::size_t>();
    r.resampled = j.at("resampled").get<std::size_t>();
    r.wall_time_ms = j.at("wall_time_ms").get<double>();
    return r;
}

/// Record as a JSON object, with the oracle deltas attached when present.
inline nlohmann::json record_to_json(const TrialRecord& r)
{
    auto j = nlohmann::json::parse(jsonl_row(r));
    if (r.oracle) {
        nlohmann::json o{{"samples", r.oracle->samples},
                         {"mean_square_z", r.oracle->mean_square_z},
                         {"covariance_max_abs_z", r.oracle->covariance_max_abs_z}};
        if (r.oracle->volume_z) {
            o["volume_z"] = *r.oracle->volume_z;
        }
        j["oracle"] = o;
    }
    return j;
}

inline std::vector<TrialRecord> parse_jsonl(const std::string& text, const std::string& origin = "<jsonl>")
{
    std::vector<TrialRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw io_error(origin, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<TrialRecord> parse_csv(const std::string& text, const std::string& origin = "<csv>")
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw io_error(origin, "missing or unexpected CSV header");
    }
    std::vector<TrialRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 13) {
            throw io_error(origin, "line " + std::to_string(lineno) + ": expected 13 columns");
        }
        const auto u = [&](std::size_t i) { return static_cast<std::size_t>(std::stoull(cells[i])); };
        const auto d = [&](std::size_t i) {
            double v = 0.0;
            const auto res = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
            if (res.ec != std::errc{}) {
                throw io_error(origin, "line " + std::to_string(lineno) + ": bad number '" + cells[i] + "'");
            }
            return v;
        };
        TrialRecord r;
        r.n = u(0);
        r.m = u(1);
        r.trial = u(2);
        r.seed = std::stoull(cells[3]);
        r.l_k = d(4);
        r.identity_bound = d(5);
        r.vol_root = d(6);
        r.inradius = d(7);
        r.mean_square = d(8);
        r.max_facet_cross = d(9);
        r.facet_count = u(10);
        r.resampled = u(11);
        r.wall_time_ms = d(12);
        out.push_back(r);
    }
    return out;
}

inline std::vector<TrialRecord> read_jsonl(const std::filesystem::path& path)
{
    return parse_jsonl(read_text(path), path.string());
}

} // namespace isohull::harness
