#pragma once

// Job configuration, its JSON form and digest, distortion spec files and
// manifests, and JSON records for metric scores.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pcqa/distort.hpp"
#include "pcqa/error.hpp"
#include "pcqa/iqa2d.hpp"
#include "pcqa/metrics.hpp"
#include "pcqa/projection.hpp"

namespace pcqa {

struct JobConfig {
    std::string command;
    std::vector<std::string> inputs;
    int view_level = 0;
    double scale = 0.5;
    std::optional<CanvasSize> canvas;
    Color background{127, 127, 127};
    IwSsimParams iwssim;
    std::vector<MetricId> metrics{MetricId::iwssim_p};
    std::vector<DistortionSpec> distortions;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string output;

    ProjectionConfig projection() const {
        ProjectionConfig p;
        p.scale = scale;
        p.canvas = canvas;
        p.background = background;
        p.viewpoints = icosphere_normals(view_level);
        p.jobs = jobs;
        return p;
    }
};

inline std::optional<CanvasSize> parse_canvas(const std::string& s) {
    if (s == "auto") return std::nullopt;
    int w = 0, h = 0;
    char x = 0;
    std::istringstream is(s);
    if (!(is >> w >> x >> h) || (x != 'x' && x != 'X') || w <= 0 || h <= 0 || !is.eof())
        throw PreconditionError("bad canvas '" + s + "' (expected auto or WxH)");
    return CanvasSize{w, h};
}

inline std::string canvas_string(const std::optional<CanvasSize>& c) {
    return c ? std::to_string(c->width) + "x" + std::to_string(c->height) : "auto";
}

inline nlohmann::json iwssim_json(const IwSsimParams& p) {
    return {{"scales", p.scales},     {"window", p.window}, {"sigma", p.sigma},
            {"k1", p.k1},             {"k2", p.k2},         {"dynamic_range", p.dynamic_range},
            {"beta", p.beta},         {"info_window", p.info_window}, {"noise_var", p.noise_var}};
}

/// Parameters that determine metric values. Paths, job counts and output
/// locations are excluded so the digest identifies a scoring setup.
inline nlohmann::json scoring_json(const JobConfig& c) {
    return {{"views", c.view_level},
            {"scale", c.scale},
            {"canvas", canvas_string(c.canvas)},
            {"background", {c.background.r, c.background.g, c.background.b}},
            {"iwssim", iwssim_json(c.iwssim)},
            {"normals_k", 12}};
}

/// FNV-1a over the canonical (sorted-key) JSON dump, as 16 hex digits.
inline std::string digest(const nlohmann::json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_digest(const JobConfig& c) { return digest(scoring_json(c)); }

/// Applies the keys present in a JSON config file on top of `c`.
inline void apply_config_json(JobConfig& c, const nlohmann::json& j) {
    try {
        if (j.contains("views")) c.view_level = j["views"].get<int>();
        if (j.contains("scale")) c.scale = j["scale"].get<double>();
        if (j.contains("canvas")) c.canvas = parse_canvas(j["canvas"].get<std::string>());
        if (j.contains("background")) {
            const auto b = j["background"].get<std::vector<int>>();
            if (b.size() != 3) throw PreconditionError("config: background needs three channels");
            for (int v : b)
                if (v < 0 || v > 255) throw PreconditionError("config: background channel out of [0, 255]");
            c.background = {std::uint8_t(b[0]), std::uint8_t(b[1]), std::uint8_t(b[2])};
        }
        if (j.contains("iwssim")) {
            const auto& w = j["iwssim"];
            auto& p = c.iwssim;
            if (w.contains("scales")) p.scales = w["scales"].get<int>();
            if (w.contains("window")) p.window = w["window"].get<int>();
            if (w.contains("sigma")) p.sigma = w["sigma"].get<double>();
            if (w.contains("k1")) p.k1 = w["k1"].get<double>();
            if (w.contains("k2")) p.k2 = w["k2"].get<double>();
            if (w.contains("dynamic_range")) p.dynamic_range = w["dynamic_range"].get<double>();
            if (w.contains("beta")) p.beta = w["beta"].get<std::vector<double>>();
            if (w.contains("info_window")) p.info_window = w["info_window"].get<int>();
            if (w.contains("noise_var")) p.noise_var = w["noise_var"].get<double>();
        }
        if (j.contains("metrics")) {
            c.metrics.clear();
            for (const auto& m : j["metrics"]) c.metrics.push_back(parse_metric(m.get<std::string>()));
        }
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("jobs")) c.jobs = j["jobs"].get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
}

inline nlohmann::json to_json(const JobConfig& c) {
    nlohmann::json j = scoring_json(c);
    j["command"] = c.command;
    j["inputs"] = c.inputs;
    nlohmann::json ms = nlohmann::json::array();
    for (auto m : c.metrics) ms.push_back(std::string(metric_name(m)));
    j["metrics"] = ms;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["output"] = c.output;
    return j;
}

inline nlohmann::json metric_record(const std::string& ref, const std::string& dis, const MetricScore& s,
                                    const std::string& cfg_digest) {
    nlohmann::json j{{"ref", ref},
                     {"dis", dis},
                     {"metric", std::string(metric_name(s.metric))},
                     {"value", s.value},
                     {"per_view", s.per_view},
                     {"direction", s.direction == Direction::higher_better ? "higher_better" : "lower_better"},
                     {"config_digest", cfg_digest}};
    if (!s.metadata.empty()) j["metadata"] = s.metadata;
    return j;
}

// --------------------------------------------------------------------------
// Distortion spec files

/// One spec per non-blank, non-comment line:
///   downsample <level>
///   gaussian <sigma_geo> <sigma_col> [seed=<u64>]
/// Gaussian lines without a seed use `default_seed`.
inline std::vector<DistortionSpec> parse_distortion_specs(std::istream& in, const std::string& source,
                                                          std::uint64_t default_seed) {
    std::vector<DistortionSpec> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::vector<std::string> tok{std::istream_iterator<std::string>(is), std::istream_iterator<std::string>()};
        if (tok.empty()) continue;
        auto fail = [&](const std::string& msg) {
            return ParseError(source + ":" + std::to_string(line_no) + ": " + msg);
        };
        auto number = [&](const std::string& s) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw fail("not a number: '" + s + "'");
            }
        };
        if (tok[0] == "downsample") {
            if (tok.size() != 2) throw fail("expected 'downsample <level>'");
            const double lv = number(tok[1]);
            if (lv != std::floor(lv) || lv < 1 || lv > 10) throw fail("downsample level must be an integer in [1, 10]");
            out.push_back({DownsampleSpec{int(lv)}});
        } else if (tok[0] == "gaussian") {
            if (tok.size() != 3 && tok.size() != 4) throw fail("expected 'gaussian <sigma_geo> <sigma_col> [seed=<n>]'");
            GaussianNoiseSpec g{number(tok[1]), number(tok[2]), default_seed};
            if (g.sigma_geo < 0 || g.sigma_col < 0) throw fail("standard deviations must be non-negative");
            if (tok.size() == 4) {
                if (tok[3].rfind("seed=", 0) != 0) throw fail("expected seed=<n>, got '" + tok[3] + "'");
                try {
                    std::size_t used = 0;
                    g.seed = std::stoull(tok[3].substr(5), &used);
                    if (used != tok[3].size() - 5) throw std::invalid_argument(tok[3]);
                } catch (const std::exception&) {
                    throw fail("bad seed '" + tok[3] + "'");
                }
            }
            out.push_back({g});
        } else {
            throw fail("unknown distortion '" + tok[0] + "' (expected downsample or gaussian)");
        }
    }
    return out;
}

/// Manifest entry for one generated file. `distortion` is the subset label
/// used by the benchmark; codec-produced files (gpcc-octree, gpcc-trisoup,
/// vpcc) use the same layout with their own `params` and a null seed.
inline nlohmann::json manifest_entry(const std::string& file, const std::string& ref_id, const DistortionSpec& spec,
                                     std::size_t points) {
    nlohmann::json e{{"file", file},
                     {"stimulus_id", std::filesystem::path(file).stem().string()},
                     {"ref_id", ref_id},
                     {"label", spec.label()},
                     {"points", points},
                     {"codec", nullptr}};
    if (const auto* d = std::get_if<DownsampleSpec>(&spec.kind)) {
        e["distortion"] = "downsample";
        e["params"] = {{"level", d->level}};
        e["seed"] = nullptr;
    } else {
        const auto& g = std::get<GaussianNoiseSpec>(spec.kind);
        e["distortion"] = "gaussian";
        e["params"] = {{"sigma_geo", g.sigma_geo}, {"sigma_col", g.sigma_col}};
        e["seed"] = g.seed;
        e["rng"] = "mt19937_64+box_muller";
    }
    return e;
}

}  // namespace pcqa
