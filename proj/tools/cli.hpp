#pragma once

// pcqa command-line front end. Kept in a header so tests can drive the
// commands in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pcqa/pcqa.hpp"

namespace pcqa::cli {

namespace fs = std::filesystem;

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

namespace detail {

inline void ensure_readable(const std::string& path) {
    if (!fs::exists(path)) throw Error("no such file: '" + path + "'");
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << text;
}

inline nlohmann::json read_json(const std::string& path) {
    ensure_readable(path);
    std::ifstream in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Shared projection/metric flags.
struct CommonFlags {
    std::optional<int> views;
    std::optional<double> scale;
    std::optional<std::string> canvas;
    std::vector<std::string> metrics;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::string config;

    void add_to(CLI::App& app, bool with_metrics) {
        app.add_option("--views", views, "Icosphere subdivision level (0 -> 12 views)");
        app.add_option("--scale", scale, "Projection scale factor");
        app.add_option("--canvas", canvas, "Canvas size: auto or WxH");
        if (with_metrics)
            app.add_option("--metric", metrics, "Metric ids (iwssimp msssimp ssimp psnrp p2po_mse p2po_haus "
                                                "p2pl_mse p2pl_haus psnr_y)")
                ->delimiter(',');
        app.add_option("--seed", seed, "Random seed");
        app.add_option("--jobs", jobs, "Worker threads (default: $PCQA_JOBS or hardware concurrency)");
        app.add_option("--config", config, "JSON config file; its keys override flags");
    }

    /// defaults <- flags <- config file
    JobConfig resolve(const std::string& command) const {
        JobConfig c;
        c.command = command;
        c.jobs = default_jobs();
        if (views) c.view_level = *views;
        if (scale) c.scale = *scale;
        if (canvas) c.canvas = parse_canvas(*canvas);
        if (!metrics.empty()) {
            c.metrics.clear();
            for (const auto& m : metrics) c.metrics.push_back(parse_metric(m));
        }
        if (seed) c.seed = *seed;
        if (jobs) c.jobs = *jobs;
        if (!config.empty()) apply_config_json(c, read_json(config));
        require(c.view_level >= 0 && c.view_level <= 4, "--views must be in [0, 4]");
        require(c.scale > 0, "--scale must be positive");
        require(c.jobs >= 1, "--jobs must be >= 1");
        c.iwssim.validate();
        return c;
    }
};

inline void dump_debug_maps(const fs::path& dir, const std::string& stem, std::size_t view, const LumaImage& ref,
                            const LumaImage& dis, const IwSsimParams& params) {
    const auto res = iw_ssim_detail(ref, dis, params);
    for (std::size_t s = 0; s < res.scales.size(); ++s) {
        const auto& sc = res.scales[s];
        const std::string base = stem + "_" + std::to_string(view) + "_s" + std::to_string(s + 1);
        write_png(dir / (base + "_quality.png"), sc.quality, 0.0, 1.0);
        double wmax = 0;
        for (double w : sc.weight) wmax = std::max(wmax, w);
        write_png(dir / (base + "_weight.png"), sc.weight, 0.0, wmax > 0 ? wmax : 1.0);
    }
}

}  // namespace detail

// --------------------------------------------------------------------------

inline int cmd_score(const std::string& ref_path, const std::vector<std::string>& dis_paths,
                     const detail::CommonFlags& flags, const std::string& out_path, const std::string& csv_path,
                     const std::string& debug_dir, Streams io) {
    detail::ensure_readable(ref_path);
    for (const auto& d : dis_paths) detail::ensure_readable(d);
    JobConfig cfg = flags.resolve("score");
    cfg.inputs = {ref_path};
    cfg.inputs.insert(cfg.inputs.end(), dis_paths.begin(), dis_paths.end());
    cfg.output = out_path;
    const std::string dg = config_digest(cfg);
    const ProjectionConfig proj = cfg.projection();

    const PointCloud ref = load_ply(ref_path);
    nlohmann::json records = nlohmann::json::array();
    std::ostringstream csv;
    csv << "stimulus_id,metric_id,value\n";
    csv.precision(12);
    for (const auto& dis_path : dis_paths) {
        const PointCloud dis = load_ply(dis_path);
        const auto scores = evaluate_metrics(ref, dis, cfg.metrics, proj, cfg.iwssim);
        for (const auto& s : scores) {
            records.push_back(metric_record(ref_path, dis_path, s, dg));
            csv << dis.name << ',' << metric_name(s.metric) << ',' << s.value << '\n';
            io.out << dis.name << '\t' << metric_name(s.metric) << '\t' << s.value << '\n';
        }
        if (!debug_dir.empty()) {
            detail::ensure_dir(debug_dir);
            const auto pairs = project_pair(ref, dis, proj);
            for (std::size_t n = 0; n < pairs.size(); ++n)
                detail::dump_debug_maps(debug_dir, dis.name, n, to_luma(pairs[n].ref.pixels),
                                        to_luma(pairs[n].dis.pixels), cfg.iwssim);
        }
    }
    nlohmann::json report{{"config", to_json(cfg)}, {"config_digest", dg}, {"records", records}};
    if (!out_path.empty()) detail::write_text(out_path, report.dump(2) + "\n");
    if (!csv_path.empty()) detail::write_text(csv_path, csv.str());
    return 0;
}

inline int cmd_distort(const std::string& in_path, const std::string& spec_path, const std::string& out_dir,
                       std::optional<std::uint64_t> seed, const std::string& format, Streams io) {
    detail::ensure_readable(in_path);
    detail::ensure_readable(spec_path);
    std::ifstream spec_in(spec_path);
    const auto specs = parse_distortion_specs(spec_in, spec_path, seed.value_or(0));
    const PlyFormat fmt = format == "ascii" ? PlyFormat::ascii : PlyFormat::binary_le;
    detail::ensure_dir(out_dir);

    if (specs.empty()) io.err << "warning: " << spec_path << " lists no distortions; nothing written\n";
    const PointCloud src = load_ply(in_path);
    nlohmann::json outputs = nlohmann::json::array();
    std::set<std::string> used;
    for (const auto& spec : specs) {
        const std::string file = src.name + "_" + spec.label() + ".ply";
        if (!used.insert(file).second) throw PreconditionError(spec_path + ": duplicate distortion '" + spec.label() + "'");
        const PointCloud dis = apply_distortion(src, spec);
        save_ply(dis, fs::path(out_dir) / file, fmt);
        outputs.push_back(manifest_entry(file, src.name, spec, dis.size()));
        io.out << file << '\t' << dis.size() << " points\n";
    }
    nlohmann::json manifest{{"source", in_path}, {"source_name", src.name}, {"source_points", src.size()},
                            {"outputs", outputs}};
    detail::write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

inline int cmd_snapshot(const std::string& ref_path, const std::optional<std::string>& dis_path,
                        const detail::CommonFlags& flags, const std::string& out_dir, Streams io) {
    detail::ensure_readable(ref_path);
    if (dis_path) detail::ensure_readable(*dis_path);
    const JobConfig cfg = flags.resolve("snapshot");
    const PointCloud ref = load_ply(ref_path);
    const PointCloud dis = dis_path ? load_ply(*dis_path) : ref;
    detail::ensure_dir(out_dir);
    const auto pairs = project_pair(ref, dis, cfg.projection());
    auto save = [&](const std::string& stem, std::size_t n, const ProjectedImage& img) {
        write_png(fs::path(out_dir) / (stem + "_" + std::to_string(n) + ".png"), img.pixels);
        write_png(fs::path(out_dir) / (stem + "_" + std::to_string(n) + "_mask.png"), img.occupancy);
    };
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        save(ref.name, n, pairs[n].ref);
        if (dis_path) save(dis.name, n, pairs[n].dis);
    }
    std::ofstream views(fs::path(out_dir) / "viewpoints.csv");
    write_viewpoints_csv(views, cfg.projection().viewpoints);
    io.out << pairs.size() << " views, canvas " << pairs.front().ref.width() << "x" << pairs.front().ref.height()
           << '\n';
    return 0;
}

inline int cmd_bench(const std::vector<std::string>& score_paths, const std::string& mos_path,
                     const std::vector<std::string>& manifest_paths, const std::string& out_dir,
                     const std::string& zscope, Streams io) {
    for (const auto& p : score_paths) detail::ensure_readable(p);
    detail::ensure_readable(mos_path);
    std::vector<MetricColumn> columns;
    for (const auto& p : score_paths) read_metric_scores(read_csv(p), p, columns);
    const auto raw = read_raw_scores(read_csv(mos_path), mos_path);
    const auto ds = compute_mos(raw, zscope == "session" ? ZScoreScope::per_subject_session : ZScoreScope::per_subject);
    std::optional<Manifest> manifest;
    if (!manifest_paths.empty()) {
        manifest.emplace();
        for (const auto& p : manifest_paths) read_manifest(detail::read_json(p), p, *manifest);
    }
    const EvalResult res = run_benchmark(columns, ds, manifest);

    detail::ensure_dir(out_dir);
    nlohmann::json j = to_json(res);
    j["inputs"] = {{"scores", score_paths}, {"mos", mos_path}, {"manifests", manifest_paths}, {"zscore", zscope}};
    j["config_digest"] = digest(j["inputs"]);
    detail::write_text(fs::path(out_dir) / "report.json", j.dump(2) + "\n");
    detail::write_text(fs::path(out_dir) / "report.md", to_markdown(res));
    detail::write_text(fs::path(out_dir) / "subjects.csv", subjects_csv(res));

    std::ostringstream mos_csv;
    mos_csv << "stimulus_id,mos,std,valid,rejected\n";
    mos_csv.precision(10);
    for (const auto& [id, s] : ds.stimuli) mos_csv << id << ',' << s.mos << ',' << s.stddev << ',' << s.valid << ',' << s.rejected << '\n';
    detail::write_text(fs::path(out_dir) / "mos.csv", mos_csv.str());

    for (const auto& ev : res.metrics)
        io.out << ev.id << "\tPLCC " << ev.overall.plcc << "\tSRCC " << ev.overall.srcc << "\tRMSE " << ev.overall.rmse
               << '\n';
    return 0;
}

inline int cmd_normalize(const std::string& in_path, const std::string& out_path, int steps, const std::string& format,
                         Streams io) {
    detail::ensure_readable(in_path);
    const auto raw = load_ply_raw(in_path);
    const PointCloud cloud = normalize_to_grid(raw, steps, fs::path(in_path).stem().string());
    save_ply(cloud, out_path, format == "ascii" ? PlyFormat::ascii : PlyFormat::binary_le);
    io.out << raw.size() << " -> " << cloud.size() << " points\n";
    return 0;
}

// --------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, Streams io = {std::cout, std::cerr}) {
    CLI::App app{"pcqa: full-reference point cloud quality assessment"};
    app.require_subcommand(1);

    detail::CommonFlags score_flags, snap_flags;
    std::string ref, out, csv, debug_dir;
    std::vector<std::string> dis;
    auto* score = app.add_subcommand("score", "Score distorted clouds against a reference");
    score->add_option("ref", ref, "Reference PLY")->required();
    score->add_option("dis", dis, "Distorted PLY file(s)")->required();
    score_flags.add_to(*score, true);
    score->add_option("--out", out, "JSON report path");
    score->add_option("--csv", csv, "Also write stimulus_id,metric_id,value CSV");
    score->add_option("--debug-maps", debug_dir, "Directory for per-scale quality/weight map PNGs");

    std::string in, spec, out_dir, format = "binary";
    std::optional<std::uint64_t> distort_seed;
    auto* distort = app.add_subcommand("distort", "Generate distorted clouds from a spec file");
    distort->add_option("input", in, "Source PLY")->required();
    distort->add_option("--spec", spec, "Distortion spec file")->required();
    distort->add_option("--out", out_dir, "Output directory")->required();
    distort->add_option("--seed", distort_seed, "Default seed for gaussian lines without seed=");
    distort->add_option("--format", format, "PLY encoding")->check(CLI::IsMember({"ascii", "binary"}));

    std::string snap_ref, snap_out;
    std::optional<std::string> snap_dis;
    auto* snapshot = app.add_subcommand("snapshot", "Write projected views as PNG");
    snapshot->add_option("ref", snap_ref, "Reference PLY")->required();
    snapshot->add_option("dis", snap_dis, "Optional distorted PLY");
    snap_flags.add_to(*snapshot, false);
    snapshot->add_option("--out", snap_out, "Output directory")->required();

    std::vector<std::string> scores, manifests;
    std::string mos, bench_out, zscope = "subject";
    auto* bench = app.add_subcommand("bench", "Evaluate metric scores against subjective data");
    bench->add_option("--scores", scores, "Metric CSV file(s)")->required();
    bench->add_option("--mos", mos, "Raw subjective score CSV")->required();
    bench->add_option("--manifest", manifests, "Distortion manifest JSON file(s)");
    bench->add_option("--out", bench_out, "Report directory")->required();
    bench->add_option("--zscore", zscope, "z-score granularity")->check(CLI::IsMember({"subject", "session"}));

    std::string norm_in, norm_out, norm_format = "binary";
    int steps = 1000;
    auto* normalize = app.add_subcommand("normalize", "Voxelize a raw cloud into a [0, steps] grid");
    normalize->add_option("input", norm_in, "Raw PLY")->required();
    normalize->add_option("output", norm_out, "Output PLY")->required();
    normalize->add_option("--steps", steps, "Grid steps along the longest axis");
    normalize->add_option("--format", norm_format, "PLY encoding")->check(CLI::IsMember({"ascii", "binary"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, io.out, io.err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*score) return cmd_score(ref, dis, score_flags, out, csv, debug_dir, io);
        if (*distort) return cmd_distort(in, spec, out_dir, distort_seed, format, io);
        if (*snapshot) return cmd_snapshot(snap_ref, snap_dis, snap_flags, snap_out, io);
        if (*bench) return cmd_bench(scores, mos, manifests, bench_out, zscope, io);
        if (*normalize) return cmd_normalize(norm_in, norm_out, steps, norm_format, io);
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace pcqa::cli
