#pragma once

// Benchmark harness: joins objective scores with MOS, fits the logistic
// mapping per metric, reports PLCC / SRCC / RMSE overall and per subset, and
// builds the residual F-test significance matrix.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pcqa/csv.hpp"
#include "pcqa/error.hpp"
#include "pcqa/stats.hpp"
#include "pcqa/subjective.hpp"

namespace pcqa {

struct StimulusInfo {
    std::string ref_id;
    std::string distortion;
};

using Manifest = std::map<std::string, StimulusInfo>;

/// Objective scores of one metric keyed by stimulus id.
struct MetricColumn {
    std::string id;
    std::map<std::string, double> values;
};

/// Raised when stimuli cannot be joined across inputs; lists every orphan.
class JoinError : public Error {
public:
    JoinError(const std::string& msg, std::vector<std::string> orphans) : Error(msg), orphans(std::move(orphans)) {}
    std::vector<std::string> orphans;
};

/// Reads `stimulus_id,metric_id,value` rows, keeping metrics in order of
/// first appearance. Appends to `columns` so several files can be merged.
inline void read_metric_scores(const CsvTable& t, const std::string& source, std::vector<MetricColumn>& columns) {
    const int cs = t.column("stimulus_id"), cm = t.column("metric_id"), cv = t.column("value");
    if (cs < 0 || cm < 0 || cv < 0) throw ParseError(source + ": metric CSV needs columns stimulus_id, metric_id, value");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = source + ":" + std::to_string(t.line_numbers[r]);
        const std::string& metric = row[std::size_t(cm)];
        auto it = std::find_if(columns.begin(), columns.end(), [&](const MetricColumn& c) { return c.id == metric; });
        if (it == columns.end()) {
            columns.push_back({metric, {}});
            it = std::prev(columns.end());
        }
        if (!it->values.emplace(row[std::size_t(cs)], parse_double(row[std::size_t(cv)], where)).second)
            throw ParseError(where + ": duplicate score for stimulus '" + row[std::size_t(cs)] + "', metric '" + metric + "'");
    }
}

/// Reads one or more distortion manifests: `{"outputs": [{"stimulus_id",
/// "ref_id", "distortion", ...}, ...]}`.
inline void read_manifest(const nlohmann::json& j, const std::string& source, Manifest& out) {
    if (!j.contains("outputs") || !j["outputs"].is_array())
        throw ParseError(source + ": manifest has no 'outputs' array");
    for (const auto& e : j["outputs"]) {
        if (!e.contains("stimulus_id") || !e.contains("ref_id") || !e.contains("distortion"))
            throw ParseError(source + ": manifest entry lacks stimulus_id, ref_id or distortion");
        const std::string id = e["stimulus_id"].get<std::string>();
        if (!out.emplace(id, StimulusInfo{e["ref_id"].get<std::string>(), e["distortion"].get<std::string>()}).second)
            throw ParseError(source + ": duplicate stimulus '" + id + "' in manifest");
    }
}

struct SubsetCorrelations {
    std::string name;
    std::size_t count = 0;
    std::vector<std::optional<Correlations>> per_metric;  ///< nullopt when undefined (too few / constant)
};

struct MetricEvaluation {
    std::string id;
    LogisticFit fit;
    Correlations overall;
};

struct SubjectPerformance {
    std::string subject;
    double plcc_mean = 0, plcc_std = 0;
    double srcc_mean = 0, srcc_std = 0;
    std::size_t groups = 0;
};

struct EvalResult {
    std::vector<std::string> stimuli;
    std::vector<double> mos;
    std::vector<MetricEvaluation> metrics;
    std::vector<SubsetCorrelations> subsets;  ///< first row is "All"
    std::optional<SignificanceMatrix> significance;
    std::vector<SubjectPerformance> subjects;
    std::vector<std::string> notes;
};

struct BenchOptions {
    LogisticOptions logistic;
    double confidence = 0.95;
};

namespace bench_detail {

inline std::optional<Correlations> safe_correlations(const std::vector<double>& pred, const std::vector<double>& mos) {
    if (pred.size() < 3) return std::nullopt;
    try {
        return correlations(pred, mos);
    } catch (const PreconditionError&) {
        return std::nullopt;
    }
}

/// Correlation of each subject's rescaled ratings with MOS inside each
/// content group, averaged over groups.
inline std::vector<SubjectPerformance> subject_performance(const SubjectiveDataset& ds, const Manifest* manifest) {
    std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>> by_subject;
    for (std::size_t i = 0; i < ds.raw.size(); ++i) {
        const auto& r = ds.raw[i];
        const auto st = ds.stimuli.find(r.stimulus);
        if (st == ds.stimuli.end()) continue;
        std::string group = "all";
        if (manifest) {
            const auto m = manifest->find(r.stimulus);
            if (m == manifest->end()) continue;
            group = m->second.ref_id;
        }
        by_subject[r.subject][group].emplace_back(ds.rescaled[i], st->second.mos);
    }
    std::vector<SubjectPerformance> out;
    for (const auto& [subject, groups] : by_subject) {
        std::vector<double> pl, sr;
        for (const auto& [g, pairs] : groups) {
            std::vector<double> a, b;
            for (const auto& [x, y] : pairs) {
                a.push_back(x);
                b.push_back(y);
            }
            if (auto c = safe_correlations(a, b)) {
                pl.push_back(c->plcc);
                sr.push_back(c->srcc);
            }
        }
        SubjectPerformance sp;
        sp.subject = subject;
        sp.groups = pl.size();
        if (!pl.empty()) {
            sp.plcc_mean = mean_of(pl);
            sp.srcc_mean = mean_of(sr);
            sp.plcc_std = pl.size() > 1 ? std::sqrt(sample_variance(pl)) : 0.0;
            sp.srcc_std = sr.size() > 1 ? std::sqrt(sample_variance(sr)) : 0.0;
        }
        out.push_back(sp);
    }
    return out;
}

}  // namespace bench_detail

inline EvalResult run_benchmark(const std::vector<MetricColumn>& metrics, const SubjectiveDataset& subjective,
                                const std::optional<Manifest>& manifest, const BenchOptions& opt = {}) {
    require(!metrics.empty(), "run_benchmark: no metric scores");
    EvalResult res;
    for (const auto& [stim, s] : subjective.stimuli) {
        res.stimuli.push_back(stim);
        res.mos.push_back(s.mos);
    }

    // Join: every stimulus needs a score from every metric and vice versa.
    std::set<std::string> orphans;
    const std::set<std::string> mos_ids(res.stimuli.begin(), res.stimuli.end());
    for (const auto& col : metrics) {
        for (const auto& id : res.stimuli)
            if (!col.values.count(id)) orphans.insert(id + " (no '" + col.id + "' score)");
        for (const auto& [id, v] : col.values)
            if (!mos_ids.count(id)) orphans.insert(id + " (scored by '" + col.id + "', no MOS)");
    }
    if (manifest)
        for (const auto& id : res.stimuli)
            if (!manifest->count(id)) orphans.insert(id + " (not in manifest)");
    if (!orphans.empty()) {
        std::string msg = "unmatched stimuli:";
        for (const auto& o : orphans) msg += "\n  " + o;
        throw JoinError(msg, {orphans.begin(), orphans.end()});
    }

    for (const auto& col : metrics) {
        std::vector<double> x;
        x.reserve(res.stimuli.size());
        for (const auto& id : res.stimuli) x.push_back(col.values.at(id));
        MetricEvaluation ev;
        ev.id = col.id;
        ev.fit = fit_logistic(x, res.mos, opt.logistic);
        if (ev.fit.fallback) res.notes.push_back("metric '" + col.id + "' is constant; identity mapping used");
        // Undefined correlations (constant prediction) are reported as NaN.
        const double nan = std::numeric_limits<double>::quiet_NaN();
        ev.overall = bench_detail::safe_correlations(ev.fit.mapped, res.mos).value_or(Correlations{nan, nan, nan});
        res.metrics.push_back(std::move(ev));
    }

    // Subsets partition the stimuli by distortion type and by content.
    std::vector<std::pair<std::string, std::vector<std::size_t>>> subsets;
    std::vector<std::size_t> all(res.stimuli.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    subsets.emplace_back("All", all);
    if (manifest) {
        std::map<std::string, std::vector<std::size_t>> by_content, by_distortion;
        for (std::size_t i = 0; i < res.stimuli.size(); ++i) {
            const auto& info = manifest->at(res.stimuli[i]);
            by_content[info.ref_id].push_back(i);
            by_distortion[info.distortion].push_back(i);
        }
        for (auto& [k, v] : by_content) subsets.emplace_back("content:" + k, std::move(v));
        for (auto& [k, v] : by_distortion) subsets.emplace_back("distortion:" + k, std::move(v));
    }
    for (const auto& [name, idx] : subsets) {
        SubsetCorrelations row;
        row.name = name;
        row.count = idx.size();
        for (const auto& ev : res.metrics) {
            std::vector<double> p, m;
            for (auto i : idx) {
                p.push_back(ev.fit.mapped[i]);
                m.push_back(res.mos[i]);
            }
            row.per_metric.push_back(bench_detail::safe_correlations(p, m));
        }
        res.subsets.push_back(std::move(row));
    }

    if (res.stimuli.size() >= 50) {
        std::vector<std::vector<double>> residuals;
        for (const auto& ev : res.metrics) residuals.push_back(ev.fit.residuals);
        res.significance = significance_matrix(residuals, opt.confidence);
    } else {
        res.notes.push_back("significance matrix skipped: needs at least 50 stimuli, have " +
                            std::to_string(res.stimuli.size()));
    }
    res.subjects = bench_detail::subject_performance(subjective, manifest ? &*manifest : nullptr);
    return res;
}

// --------------------------------------------------------------------------
// Reports

inline nlohmann::json to_json(const EvalResult& r) {
    using nlohmann::json;
    json j;
    j["stimuli"] = r.stimuli.size();
    json metrics = json::array();
    for (const auto& ev : r.metrics)
        metrics.push_back({{"metric", ev.id},
                           {"plcc", ev.overall.plcc},
                           {"srcc", ev.overall.srcc},
                           {"rmse", ev.overall.rmse},
                           {"logistic", ev.fit.params.beta},
                           {"identity_fallback", ev.fit.fallback},
                           {"residuals", ev.fit.residuals}});
    j["metrics"] = metrics;
    json subsets = json::array();
    for (const auto& s : r.subsets) {
        json row{{"subset", s.name}, {"count", s.count}};
        json cells = json::object();
        for (std::size_t m = 0; m < r.metrics.size(); ++m) {
            const auto& c = s.per_metric[m];
            cells[r.metrics[m].id] = c ? json{{"plcc", c->plcc}, {"srcc", c->srcc}, {"rmse", c->rmse}} : json(nullptr);
        }
        row["metrics"] = cells;
        subsets.push_back(row);
    }
    j["subsets"] = subsets;
    if (r.significance) {
        json rows = json::array();
        for (const auto& row : *r.significance) {
            std::string s;
            for (auto v : row) s += significance_symbol(v);
            rows.push_back(s);
        }
        j["significance"] = {{"order", [&] {
                                  json ids = json::array();
                                  for (const auto& ev : r.metrics) ids.push_back(ev.id);
                                  return ids;
                              }()},
                             {"rows", rows}};
    }
    j["notes"] = r.notes;
    return j;
}

namespace bench_detail {

inline std::string fmt(double v, int prec) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

}  // namespace bench_detail

/// Markdown tables: one each for PLCC, SRCC and RMSE (rows are subsets,
/// columns are metrics, "All" last), then the significance matrix.
inline std::string to_markdown(const EvalResult& r) {
    std::ostringstream os;
    auto header = [&] {
        os << "| Subset |";
        for (const auto& ev : r.metrics) os << ' ' << ev.id << " |";
        os << "\n|---|";
        for (std::size_t i = 0; i < r.metrics.size(); ++i) os << "---|";
        os << '\n';
    };
    std::vector<std::size_t> order;
    for (std::size_t i = 1; i < r.subsets.size(); ++i) order.push_back(i);
    order.push_back(0);

    const char* names[] = {"PLCC", "SRCC", "RMSE"};
    for (int which = 0; which < 3; ++which) {
        os << "## " << names[which] << "\n\n";
        header();
        for (auto si : order) {
            const auto& s = r.subsets[si];
            os << "| " << s.name << " |";
            for (const auto& c : s.per_metric) {
                if (!c) {
                    os << " n/a |";
                    continue;
                }
                const double v = which == 0 ? c->plcc : which == 1 ? c->srcc : c->rmse;
                os << ' ' << bench_detail::fmt(v, which == 2 ? 2 : 4) << " |";
            }
            os << '\n';
        }
        os << '\n';
    }
    if (r.significance) {
        os << "## Significance (row vs column, 1 = better, 0 = worse, - = indistinguishable)\n\n";
        os << "| |";
        for (const auto& ev : r.metrics) os << ' ' << ev.id << " |";
        os << "\n|---|";
        for (std::size_t i = 0; i < r.metrics.size(); ++i) os << "---|";
        os << '\n';
        for (std::size_t i = 0; i < r.metrics.size(); ++i) {
            os << "| " << r.metrics[i].id << " |";
            for (auto v : (*r.significance)[i]) os << ' ' << significance_symbol(v) << " |";
            os << '\n';
        }
        os << '\n';
    }
    for (const auto& n : r.notes) os << "> " << n << '\n';
    return os.str();
}

inline std::string subjects_csv(const EvalResult& r) {
    std::ostringstream os;
    os << "subject_id,groups,plcc_mean,plcc_std,srcc_mean,srcc_std\n";
    os << std::setprecision(10);
    for (const auto& s : r.subjects)
        os << s.subject << ',' << s.groups << ',' << s.plcc_mean << ',' << s.plcc_std << ',' << s.srcc_mean << ','
           << s.srcc_std << '\n';
    return os.str();
}

}  // namespace pcqa
