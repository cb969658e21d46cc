#pragma once

// Subjective score processing: per-subject z-scores, score-level BT.500
// outlier rejection, rescaling to [0, 100], and MOS.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcqa/csv.hpp"
#include "pcqa/error.hpp"

namespace pcqa {

struct RawScore {
    std::string stimulus;
    std::string subject;
    std::string session;  ///< empty when sessions are not recorded
    double score = 0;
};

enum class ZScoreScope { per_subject, per_subject_session };

struct StimulusMos {
    double mos = 0;
    double stddev = 0;  ///< sample standard deviation of the rescaled valid scores
    std::size_t valid = 0;
    std::size_t rejected = 0;
};

struct SubjectiveDataset {
    std::vector<RawScore> raw;
    std::vector<double> z;         ///< parallel to raw
    std::vector<bool> valid;       ///< parallel to raw; false = rejected outlier
    std::vector<double> rescaled;  ///< parallel to raw, in [0, 100] for valid scores
    std::map<std::string, StimulusMos> stimuli;
};

/// Indices of scores rejected by the BT.500 screening rule: a score is an
/// outlier when it lies more than 2 s (kurtosis in [2, 4]) or sqrt(20) s
/// (otherwise) from the stimulus mean, s the (n - 1) standard deviation and
/// the kurtosis m4 / m2^2 from population moments.
inline std::vector<std::size_t> bt500_outliers(std::span<const double> scores) {
    const std::size_t n = scores.size();
    if (n < 2) return {};
    double mean = 0;
    for (double v : scores) mean += v;
    mean /= double(n);
    double m2 = 0, m4 = 0;
    for (double v : scores) {
        const double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double s = std::sqrt(m2 / double(n - 1));
    if (m2 == 0) return {};
    m2 /= double(n);
    m4 /= double(n);
    const double kurtosis = m4 / (m2 * m2);
    const double k = (kurtosis >= 2.0 && kurtosis <= 4.0) ? 2.0 : std::sqrt(20.0);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(scores[i] - mean) > k * s) out.push_back(i);
    return out;
}

inline SubjectiveDataset compute_mos(std::vector<RawScore> raw, ZScoreScope scope = ZScoreScope::per_subject) {
    require(!raw.empty(), "compute_mos: no scores");
    SubjectiveDataset ds;
    ds.raw = std::move(raw);
    const std::size_t n = ds.raw.size();
    ds.z.assign(n, 0.0);
    ds.valid.assign(n, true);
    ds.rescaled.assign(n, 0.0);

    // z-normalize within each subject (or subject x session).
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        std::string key = ds.raw[i].subject;
        if (scope == ZScoreScope::per_subject_session) key += '\x1f' + ds.raw[i].session;
        groups[key].push_back(i);
    }
    for (const auto& [key, idx] : groups) {
        double m = 0;
        for (auto i : idx) m += ds.raw[i].score;
        m /= double(idx.size());
        double v = 0;
        for (auto i : idx) v += (ds.raw[i].score - m) * (ds.raw[i].score - m);
        const double sd = idx.size() > 1 ? std::sqrt(v / double(idx.size() - 1)) : 0.0;
        for (auto i : idx) ds.z[i] = sd > 0 ? (ds.raw[i].score - m) / sd : 0.0;
    }

    // Score-level screening per stimulus; subjects are never dropped wholesale.
    std::map<std::string, std::vector<std::size_t>> per_stimulus;
    for (std::size_t i = 0; i < n; ++i) per_stimulus[ds.raw[i].stimulus].push_back(i);
    for (const auto& [stim, idx] : per_stimulus) {
        std::vector<double> zs;
        zs.reserve(idx.size());
        for (auto i : idx) zs.push_back(ds.z[i]);
        for (auto k : bt500_outliers(zs)) ds.valid[idx[k]] = false;
    }

    // Global min-max rescale of the surviving z-scores.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i)
        if (ds.valid[i]) {
            lo = std::min(lo, ds.z[i]);
            hi = std::max(hi, ds.z[i]);
        }
    for (std::size_t i = 0; i < n; ++i) ds.rescaled[i] = hi > lo ? 100.0 * (ds.z[i] - lo) / (hi - lo) : 50.0;

    for (const auto& [stim, idx] : per_stimulus) {
        StimulusMos s;
        double sum = 0;
        for (auto i : idx) {
            if (!ds.valid[i]) {
                ++s.rejected;
                continue;
            }
            sum += ds.rescaled[i];
            ++s.valid;
        }
        if (s.valid < 2)
            throw PreconditionError("compute_mos: stimulus '" + stim + "' has " + std::to_string(s.valid) +
                                    " valid score(s) after outlier removal");
        s.mos = sum / double(s.valid);
        double v = 0;
        for (auto i : idx)
            if (ds.valid[i]) v += (ds.rescaled[i] - s.mos) * (ds.rescaled[i] - s.mos);
        s.stddev = std::sqrt(v / double(s.valid - 1));
        ds.stimuli[stim] = s;
    }
    return ds;
}

/// Reads `stimulus_id,subject_id,raw_score[,session_id]`.
inline std::vector<RawScore> read_raw_scores(const CsvTable& t, const std::string& source) {
    const int cs = t.column("stimulus_id"), cu = t.column("subject_id"), cr = t.column("raw_score"),
              ce = t.column("session_id");
    if (cs < 0 || cu < 0 || cr < 0)
        throw ParseError(source + ": MOS CSV needs columns stimulus_id, subject_id, raw_score");
    std::vector<RawScore> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = source + ":" + std::to_string(t.line_numbers[r]);
        out.push_back({row[std::size_t(cs)], row[std::size_t(cu)], ce >= 0 ? row[std::size_t(ce)] : std::string{},
                       parse_double(row[std::size_t(cr)], where)});
    }
    return out;
}

}  // namespace pcqa
