#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace pcqa;
using namespace pcqa::testing;

namespace {

/// Normal quantiles Phi^-1((i - 0.5) / n) by bisection on erfc.
std::vector<double> normal_quantiles(int n) {
    std::vector<double> q;
    for (int i = 1; i <= n; ++i) {
        const double p = (i - 0.5) / n;
        double lo = -10, hi = 10;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
        }
        q.push_back(0.5 * (lo + hi));
    }
    return q;
}

struct Fixture {
    std::vector<RawScore> raw;
    std::vector<double> base;  ///< per stimulus
    Manifest manifest;
    std::vector<std::string> ids;
};

/// 12 stimuli = 2 contents x 2 distortions x 3 levels, 4 subjects whose
/// ratings are the stimulus base value plus a per-subject offset, so every
/// subject's z-scores coincide.
Fixture consistent_fixture() {
    Fixture f;
    int k = 0;
    for (std::string content : {"apple", "bird"})
        for (std::string dist : {"downsample", "gaussian"})
            for (int lv = 0; lv < 3; ++lv, ++k) {
                const std::string id = content + "_" + dist + std::to_string(lv);
                f.ids.push_back(id);
                f.base.push_back(20.0 + 5.0 * k + (k % 3) * 1.5);
                f.manifest[id] = {content, dist};
            }
    for (int s = 0; s < 4; ++s)
        for (std::size_t i = 0; i < f.ids.size(); ++i)
            f.raw.push_back({f.ids[i], "subj" + std::to_string(s), "", f.base[i] + 3.0 * s});
    return f;
}

MetricColumn column(const std::string& id, const std::vector<std::string>& ids, const std::vector<double>& v) {
    MetricColumn c{id, {}};
    for (std::size_t i = 0; i < ids.size(); ++i) c.values[ids[i]] = v[i];
    return c;
}

}  // namespace

TEST(Bt500, OneWildScoreAmong29) {
    // 29 ratings at normal quantiles plus one at +3: hand check of the rule.
    auto z = normal_quantiles(29);
    z.push_back(3.0);
    double mean = 0;
    for (double v : z) mean += v;
    mean /= 30;
    double m2 = 0, m4 = 0;
    for (double v : z) {
        m2 += (v - mean) * (v - mean);
        m4 += std::pow(v - mean, 4);
    }
    const double s = std::sqrt(m2 / 29), kurt = (m4 / 30) / ((m2 / 30) * (m2 / 30));
    ASSERT_GE(kurt, 2.0);
    ASSERT_LE(kurt, 4.0);  // the 2 s branch applies
    ASSERT_GT(std::abs(3.0 - mean), 2 * s);
    for (int i = 0; i < 29; ++i) ASSERT_LT(std::abs(z[std::size_t(i)] - mean), 2 * s);

    EXPECT_EQ(bt500_outliers(z), std::vector<std::size_t>{29});
}

TEST(Bt500, HeavyTailsUseWiderThreshold) {
    // 32 zeros and 4 each at +-1: kurtosis 5, s = sqrt(8 / 39). The +-1
    // scores sit beyond 2 s but well inside sqrt(20) s.
    std::vector<double> v(40, 0.0);
    for (int i = 0; i < 4; ++i) {
        v[std::size_t(i)] = 1;
        v[std::size_t(4 + i)] = -1;
    }
    ASSERT_GT(1.0, 2 * std::sqrt(8.0 / 39));
    EXPECT_TRUE(bt500_outliers(v).empty());
    v.push_back(40);
    EXPECT_EQ(bt500_outliers(v), std::vector<std::size_t>{40});
    EXPECT_TRUE(bt500_outliers(std::vector<double>(10, 5.0)).empty());
}

TEST(Mos, IdenticalScoresGiveCommonValue) {
    std::vector<RawScore> raw;
    for (int s = 0; s < 5; ++s)
        for (int i = 0; i < 4; ++i) raw.push_back({"st" + std::to_string(i), "u" + std::to_string(s), "", 70});
    const auto ds = compute_mos(raw);
    for (const auto& [id, m] : ds.stimuli) {
        EXPECT_EQ(m.mos, 50.0);
        EXPECT_EQ(m.stddev, 0.0);
        EXPECT_EQ(m.valid, 5u);
    }
}

TEST(Mos, WildScoreRejectedPerStimulus) {
    // Latin square: subject j gives stimulus i the value base[(i + j) % 30],
    // so every subject's multiset (hence z transform) is the same and each
    // stimulus sees exactly one wild rating.
    auto q = normal_quantiles(29);
    q.push_back(3.0);
    std::vector<RawScore> raw;
    for (int j = 0; j < 30; ++j)
        for (int i = 0; i < 30; ++i)
            raw.push_back({"s" + std::to_string(i), "u" + std::to_string(j), "", 50 + 10 * q[std::size_t((i + j) % 30)]});
    const auto ds = compute_mos(raw);
    ASSERT_EQ(ds.stimuli.size(), 30u);
    for (const auto& [id, m] : ds.stimuli) {
        EXPECT_EQ(m.valid, 29u) << id;
        EXPECT_EQ(m.rejected, 1u);
        EXPECT_GE(m.mos, 0.0);
        EXPECT_LE(m.mos, 100.0);
        // Survivors are symmetric quantiles, so their mean sits midway between
        // the rescaling bounds.
        EXPECT_NEAR(m.mos, 50.0, 1e-9);
    }
    // Survivors span [0, 100] after rescaling; all stimuli share the same MOS.
    const double first = ds.stimuli.begin()->second.mos;
    for (const auto& [id, m] : ds.stimuli) EXPECT_NEAR(m.mos, first, 1e-9);
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 0; i < ds.raw.size(); ++i)
        if (ds.valid[i]) {
            lo = std::min(lo, ds.rescaled[i]);
            hi = std::max(hi, ds.rescaled[i]);
        }
    EXPECT_NEAR(lo, 0, 1e-12);
    EXPECT_NEAR(hi, 100, 1e-12);
}

TEST(Mos, OrderInvariantAndSessionScope) {
    auto f = consistent_fixture();
    const auto a = compute_mos(f.raw);
    auto shuffled = f.raw;
    std::mt19937_64 rng(1);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto b = compute_mos(shuffled);
    for (const auto& [id, m] : a.stimuli) EXPECT_NEAR(m.mos, b.stimuli.at(id).mos, 1e-9);

    // Split subj0 into two sessions with different offsets: per-session
    // z-scores remove the offset, per-subject ones do not.
    auto sessions = f.raw;
    for (auto& r : sessions)
        if (r.subject == "subj0" && r.stimulus.find("bird") != std::string::npos) {
            r.session = "b";
            r.score += 20;
        }
    const auto per_subject = compute_mos(sessions, ZScoreScope::per_subject);
    const auto per_session = compute_mos(sessions, ZScoreScope::per_subject_session);
    EXPECT_FALSE(per_subject.z == per_session.z);
}

TEST(Mos, TooFewValidScoresIsAnError) {
    std::vector<RawScore> raw{{"a", "u1", "", 10}, {"b", "u1", "", 20}, {"b", "u2", "", 30}};
    EXPECT_THROW(compute_mos(raw), PreconditionError);
    EXPECT_THROW(compute_mos({}), PreconditionError);
}

TEST(Mos, CsvReader) {
    std::istringstream in("stimulus_id,subject_id,raw_score,session_id\nx,u1,40,1\nx,u2,55.5,2\n");
    const auto raw = read_raw_scores(read_csv(in, "mos.csv"), "mos.csv");
    ASSERT_EQ(raw.size(), 2u);
    EXPECT_EQ(raw[1].score, 55.5);
    EXPECT_EQ(raw[1].session, "2");
    std::istringstream bad("stimulus_id,subject_id,raw_score\nx,u1,forty\n");
    try {
        read_raw_scores(read_csv(bad, "m.csv"), "m.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("m.csv:2"), std::string::npos) << e.what();
    }
}

TEST(Benchmark, PerfectMetricAndGoldenMarkdown) {
    const auto f = consistent_fixture();
    const auto ds = compute_mos(f.raw);
    const std::vector<MetricColumn> metrics{column("perfect", f.ids, f.base),
                                            column("flat", f.ids, std::vector<double>(f.ids.size(), 0.5))};
    const auto r = run_benchmark(metrics, ds, f.manifest);
    EXPECT_NEAR(r.metrics[0].overall.plcc, 1, 1e-6);
    EXPECT_NEAR(r.metrics[0].overall.srcc, 1, 1e-12);
    EXPECT_TRUE(r.metrics[1].fit.fallback);
    EXPECT_TRUE(std::isnan(r.metrics[1].overall.plcc));
    EXPECT_FALSE(r.significance.has_value());

    const std::string golden =
        "## PLCC\n\n"
        "| Subset | perfect | flat |\n|---|---|---|\n"
        "| content:apple | 1.0000 | n/a |\n"
        "| content:bird | 1.0000 | n/a |\n"
        "| distortion:downsample | 1.0000 | n/a |\n"
        "| distortion:gaussian | 1.0000 | n/a |\n"
        "| All | 1.0000 | n/a |\n\n"
        "## SRCC\n\n"
        "| Subset | perfect | flat |\n|---|---|---|\n"
        "| content:apple | 1.0000 | n/a |\n"
        "| content:bird | 1.0000 | n/a |\n"
        "| distortion:downsample | 1.0000 | n/a |\n"
        "| distortion:gaussian | 1.0000 | n/a |\n"
        "| All | 1.0000 | n/a |\n\n"
        "## RMSE\n\n"
        "| Subset | perfect | flat |\n|---|---|---|\n"
        "| content:apple | 0.00 | n/a |\n"
        "| content:bird | 0.00 | n/a |\n"
        "| distortion:downsample | 0.00 | n/a |\n"
        "| distortion:gaussian | 0.00 | n/a |\n"
        "| All | 0.00 | n/a |\n\n"
        "> metric 'flat' is constant; identity mapping used\n"
        "> significance matrix skipped: needs at least 50 stimuli, have 12\n";
    EXPECT_EQ(to_markdown(r), golden);

    const auto j = to_json(r);
    EXPECT_EQ(j["stimuli"], 12);
    EXPECT_EQ(j["subsets"][0]["subset"], "All");
    EXPECT_TRUE(j["subsets"][0]["metrics"]["flat"].is_null());
}

TEST(Benchmark, SubsetsPartitionTheStimuli) {
    const auto f = consistent_fixture();
    const auto r = run_benchmark({column("m", f.ids, f.base)}, compute_mos(f.raw), f.manifest);
    std::size_t content = 0, distortion = 0;
    for (const auto& s : r.subsets) {
        if (s.name.rfind("content:", 0) == 0) content += s.count;
        if (s.name.rfind("distortion:", 0) == 0) distortion += s.count;
    }
    EXPECT_EQ(content, f.ids.size());
    EXPECT_EQ(distortion, f.ids.size());
    EXPECT_EQ(r.subsets[0].count, f.ids.size());
}

TEST(Benchmark, OrphansAreListed) {
    const auto f = consistent_fixture();
    auto col = column("m", f.ids, f.base);
    col.values.erase(f.ids[3]);
    col.values["ghost"] = 1.0;
    try {
        run_benchmark({col}, compute_mos(f.raw), f.manifest);
        FAIL();
    } catch (const JoinError& e) {
        ASSERT_EQ(e.orphans.size(), 2u);
        EXPECT_NE(std::string(e.what()).find(f.ids[3]), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    }
    Manifest partial = f.manifest;
    partial.erase(f.ids[0]);
    EXPECT_THROW(run_benchmark({column("m", f.ids, f.base)}, compute_mos(f.raw), partial), JoinError);
}

TEST(Benchmark, SignificanceFromFiftyStimuli) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0, 1);
    std::vector<RawScore> raw;
    std::vector<std::string> ids;
    std::vector<double> quality;
    for (int i = 0; i < 60; ++i) {
        ids.push_back("st" + std::to_string(i));
        quality.push_back(i);
        for (int s = 0; s < 6; ++s) raw.push_back({ids.back(), "u" + std::to_string(s), "", i + 4 * n(rng)});
    }
    const auto ds = compute_mos(raw);
    std::vector<double> good, bad;
    for (int i = 0; i < 60; ++i) {
        good.push_back(quality[std::size_t(i)] + n(rng));
        bad.push_back(quality[std::size_t(i)] + 40 * n(rng));
    }
    const auto r = run_benchmark({column("good", ids, good), column("bad", ids, bad)}, ds, std::nullopt);
    ASSERT_TRUE(r.significance.has_value());
    EXPECT_EQ((*r.significance)[0][1], Significance::better);
    EXPECT_EQ((*r.significance)[1][0], Significance::worse);
    EXPECT_EQ(r.subsets.size(), 1u);
    EXPECT_EQ(r.subjects.size(), 6u);
}

TEST(Benchmark, ScoreAndManifestReaders) {
    std::istringstream in("stimulus_id,metric_id,value\na,m1,0.5\nb,m1,0.7\na,m2,3\n");
    std::vector<MetricColumn> cols;
    read_metric_scores(read_csv(in, "s.csv"), "s.csv", cols);
    ASSERT_EQ(cols.size(), 2u);
    EXPECT_EQ(cols[0].values.at("b"), 0.7);
    std::istringstream dup("stimulus_id,metric_id,value\na,m1,0.5\n");
    EXPECT_THROW(read_metric_scores(read_csv(dup, "d.csv"), "d.csv", cols), ParseError);

    Manifest m;
    read_manifest(nlohmann::json::parse(R"({"outputs":[{"stimulus_id":"a","ref_id":"r","distortion":"gaussian"}]})"),
                  "m.json", m);
    EXPECT_EQ(m.at("a").ref_id, "r");
    EXPECT_THROW(read_manifest(nlohmann::json::parse(R"({"files":[]})"), "m.json", m), ParseError);
}
