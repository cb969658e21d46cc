#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "test_support.hpp"

using namespace pcqa;
using namespace pcqa::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "pcqa");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(int(argv.size()), argv.data(), {out, err});
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, ScoreSelfPair) {
    TempDir dir("cli_score");
    auto c = sphere_cloud(20);
    c.name = "ball";
    save_ply(c, dir / "ball.ply");
    const auto r = run({"score", (dir / "ball.ply").string(), (dir / "ball.ply").string(), "--views", "0", "--metric",
                        "ssimp,psnr_y,p2po_mse", "--out", (dir / "r.json").string(), "--csv", (dir / "r.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(read_text(dir / "r.json"));
    ASSERT_EQ(j["records"].size(), 3u);
    EXPECT_EQ(j["records"][0]["metric"], "ssimp");
    EXPECT_EQ(j["records"][0]["value"], 1.0);
    EXPECT_EQ(j["records"][0]["per_view"].size(), 12u);
    EXPECT_EQ(j["records"][1]["value"], kPsnrCap);
    EXPECT_EQ(j["records"][2]["value"], kPsnrCap);
    EXPECT_EQ(j["records"][2]["metadata"]["error"], 0.0);
    EXPECT_EQ(j["config_digest"], j["records"][0]["config_digest"]);
    EXPECT_EQ(read_text(dir / "r.csv").substr(0, 28), "stimulus_id,metric_id,value\n");
}

TEST(Cli, ScoreErrors) {
    TempDir dir("cli_err");
    const auto missing = run({"score", (dir / "nope.ply").string(), (dir / "nope.ply").string()});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("no such file"), std::string::npos);

    save_ply(sphere_cloud(10), dir / "a.ply");
    const auto a = (dir / "a.ply").string();
    EXPECT_EQ(run({"score", a, a, "--metric", "bogus"}).code, 1);
    EXPECT_EQ(run({"score", a, a, "--views", "5"}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, DistortLadderAndManifest) {
    TempDir dir("cli_distort");
    auto c = sphere_cloud(30);
    save_ply(c, dir / "src.ply");
    write_text(dir / "spec.txt", "downsample 7\ndownsample 8\ndownsample 9\ngaussian 1 8 seed=4\n");
    const std::vector<std::string> args{"distort", (dir / "src.ply").string(), "--spec", (dir / "spec.txt").string(),
                                        "--out", (dir / "out").string()};
    ASSERT_EQ(run(args).code, 0);
    const auto j = nlohmann::json::parse(read_text(dir / "out" / "manifest.json"));
    ASSERT_EQ(j["outputs"].size(), 4u);
    EXPECT_EQ(j["outputs"][0]["file"], "src_downsample_N7.ply");
    EXPECT_EQ(j["outputs"][3]["seed"], 4);
    const auto n7 = load_ply(dir / "out" / "src_downsample_N7.ply");
    EXPECT_EQ(n7, octree_downsample(c, 7));
    EXPECT_EQ(load_ply(dir / "out" / "src_gaussian_g1_c8_s4.ply"), gaussian_noise(c, 1, 8, 4));

    const auto first = read_text(dir / "out" / "src_gaussian_g1_c8_s4.ply");
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(read_text(dir / "out" / "src_gaussian_g1_c8_s4.ply"), first);
    EXPECT_EQ(read_text(dir / "out" / "manifest.json"), j.dump(2) + "\n");
}

TEST(Cli, DistortEdgeCases) {
    TempDir dir("cli_distort2");
    save_ply(sphere_cloud(10), dir / "src.ply");
    write_text(dir / "empty.txt", "# nothing\n");
    const auto r = run({"distort", (dir / "src.ply").string(), "--spec", (dir / "empty.txt").string(), "--out",
                        (dir / "o").string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);

    write_text(dir / "bad.txt", "downsample 7\nblur 2\n");
    const auto b = run({"distort", (dir / "src.ply").string(), "--spec", (dir / "bad.txt").string(), "--out",
                        (dir / "o").string()});
    EXPECT_EQ(b.code, 1);
    EXPECT_NE(b.err.find("bad.txt:2:"), std::string::npos) << b.err;
}

TEST(Cli, BenchPerfectMetric) {
    TempDir dir("cli_bench");
    std::string scores = "stimulus_id,metric_id,value\n", mos = "stimulus_id,subject_id,raw_score\n";
    for (int i = 0; i < 8; ++i) {
        const std::string id = "st" + std::to_string(i);
        scores += id + ",good," + std::to_string(i * 3 + 1) + "\n";
        for (int s = 0; s < 3; ++s) mos += id + ",u" + std::to_string(s) + "," + std::to_string(10 * i + s) + "\n";
    }
    write_text(dir / "scores.csv", scores);
    write_text(dir / "mos.csv", mos);
    const auto r = run({"bench", "--scores", (dir / "scores.csv").string(), "--mos", (dir / "mos.csv").string(),
                        "--out", (dir / "rep").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(read_text(dir / "rep" / "report.json"));
    EXPECT_NEAR(j["metrics"][0]["plcc"].get<double>(), 1.0, 1e-6);
    EXPECT_NEAR(j["metrics"][0]["srcc"].get<double>(), 1.0, 1e-12);
    for (const char* f : {"report.md", "subjects.csv", "mos.csv"}) EXPECT_TRUE(fs::exists(dir / "rep" / f)) << f;

    write_text(dir / "extra.csv", "stimulus_id,metric_id,value\nghost,good,1\n");
    const auto bad = run({"bench", "--scores", (dir / "scores.csv").string(), (dir / "extra.csv").string(), "--mos",
                          (dir / "mos.csv").string(), "--out", (dir / "rep2").string()});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("ghost"), std::string::npos);
}

TEST(Cli, SnapshotAndNormalize) {
    TempDir dir("cli_snap");
    save_ply(cube_cloud(12), dir / "c.ply");
    const auto r = run({"snapshot", (dir / "c.ply").string(), "--views", "0", "--out", (dir / "png").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "png" / "c_0.png"));
    EXPECT_TRUE(fs::exists(dir / "png" / "c_11_mask.png"));
    EXPECT_TRUE(fs::exists(dir / "png" / "viewpoints.csv"));
    EXPECT_EQ(read_text(dir / "png" / "c_0.png").substr(1, 3), "PNG");

    write_text(dir / "raw.ply",
               "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
               "0 0 0 1 2 3\n0.5 0.25 0 4 5 6\n0.5 0.25 0.0001 7 8 9\n");
    const auto n = run({"normalize", (dir / "raw.ply").string(), (dir / "n.ply").string(), "--steps", "10"});
    ASSERT_EQ(n.code, 0) << n.err;
    const auto c = load_ply(dir / "n.ply");
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[1].g, (Coord{10, 5, 0}));
}
