#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "robopose/cli.hpp"
#include "robopose/pipeline.hpp"
#include "robopose/raster_io.hpp"

using namespace robopose;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "robopose");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(CliGenerate, CountZeroGivesEmptyManifest) {
    const auto dir = oracle::temp_dir("cli_zero");
    EXPECT_EQ(run({"generate", "--count", "0", "--seed", "1", "--out", (dir / "c").string()}), 0);
    EXPECT_EQ(oracle::read_file(dir / "c" / "manifest.jsonl"), "");
}

TEST(CliGenerate, RepeatableAndIndependentOfJobs) {
    const auto dir = oracle::temp_dir("cli_repeat");
    ASSERT_EQ(run({"generate", "--count", "6", "--seed", "42", "--out", (dir / "a").string()}), 0);
    ASSERT_EQ(run({"generate", "--count", "6", "--seed", "42", "--out", (dir / "b").string(), "--jobs", "3"}), 0);
    EXPECT_EQ(oracle::snapshot(dir / "a"), oracle::snapshot(dir / "b"));
    ASSERT_EQ(run({"generate", "--count", "6", "--seed", "43", "--out", (dir / "c").string()}), 0);
    EXPECT_NE(oracle::read_file(dir / "a" / "manifest.jsonl"), oracle::read_file(dir / "c" / "manifest.jsonl"));
}

TEST(CliGenerate, ManifestFeedsTheSegmentationSide) {
    // The learning component reads manifest lines, frames and masks from disk.
    const auto dir = oracle::temp_dir("cli_manifest");
    ASSERT_EQ(run({"generate", "--count", "4", "--seed", "7", "--out", dir.string()}), 0);
    std::ifstream in(dir / "manifest.jsonl");
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        const json r = json::parse(line);
        EXPECT_EQ(r["id"], cli::record_id(n));
        for (const char* k : {"spec", "truth", "vessel_mask_path", "robot_mask_path", "frame_path"})
            ASSERT_TRUE(r.contains(k)) << k;
        const PixelGrid v = load_mask(dir / r["vessel_mask_path"].get<std::string>());
        const PixelGrid m = load_mask(dir / r["robot_mask_path"].get<std::string>());
        const GrayImage f = read_gray_image(dir / r["frame_path"].get<std::string>());
        EXPECT_EQ(v.width(), f.width);
        EXPECT_EQ(m.height(), f.height);
        EXPECT_GT(m.count(), 0u);
        ++n;
    }
    EXPECT_EQ(n, 4);
    EXPECT_EQ(cli::read_manifest(dir / "manifest.jsonl").size(), 4u);
}

TEST(CliGenerate, InvalidSpecFails) {
    const auto dir = oracle::temp_dir("cli_badspec");
    std::ofstream(dir / "spec.json") << R"({"width": 10})";
    EXPECT_EQ(run({"generate", "--spec", (dir / "spec.json").string(), "--out", (dir / "o").string()}), 1);
    std::ofstream(dir / "typo.json") << R"({"widht": 320})";
    EXPECT_EQ(run({"generate", "--spec", (dir / "typo.json").string(), "--out", (dir / "o").string()}), 1);
}

TEST(CliPerceive, ExitCodes) {
    const auto dir = oracle::temp_dir("cli_perceive");
    phantom::PhantomSpec s;
    s.vessel_control_points = {{-40, 120}, {80, 120}, {200, 120}, {360, 120}};
    const auto ph = phantom::generate(s);
    save_mask(dir / "v.png", ph.vessel_mask);
    save_mask(dir / "r.png", ph.robot_mask);
    save_mask(dir / "empty.png", PixelGrid(320, 240));
    save_mask(dir / "small.png", PixelGrid(20, 20));

    ASSERT_EQ(run({"perceive", (dir / "v.png").string(), (dir / "r.png").string(), "--out", (dir / "rep.json").string()}),
              0);
    EXPECT_EQ(json::parse(oracle::read_file(dir / "rep.json"))["state"], "A");
    EXPECT_EQ(run({"perceive", (dir / "v.png").string(), (dir / "empty.png").string()}), 2);
    EXPECT_EQ(run({"perceive", (dir / "v.png").string(), (dir / "small.png").string()}), 1);
    EXPECT_EQ(run({"perceive", (dir / "v.png").string(), (dir / "missing.png").string()}), 1);
    std::ofstream(dir / "cfg.json") << R"({"pose": {"bogus": 1}})";
    EXPECT_EQ(run({"perceive", (dir / "v.png").string(), (dir / "r.png").string(), "--config",
                   (dir / "cfg.json").string()}),
              1);
    EXPECT_EQ(run({"perceive", (dir / "v.png").string(), (dir / "r.png").string(), "--overlay",
                   (dir / "ov.png").string(), "--out", (dir / "rep2.json").string()}),
              0);
    EXPECT_EQ(read_gray_image(dir / "ov.png").width, 320);
    EXPECT_EQ(run({"nonsense"}), 1);
}

TEST(CliPerceive, BatchMatchesLibraryCalls) {
    const auto dir = oracle::temp_dir("cli_batch");
    ASSERT_EQ(run({"generate", "--count", "12", "--seed", "3", "--out", dir.string()}), 0);
    ASSERT_EQ(run({"perceive", "--manifest", (dir / "manifest.jsonl").string(), "--out-dir", (dir / "rep").string(),
                   "--jobs", "4"}),
              0);
    for (const auto& r : cli::read_manifest(dir / "manifest.jsonl")) {
        const auto p = perceive(load_mask(dir / r.vessel_mask_path), load_mask(dir / r.robot_mask_path));
        EXPECT_EQ(oracle::read_file(dir / "rep" / (r.id + ".json")), cli::report_text(pose_report(p)));
    }
}

TEST(CliEvaluate, PerfectReportsAndMissingIds) {
    const auto dir = oracle::temp_dir("cli_eval");
    ASSERT_EQ(run({"generate", "--count", "8", "--seed", "5", "--out", dir.string()}), 0);
    fs::create_directories(dir / "truth");
    for (const auto& r : cli::read_manifest(dir / "manifest.jsonl")) {
        json rep{{"head", {r.truth.head.x, r.truth.head.y}},
                 {"theta_deg", r.truth.theta_true},
                 {"state", std::string(to_string(r.truth.state_true))}};
        std::ofstream(dir / "truth" / (r.id + ".json")) << rep.dump();
    }
    ASSERT_EQ(run({"evaluate", "--manifest", (dir / "manifest.jsonl").string(), "--reports", (dir / "truth").string(),
                   "--out", (dir / "eval.json").string()}),
              0);
    const json e = json::parse(oracle::read_file(dir / "eval.json"));
    EXPECT_DOUBLE_EQ(e["classification"]["accuracy"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(e["angle"]["error_stats"]["mean"].get<double>(), 0.0);
    EXPECT_TRUE(fs::exists(dir / "eval_bland_altman.csv"));
    EXPECT_TRUE(fs::exists(dir / "eval_histogram.csv"));

    fs::remove(dir / "truth" / "ph00003.json");
    testing::internal::CaptureStderr();
    EXPECT_EQ(run({"evaluate", "--manifest", (dir / "manifest.jsonl").string(), "--reports",
                   (dir / "truth").string(), "--out", (dir / "eval2.json").string()}),
              1);
    EXPECT_NE(testing::internal::GetCapturedStderr().find("ph00003"), std::string::npos);
}

TEST(CliEvaluate, SingleRecordMarksInsufficientDataNull) {
    const auto dir = oracle::temp_dir("cli_single");
    ASSERT_EQ(run({"generate", "--count", "1", "--seed", "5", "--out", dir.string()}), 0);
    ASSERT_EQ(run({"perceive", "--manifest", (dir / "manifest.jsonl").string(), "--out-dir", (dir / "rep").string()}), 0);
    ASSERT_EQ(run({"evaluate", "--manifest", (dir / "manifest.jsonl").string(), "--reports", (dir / "rep").string(),
                   "--out", (dir / "e.json").string()}),
              0);
    const json e = json::parse(oracle::read_file(dir / "e.json"));
    EXPECT_TRUE(e["angle"]["error_stats"].is_null());
    EXPECT_TRUE(e["angle"]["pearson"].is_null());
    EXPECT_TRUE(e["angle"]["bland_altman"].is_null());
    EXPECT_FALSE(e["classification"].is_null());
}

TEST(CliConfig, InitRoundTrips) {
    const auto dir = oracle::temp_dir("cli_config");
    ASSERT_EQ(run({"config", "init", "--out", (dir / "c.json").string()}), 0);
    const auto cfg = load_config(dir / "c.json");
    EXPECT_EQ(to_json(cfg).dump(2) + "\n", oracle::read_file(dir / "c.json"));
}
