#include "subco/cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("subco_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::trunc) << text; }

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::initializer_list<std::string> args) {
    std::vector<std::string> store{"subco"};
    store.insert(store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : store) argv.push_back(s.data());
    testing::internal::CaptureStdout();
    testing::internal::CaptureStderr();
    const int code = subco::run_cli(static_cast<int>(argv.size()), argv.data());
    const std::string out = testing::internal::GetCapturedStdout();
    return {code, out, testing::internal::GetCapturedStderr()};
}

// Small enough that training a cell takes well under a second.
std::string small_config() {
    return R"({
  "train_sequences": 2, "eval_sequences": 1,
  "synthetic": {"num_objects": 3, "num_frames": 9, "image_width": 160, "image_height": 120},
  "embedder": {"patch_width": 8, "patch_height": 8, "hidden": 8, "dim": 4},
  "optimizer": {"epochs": 2, "decay_epoch": 2}
})";
}

}  // namespace

TEST(Cli, UnknownConfigKeyFailsWithOneLineDiagnostic) {
    const auto dir = temp_dir("unknown_key");
    write_file(dir / "cfg.json", R"({"loss": {"taux": 3}})");
    const auto r = run({"generate", "--config", (dir / "cfg.json").string(), "--out", (dir / "data").string()});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("taux"), std::string::npos) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
    EXPECT_FALSE(fs::exists(dir / "data"));
}

TEST(Cli, MissingFilesFail) {
    const auto dir = temp_dir("missing");
    EXPECT_NE(run({"eval", "--gt", (dir / "no_gt.txt").string(), "--results", (dir / "no.txt").string()}).code, 0);
    EXPECT_NE(run({"train", "--config", (dir / "none.json").string(), "--out", (dir / "c.json").string()}).code, 0);
    EXPECT_NE(run({"track", "--data", (dir / "nothing").string(), "--out", (dir / "res").string()}).code, 0);
}

TEST(Cli, EvalOfGroundTruthAgainstItselfIsPerfect) {
    const auto dir = temp_dir("eval_self");
    write_file(dir / "cfg.json", small_config());
    ASSERT_EQ(run({"generate", "--config", (dir / "cfg.json").string(), "--out", (dir / "data").string()}).code, 0);
    const auto gt = dir / "data" / "eval" / "seq_000" / "gt.txt";
    const auto r = run({"eval", "--gt", gt.string(), "--results", gt.string(), "--json", (dir / "m.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("MOTA"), std::string::npos);
    const json m = json::parse(read_file(dir / "m.json"));
    EXPECT_DOUBLE_EQ(m["clear"]["mota"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(m["identity"]["idf1"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(m["hota"]["hota"].get<double>(), 1.0);
}

TEST(Cli, GradCheckDefaultPassesAllInstances) {
    const auto r = run({"grad-check"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("PASS 20/20, max rel err ", 0), 0u) << r.out;
}

TEST(Cli, GenerateIsReproducibleAndSeedSensitive) {
    const auto dir = temp_dir("generate");
    write_file(dir / "cfg.json", small_config());
    const auto cfg = (dir / "cfg.json").string();
    ASSERT_EQ(run({"generate", "--config", cfg, "--seed", "4", "--out", (dir / "a").string()}).code, 0);
    ASSERT_EQ(run({"generate", "--config", cfg, "--seed", "4", "--out", (dir / "b").string()}).code, 0);
    ASSERT_EQ(run({"generate", "--config", cfg, "--seed", "5", "--out", (dir / "c").string()}).code, 0);
    for (const char* f : {"train/seq_001/det.txt", "train/seq_001/frames/000003.ppm", "eval/seq_000/gt.txt", "config.json"})
        EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
    EXPECT_NE(read_file(dir / "a" / "train/seq_001/det.txt"), read_file(dir / "c" / "train/seq_001/det.txt"));
    EXPECT_EQ(json::parse(read_file(dir / "a" / "config.json"))["seed"].get<int>(), 4);
}

TEST(Cli, TrainTrackEvalPipeline) {
    const auto dir = temp_dir("pipeline");
    write_file(dir / "cfg.json", small_config());
    const auto cfg = (dir / "cfg.json").string();
    const auto data = dir / "data";
    ASSERT_EQ(run({"generate", "--config", cfg, "--out", data.string()}).code, 0);

    for (const char* name : {"m1", "m2"}) {
        const auto r = run({"train", "--config", cfg, "--data", (data / "train").string(), "--out",
                            (dir / name / "ckpt.json").string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    EXPECT_EQ(read_file(dir / "m1" / "ckpt.json"), read_file(dir / "m2" / "ckpt.json"));
    EXPECT_TRUE(fs::exists(dir / "m1" / "config.json"));
    std::ifstream log(dir / "m1" / "train_log.jsonl");
    int lines = 0;
    for (std::string line; std::getline(log, line); ++lines) EXPECT_TRUE(json::parse(line).contains("mean_inter"));
    EXPECT_EQ(lines, 2);

    const auto res = dir / "res";
    auto r = run({"track", "--config", cfg, "--checkpoint", (dir / "m1" / "ckpt.json").string(), "--data",
                  (data / "eval").string(), "--out", res.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(res / "seq_000.txt"));
    EXPECT_TRUE(fs::exists(res / "config.json"));
    r = run({"eval", "--data", (data / "eval").string(), "--results", res.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("HOTA"), std::string::npos);
}

TEST(Cli, CheckpointShapeMismatchIsRejected) {
    const auto dir = temp_dir("mismatch");
    write_file(dir / "cfg.json", small_config());
    const auto cfg = (dir / "cfg.json").string();
    ASSERT_EQ(run({"generate", "--config", cfg, "--out", (dir / "data").string()}).code, 0);
    ASSERT_EQ(run({"train", "--config", cfg, "--data", (dir / "data" / "train").string(), "--out",
                   (dir / "ckpt.json").string()})
                  .code,
              0);
    write_file(dir / "wide.json", R"({"embedder": {"patch_width": 8, "patch_height": 8, "hidden": 8, "dim": 5}})");
    const auto r = run({"track", "--config", (dir / "wide.json").string(), "--checkpoint", (dir / "ckpt.json").string(),
                        "--data", (dir / "data" / "eval").string(), "--out", (dir / "res").string()});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("checkpoint"), std::string::npos) << r.err;
}

TEST(Cli, AblateProducesSixCellsWithIntraOnlyOneTrainable) {
    const auto dir = temp_dir("ablate");
    write_file(dir / "cfg.json", small_config());
    write_file(dir / "grid.json", R"({"sequence_length": [1, 4, 8], "intra": [true, false],
                                      "stage_costs": [["combined", "combined"]]})");
    const auto r = run({"ablate", "--config", (dir / "cfg.json").string(), "--grid", (dir / "grid.json").string(),
                        "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json cells = json::parse(read_file(dir / "out" / "ablation.json"));
    ASSERT_EQ(cells.size(), 6u);
    for (const auto& c : cells) {
        const bool expect_valid = !(c["sequence_length"] == 1 && c["intra"] == false);
        EXPECT_EQ(c["valid"].get<bool>(), expect_valid) << c["name"];
    }
    EXPECT_FALSE(fs::exists(dir / "out" / "T1_intra-off"));
    EXPECT_TRUE(fs::exists(dir / "out" / "T8_intra-off" / "checkpoint.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "ablation.txt"));

    // A cell re-run on its own reproduces the checkpoint from the full grid.
    write_file(dir / "one.json", R"({"sequence_length": [4], "intra": [false], "stage_costs": [["combined", "combined"]]})");
    ASSERT_EQ(run({"ablate", "--config", (dir / "cfg.json").string(), "--grid", (dir / "one.json").string(), "--out",
                   (dir / "single").string()})
                  .code,
              0);
    EXPECT_EQ(read_file(dir / "out" / "T4_intra-off" / "checkpoint.json"),
              read_file(dir / "single" / "T4_intra-off" / "checkpoint.json"));
}
