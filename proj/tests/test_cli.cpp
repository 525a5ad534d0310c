// End-to-end checks of the ngp binary: flag contracts, exit codes,
// determinism of emitted files.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#ifndef NGP_CLI_PATH
#error "NGP_CLI_PATH must point at the built binary"
#endif

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct CommandResult {
    int exit_code;
    std::string out, err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ngp_cli_" +
                std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CommandResult run(const std::string& args) const {
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        const std::string cmd = std::string(NGP_CLI_PATH) + " " + args + " > " + out.string() +
                                " 2> " + err.string();
        const int status = std::system(cmd.c_str());
        CommandResult result;
        result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        result.out = slurp(out);
        result.err = slurp(err);
        return result;
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void generate_ohm(const std::string& name, int samples = 400, int seed = 7) const {
        const auto r = run("generate --law ohm --samples " + std::to_string(samples) +
                           " --features 10 --seed " + std::to_string(seed) + " --out " +
                           path(name));
        ASSERT_EQ(r.exit_code, 0) << r.err;
    }

    fs::path dir_;
};

TEST_F(CliTest, GenerateWritesCsvAndSidecarAndPrintsSupport) {
    const auto r = run("generate --law ohm --samples 100 --features 10 --seed 7 --out " +
                       path("ohm.csv"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("J=100"), std::string::npos);
    EXPECT_NE(r.out.find("P=10"), std::string::npos);
    EXPECT_NE(r.out.find("support: 1,2"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("ohm.csv")));
    const Json sidecar = Json::parse(slurp(path("ohm.json")));
    EXPECT_EQ(sidecar.at("true_support"), Json(std::vector<int>{1, 2}));
}

TEST_F(CliTest, GenerateMissingRequiredFlagIsUsageError) {
    const auto r = run("generate --law ohm");
    EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliTest, GenerateSameFlagsTwiceIdenticalFiles) {
    generate_ohm("a.csv");
    generate_ohm("b.csv");
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CliTest, GenerateAugmentAppendsColumnsAndMarksSupport) {
    generate_ohm("base.csv", 50);
    const auto r = run("generate --augment " + path("base.csv") +
                       " --count 5 --low -10 --high 10 --seed 3 --out " + path("aug.csv"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("P=15"), std::string::npos);
    const Json sidecar = Json::parse(slurp(path("aug.json")));
    // augmentation keeps the base file's support (features 1,2 of the law)
    EXPECT_EQ(sidecar.at("true_support"), Json(std::vector<int>{1, 2}));
}

TEST_F(CliTest, SelectRecoversOhmSupportAndReportsRates) {
    generate_ohm("ohm.csv");
    const auto r = run("select --data " + path("ohm.csv") +
                       " --method ngp --predictor linear --max-features 2 --seed 3 --json");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json out = Json::parse(r.out);
    auto selected = out.at("selected").get<std::vector<int>>();
    std::sort(selected.begin(), selected.end());
    EXPECT_EQ(selected, (std::vector<int>{1, 2}));
    EXPECT_DOUBLE_EQ(out.at("metrics").at("fpsr").get<double>(), 0.0);
    EXPECT_DOUBLE_EQ(out.at("metrics").at("fnsr").get<double>(), 0.0);
    EXPECT_EQ(out.at("trainings_performed").get<int>(), 10 + 9 + 1);
}

TEST_F(CliTest, SelectEtaWithoutMaxFeaturesIsLegal) {
    generate_ohm("ohm.csv");
    const auto r = run("select --data " + path("ohm.csv") +
                       " --predictor linear --eta 0.05 --seed 3 --json");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json out = Json::parse(r.out);
    EXPECT_EQ(out.at("stop_reason"), "eta_triggered");
}

TEST_F(CliTest, SelectLassoPrintsImportanceTableAndSelection) {
    generate_ohm("ohm.csv");
    const auto r = run("select --data " + path("ohm.csv") +
                       " --method lasso --lambda 0.01 --seed 3 --out " + path("imp.csv"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("importance"), std::string::npos);
    EXPECT_NE(r.out.find("selected (importance > 0.01)"), std::string::npos);
    const std::string imp = slurp(path("imp.csv"));
    EXPECT_EQ(imp.substr(0, 17), "index,importance\n");
}

TEST_F(CliTest, SelectDryRunEchoesResolvedConfig) {
    generate_ohm("ohm.csv");
    const auto r = run("select --data " + path("ohm.csv") +
                       " --max-features 2 --seed 9 --dry-run");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json echo = Json::parse(r.out);
    EXPECT_EQ(echo.at("master_seed").get<std::uint64_t>(), 9u);
    EXPECT_EQ(echo.at("ngp").at("max_features").get<int>(), 2);
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
    const auto r = run("select --bogus-flag 1");
    EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliTest, SelectConfigFileMergesWithFlagsWinning) {
    generate_ohm("ohm.csv");
    std::ofstream cfg(path("cfg.json"));
    cfg << R"({"dataset": {"csv": ")" << path("ohm.csv")
        << R"(", "targets": ["t"]}, "method": "ngp", "ngp": {"max_features": 3},
             "predictor": {"family": "linear"}, "master_seed": 4})";
    cfg.close();
    const auto r = run("select --config " + path("cfg.json") + " --max-features 2 --json");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const Json out = Json::parse(r.out);
    EXPECT_EQ(out.at("selected").get<std::vector<int>>().size(), 2u);  // flag beat the file
}

TEST_F(CliTest, SweepEmitsSummaryWithPhaseColumn) {
    std::ofstream cfg(path("sweep.json"));
    cfg << R"({
        "dataset": {"generator": "ohm", "samples": 200, "features": 10},
        "method": "ngp",
        "split": {"train": 0.8, "validation": 0.2, "test": 0.0},
        "predictor": {"family": "linear"},
        "ngp": {"max_features": 2},
        "runs": 2,
        "master_seed": 11,
        "sweep": {"axis": "sample_size", "values": [50, 100]}
    })";
    cfg.close();
    const auto r = run("sweep --config " + path("sweep.json") + " --out " + path("res"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const std::string summary = slurp(path("res/summary.csv"));
    EXPECT_EQ(summary.substr(0, 12), "sample_size,");
    EXPECT_NE(summary.find("fnsr_mean"), std::string::npos);
    EXPECT_NE(summary.find("phase"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("res/raw.jsonl")));
    EXPECT_TRUE(fs::exists(path("res/config.json")));
}

TEST_F(CliTest, SweepInvalidAxisNamesField) {
    std::ofstream cfg(path("bad.json"));
    cfg << R"({"dataset": {"generator": "ohm"}, "sweep": {"axis": "sideways"}})";
    cfg.close();
    const auto r = run("sweep --config " + path("bad.json") + " --out " + path("res"));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("sweep.axis"), std::string::npos) << r.err;
}

TEST_F(CliTest, SweepThreadCountDoesNotChangeOutputs) {
    std::ofstream cfg(path("sweep.json"));
    cfg << R"({
        "dataset": {"generator": "correlated", "samples": 150, "features": 8},
        "method": "ngp",
        "split": {"train": 0.4, "validation": 0.1, "test": 0.5},
        "predictor": {"family": "linear"},
        "ngp": {"max_features": 3},
        "runs": 3,
        "master_seed": 2
    })";
    cfg.close();
    ASSERT_EQ(run("sweep --config " + path("sweep.json") + " --threads 1 --out " + path("t1"))
                  .exit_code,
              0);
    ASSERT_EQ(run("sweep --config " + path("sweep.json") + " --threads 8 --out " + path("t8"))
                  .exit_code,
              0);
    EXPECT_EQ(slurp(path("t1/summary.csv")), slurp(path("t8/summary.csv")));
    EXPECT_EQ(slurp(path("t1/raw.jsonl")), slurp(path("t8/raw.jsonl")));
}

TEST_F(CliTest, ReportRendersTableWithNaForSelectorOnlyMethods) {
    std::ofstream cfg(path("corr.json"));
    cfg << R"({
        "dataset": {"generator": "correlated", "samples": 150, "features": 8},
        "method": "correlation",
        "split": {"train": 0.4, "validation": 0.1, "test": 0.5},
        "runs": 2,
        "master_seed": 3
    })";
    cfg.close();
    ASSERT_EQ(
        run("sweep --config " + path("corr.json") + " --out " + path("res/corr")).exit_code, 0);
    const auto r = run("report --dir " + path("res"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("correlation"), std::string::npos);
    EXPECT_NE(r.out.find("N/A"), std::string::npos);
}

TEST_F(CliTest, ReportEmptyDirectoryFails) {
    fs::create_directories(path("empty"));
    const auto r = run("report --dir " + path("empty"));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, SelectDeterministicAcrossInvocations) {
    generate_ohm("ohm.csv");
    const std::string cmd = "select --data " + path("ohm.csv") +
                            " --predictor linear --max-features 2 --seed 5 --json";
    const auto a = run(cmd);
    const auto b = run(cmd);
    EXPECT_EQ(a.out, b.out);
}

}  // namespace
