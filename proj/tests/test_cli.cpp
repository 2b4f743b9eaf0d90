#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcaloha/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = fcaloha::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::temp_directory_path() / (std::string("fcaloha_cli_") + info->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    std::string cache() const { return (root_ / "cache").string(); }
    fs::path root_;
};

}  // namespace

TEST_F(CliTest, DensityEvolutionPoint) {
    const auto r = run({"--cache-dir", cache(), "de", "--b", "1", "--snr-ratio", "0.1", "--beta", "7.2",
                        "--mn", "0.36", "--samples", "100000"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j.at("T").get<double>(), 2.37, 0.02);
    EXPECT_TRUE(j.at("converged").get<bool>());
}

TEST_F(CliTest, CollisionOnlyDensityEvolutionNeedsNoTable) {
    const auto r = run({"--cache-dir", cache(), "de", "--no-capture", "--beta", "3.12", "--mn", "1.07", "--no-build"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(nlohmann::json::parse(r.out).at("T").get<double>(), 0.87, 0.02);
}

TEST_F(CliTest, SimulationWithZeroFractionThreshold) {
    const auto out = root_ / "sim";
    const auto r = run({"sim", "--n", "50", "--beta", "3", "--v", "0", "--runs", "25", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream csv(out / "runs.csv");
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "seed,beta,V,S,b,snr_ratio,N,M,N_R,F_R,T_I,cause");
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
        ASSERT_EQ(cols.size(), 12u);
        EXPECT_EQ(cols[7], "1");
        EXPECT_EQ(cols[11], "FractionThreshold");
    }
    EXPECT_EQ(rows, 25);
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_EQ(summary.at("runs").get<int>(), 25);
}

TEST_F(CliTest, SimulationFromConfigFile) {
    const auto cfg = root_ / "params.json";
    std::ofstream(cfg) << R"({"n_users": 40, "beta": 3, "capture_ratio": 1, "mean_snr": 10,
        "threshold_v": 0.5, "threshold_s": 100, "max_slots": 800, "base_seed": 5,
        "snr_mode": "PerTransmission"})";
    const auto r = run({"sim", "--config", cfg.string(), "--runs", "3", "--out", (root_ / "o").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("params").at("n_users").get<int>(), 40);
}

TEST_F(CliTest, TableCacheHitIsByteIdentical) {
    const auto a = root_ / "a.json";
    const auto b = root_ / "b.json";
    const std::vector<std::string> base{"--cache-dir", cache(), "pi-table", "--b", "2", "--snr-ratio", "1",
                                        "--samples", "10000", "--t-max", "12"};
    auto args = base;
    args.insert(args.end(), {"--out", a.string()});
    const auto first = run(args);
    ASSERT_EQ(first.code, 0) << first.err;
    EXPECT_NE(first.err.find("built"), std::string::npos);
    args = base;
    args.insert(args.end(), {"--out", b.string(), "--no-build"});
    const auto second = run(args);
    ASSERT_EQ(second.code, 0) << second.err;
    EXPECT_NE(second.err.find("cache hit"), std::string::npos);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(CliTest, CacheMissWithoutBuildFails) {
    const auto r = run({"--cache-dir", cache(), "pi-table", "--samples", "10000", "--t-max", "5", "--no-build"});
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, ConfigurationErrors) {
    EXPECT_EQ(run({"de", "--beta", "3"}).code, 2);
    EXPECT_EQ(run({"--cache-dir", cache(), "de", "--b", "0.5", "--beta", "3", "--mn", "1"}).code, 2);
    EXPECT_EQ(run({"--cache-dir", cache(), "pi-table", "--samples", "10"}).code, 2);
    EXPECT_EQ(run({"sim", "--n", "10", "--beta", "20", "--out", (root_ / "x").string()}).code, 2);
    const auto bad = root_ / "bad.json";
    std::ofstream(bad) << R"({"unknown_key": 1})";
    EXPECT_EQ(run({"sweep", "--config", bad.string(), "--out", (root_ / "s").string()}).code, 2);
    EXPECT_EQ(run({"--bogus"}).code, 2);
}

TEST_F(CliTest, UnwritableOutputDirectory) {
    const auto r = run({"sim", "--n", "10", "--runs", "1", "--out", "/proc/fcaloha_no_such_dir"});
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, SchemaListsEveryCsv) {
    const auto r = run({"--schema"});
    ASSERT_EQ(r.code, 0);
    for (const char* col : {"seed", "T_I", "M_over_N", "mean_T", "cause"}) {
        EXPECT_NE(r.out.find(col), std::string::npos) << col;
    }
}

TEST_F(CliTest, SmallSweepWritesGridAndBest) {
    const auto cfg = root_ / "sweep.json";
    std::ofstream(cfg) << R"({"beta": {"min": 2, "max": 3, "step": 0.5},
        "threshold_v": {"min": 0.8, "max": 0.9, "step": 0.1},
        "threshold_s": {"min": 0.7, "max": 0.8, "step": 0.1},
        "runs_per_point": 10, "reception": "CollisionOnly"})";
    const auto out = root_ / "sweep";
    const auto r = run({"sweep", "--config", cfg.string(), "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out / "grid.csv"));
    const auto best = nlohmann::json::parse(slurp(out / "best.json"));
    EXPECT_EQ(best.at("points_evaluated").get<int>(), 12);
}
