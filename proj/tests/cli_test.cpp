// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <snas/cli.hpp>

namespace fs = std::filesystem;

namespace snas::cli {
namespace {

auto slurp(fs::path const& p) -> std::string
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("snas_cli_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        bench_ = dir_ / "toy.csv";
        ASSERT_EQ(run({"gen-synthetic", "--seed", "3", "--out", bench_.string()}), kSuccess);
    }
    void TearDown() override { fs::remove_all(dir_); }

    auto path(char const* name) const -> std::string { return (dir_ / name).string(); }

    fs::path dir_;
    fs::path bench_;
};

TEST_F(CliTest, GenSyntheticIsReproducible)
{
    ASSERT_EQ(run({"gen-synthetic", "--seed", "3", "--out", path("again.csv")}), kSuccess);
    EXPECT_EQ(slurp(bench_), slurp(path("again.csv")));
    EXPECT_EQ(slurp(dir_ / "toy.front.csv"), slurp(path("again.front.csv")));
}

TEST_F(CliTest, SidecarFrontMatchesIndependentScan)
{
    // 625 rows keep the quadratic check quick.
    ASSERT_EQ(run({"gen-synthetic", "--seed", "5", "--size-exponent", "4", "--out", path("small.csv")}), kSuccess);
    auto table = load_table(path("small.csv"));
    auto front = read_front_sidecar(dir_ / "small.front.csv");
    ASSERT_FALSE(front.empty());
    std::set<Genotype> in_front(front.begin(), front.end());
    for (auto const& [g, r] : table.records()) {
        auto og = objectives(table, g, AccuracyField::Test);
        bool dominated = false;
        for (auto const& [h, s] : table.records()) { dominated = dominated || dominates(objectives(table, h, AccuracyField::Test), og); }
        ASSERT_EQ(!dominated, in_front.contains(g)) << g.str();
    }
}

TEST_F(CliTest, GenSyntheticBadOutPath)
{
    EXPECT_NE(run({"gen-synthetic", "--seed", "3", "--out", "/nonexistent/dir/x.csv"}), kSuccess);
}

TEST_F(CliTest, EvenEnsembleIsUsageError)
{
    EXPECT_EQ(run({"train-surrogate", "--bench-file", bench_.string(), "--nm", "6", "--out", path("e.bin")}), kUsage);
    EXPECT_FALSE(fs::exists(path("e.bin")));
}

TEST_F(CliTest, OddPopulationIsUsageError)
{
    EXPECT_EQ(run({"search", "--bench-file", bench_.string(), "--pop", "51", "--out", path("r.json")}), kUsage);
}

TEST_F(CliTest, MissingBenchFileIsDataError)
{
    testing::internal::CaptureStderr();
    int code = run({"train-surrogate", "--bench-file", path("absent.csv"), "--out", path("e.bin")});
    auto err = testing::internal::GetCapturedStderr();
    EXPECT_EQ(code, kData);
    EXPECT_NE(err.find("absent.csv"), std::string::npos);
}

TEST_F(CliTest, ZeroPairsIsUsageError)
{
    EXPECT_EQ(run({"eval-surrogate", "--bench-file", bench_.string(), "--pairs", "0", "--ns", "20", "--nm", "1",
                   "--rounds", "2", "--epochs", "1"}),
              kUsage);
}

TEST_F(CliTest, UnknownFlagAndMissingSubcommand)
{
    EXPECT_EQ(run({"search", "--bench-file", bench_.string(), "--bogus"}), kUsage);
    EXPECT_EQ(run({}), kUsage);
    EXPECT_EQ(run({"search", "--bench-file", bench_.string(), "--acc-field", "dev"}), kUsage);
}

TEST_F(CliTest, BenchDirEnvironmentVariable)
{
    ::setenv(kBenchDirEnv, dir_.c_str(), 1);
    EXPECT_EQ(resolve_bench_path("toy.csv"), bench_);
    ::unsetenv(kBenchDirEnv);
    EXPECT_THROW(resolve_bench_path("toy.csv"), data_error);
}

TEST_F(CliTest, TrainThenTransferSearch)
{
    ASSERT_EQ(run({"train-surrogate", "--bench-file", bench_.string(), "--ns", "40", "--nm", "3", "--rounds", "4",
                   "--epochs", "2", "--seed", "1", "--out", path("ens.bin")}),
              kSuccess);
    auto m = load_ensemble(path("ens.bin"));
    EXPECT_EQ(m.size(), 3u);
    EXPECT_EQ(m.training_archs().size(), 40u);

    ASSERT_EQ(run({"search", "--bench-file", bench_.string(), "--surrogate-from", path("ens.bin"), "--pop", "10",
                   "--gens", "10", "--seed", "2", "--out", path("r.json")}),
              kSuccess);
    auto report = nlohmann::json::parse(slurp(path("r.json")));
    EXPECT_TRUE(report["transfer"].get<bool>());
    EXPECT_LE(report["repeats"][0]["true_evaluations"].get<int>(), 10);
    EXPECT_EQ(report["repeats"][0]["phase1_evaluations"].get<int>(), 0);
}

TEST_F(CliTest, SearchReportShape)
{
    ASSERT_EQ(run({"search", "--bench-file", bench_.string(), "--ns", "40", "--nm", "3", "--rounds", "4", "--epochs",
                   "2", "--pop", "10", "--gens", "10", "--repeats", "2", "--seed", "7", "--eval-pairs", "200", "--out",
                   path("r.json"), "--metrics-csv", path("m.csv")}),
              kSuccess);
    auto report = nlohmann::json::parse(slurp(path("r.json")));
    ASSERT_EQ(report["repeats"].size(), 2u);
    EXPECT_EQ(report["repeats"][1]["seed"].get<int>(), 8);
    EXPECT_EQ(report["stats"]["repeats"].get<int>(), 2);
    EXPECT_FALSE(report["repeats"][0]["front"].empty());
    EXPECT_TRUE(report["repeats"][0].contains("surrogate"));
    EXPECT_LE(report["stats"]["max_true_evaluations"].get<int>(), 50);
    EXPECT_FALSE(report.contains("wall_clock_seconds"));
    EXPECT_EQ(slurp(path("m.csv")).rfind("metric,value\n", 0), 0u);
}

TEST_F(CliTest, EvalSweepsProduceOneRowPerSetting)
{
    ASSERT_EQ(run({"eval-surrogate", "--bench-file", bench_.string(), "--ns", "40", "--rounds", "3", "--epochs", "1",
                   "--pairs", "100", "--sweep-nm", "1,3,5", "--out", path("nm.csv")}),
              kSuccess);
    std::istringstream nm(slurp(path("nm.csv")));
    std::string line;
    int rows = -1; // header
    while (std::getline(nm, line)) { rows += line.empty() ? 0 : 1; }
    EXPECT_EQ(rows, 3);

    ASSERT_EQ(run({"eval-surrogate", "--bench-file", bench_.string(), "--nm", "1", "--rounds", "3", "--epochs", "1",
                   "--pairs", "100", "--sweep-ns", "20,40", "--out", path("ns.csv"), "--json", path("ns.json")}),
              kSuccess);
    std::istringstream ns(slurp(path("ns.csv")));
    rows = -1;
    while (std::getline(ns, line)) { rows += line.empty() ? 0 : 1; }
    EXPECT_EQ(rows, 3); // untrained baseline plus one per Ns
    auto js = nlohmann::json::parse(slurp(path("ns.json")));
    EXPECT_EQ(js["rows"].size(), 3u);
}

TEST_F(CliTest, HelpExitsZero)
{
    testing::internal::CaptureStdout();
    EXPECT_EQ(run({"--help"}), kSuccess);
    testing::internal::GetCapturedStdout();
}

} // namespace
} // namespace snas::cli
