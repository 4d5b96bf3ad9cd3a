#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string command = env + " " + GAUSSMIN_CLI_PATH + " " + args + " 2>/dev/null";
    RunResult result;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return result;
    std::array<char, 4096> buffer{};
    std::size_t got = 0;
    while ((got = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) result.out.append(buffer.data(), got);
    const int status = pclose(pipe);
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("gaussmin_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, VerifyDefaultCertifies) {
    const auto r = run("verify --out-dir " + dir_.string());
    EXPECT_EQ(r.code, 0);
    const auto cert = json::parse(slurp(dir_ / "certificate.json"));
    EXPECT_EQ(cert["subdivisions"], 400);
    EXPECT_TRUE(cert["verdict"].get<bool>());
    EXPECT_GE(cert["cosine"][0].get<double>(), 0.099683);
    EXPECT_LE(cert["cosine"][1].get<double>(), 0.099684);
    EXPECT_GE(cert["simplex"][0].get<double>() - cert["cosine"][1].get<double>(), 0.03);
    const auto manifest = json::parse(slurp(dir_ / "manifest.json"));
    EXPECT_EQ(manifest["command"], "verify");
    EXPECT_EQ(manifest["flags"]["--subdivisions"], "400");
    EXPECT_TRUE(manifest.contains("wall_time"));
    EXPECT_TRUE(manifest.contains("tool_version"));
    EXPECT_EQ(run("verify --subdivisions 400 --out-dir " + dir_.string() + "/explicit").code, 0);
    EXPECT_EQ(slurp(dir_ / "certificate.json"), slurp(dir_ / "explicit" / "certificate.json"));
}

TEST_F(CliTest, VerifyCoarseGridFailsButStillWrites) {
    const auto r = run("verify --subdivisions 1 --out-dir " + dir_.string());
    EXPECT_EQ(r.code, 1);
    const auto cert = json::parse(slurp(dir_ / "certificate.json"));
    EXPECT_FALSE(cert["verdict"].get<bool>());
    EXPECT_EQ(json::parse(r.out)["subdivisions"], 1);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("figure --which nope").code, 2);
    EXPECT_EQ(run("verify --subdivisions 0").code, 2);
    EXPECT_EQ(run("moments --n 4 --bogus").code, 2);
    EXPECT_EQ(run("search --method sideways").code, 2);
    EXPECT_EQ(run("--format xml verify").code, 2);
    EXPECT_EQ(run("verify", "GAUSSMIN_SEED=abc").code, 2);
}

TEST_F(CliTest, RuntimeErrors) {
    EXPECT_EQ(run("moments --n 4 --p 2 --cov " + (dir_ / "missing.json").string()).code, 3);
    std::ofstream(dir_ / "bad.json") << R"({"n": 2, "entries": [[1, 2], [2, 1]]})";
    EXPECT_EQ(run("moments --n 2 --p 2 --samples 1000 --cov " + (dir_ / "bad.json").string()).code, 3);
}

TEST_F(CliTest, MomentsExact) {
    const auto r = run("moments --n 4 --p 2 --exact");
    EXPECT_EQ(r.code, 0);
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "n,p,value");
    const double value = std::stod(rows[1].substr(rows[1].rfind(',') + 1));
    EXPECT_NEAR(value, 1.0 - 2.0 * std::numbers::sqrt2 / std::numbers::pi, 1e-12);
    EXPECT_EQ(rows[1].rfind("4,2,0.099683", 0), 0u);
}

TEST_F(CliTest, MomentsJsonAndMatrixFile) {
    std::ofstream(dir_ / "m.json") << R"({"n": 2, "entries": [[1, 0], [0, 1]]})";
    const auto r = run("--format json moments --n 2 --p 2 --samples 20000 --cov " + (dir_ / "m.json").string());
    ASSERT_EQ(r.code, 0);
    const auto doc = json::parse(r.out);
    EXPECT_GT(doc["value"].get<double>(), 0.0);
    EXPECT_GT(doc["std_error"].get<double>(), 0.0);
}

TEST_F(CliTest, TailsExactAtZero) {
    const auto r = run("tails --n 1 --exact --t 0");
    EXPECT_EQ(r.code, 0);
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1], "1,0,1");
}

TEST_F(CliTest, TailsMonteCarloFormat) {
    const auto r = run("tails --n 4 --cov simplex --samples 1000 --grid-max 1 --grid-steps 4");
    EXPECT_EQ(r.code, 0);
    const auto rows = lines(r.out);
    ASSERT_GE(rows.size(), 5u);
    EXPECT_EQ(rows[0], "t,tail,ci_half,label");
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NE(rows[i].find(",simplex"), std::string::npos);
}

TEST_F(CliTest, DominanceCosineVersusSimplex) {
    const auto r = run("dominance --n 8 --candidate cos --reference simplex --samples 100000 --out-dir " + dir_.string());
    EXPECT_EQ(r.code, 0);
    const auto summary = json::parse(slurp(dir_ / "dominance_summary.json"));
    EXPECT_TRUE(summary["flagged"].empty());
    EXPECT_TRUE(summary.contains("max_z"));
    EXPECT_TRUE(fs::exists(dir_ / "dominance.csv"));
}

TEST_F(CliTest, DominanceViolationExitsOne) {
    const auto r = run("dominance --n 8 --candidate identity --reference cos --samples 100000");
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, ZonesReport) {
    const auto r = run("zones --n 3 --d 3 --alpha 0.2 --trials 3 --samples 5000 --out-dir " + dir_.string());
    EXPECT_EQ(r.code, 0);
    const auto report = json::parse(slurp(dir_ / "zones_report.json"));
    for (const char* key : {"even_measure", "max_random", "exceedance_z"}) EXPECT_TRUE(report.contains(key)) << key;
    EXPECT_EQ(lines(slurp(dir_ / "zones_trials.csv")).size(), 4u);
}

TEST_F(CliTest, SearchReportAndHistory) {
    const auto r = run("search --n 4 --rank 2 --objective moment:2 --method de --population 8 --generations 5 "
                       "--samples 2000 --out-dir " + dir_.string());
    EXPECT_EQ(r.code, 0);
    const auto report = json::parse(slurp(dir_ / "search_report.json"));
    EXPECT_TRUE(report.contains("best_matrix"));
    EXPECT_TRUE(report.contains("distance_to_cosine"));
    const auto history = lines(slurp(dir_ / "search_history.csv"));
    EXPECT_EQ(history.front(), "iter,best_value");
    EXPECT_EQ(history.size(), 7u);
}

TEST_F(CliTest, ByteIdenticalReruns) {
    const std::string base = "--seed 9 search --n 4 --rank 2 --population 8 --generations 4 --samples 2000 --out-dir ";
    ASSERT_EQ(run(base + (dir_ / "a").string()).code, 0);
    ASSERT_EQ(run(base + (dir_ / "b").string()).code, 0);
    for (const char* name : {"search_report.json", "search_history.csv"}) {
        EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name)) << name;
    }
    const std::string tails = "tails --n 5 --cov random-full --samples 5000 --grid-steps 5";
    EXPECT_EQ(run("--seed 3 " + tails).out, run("--seed 3 " + tails).out);
    EXPECT_NE(run("--seed 3 " + tails).out, run("--seed 4 " + tails).out);
    EXPECT_EQ(run("--seed 3 --threads 1 " + tails).out, run("--seed 3 --threads 3 " + tails).out);
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
    const std::string tails = "tails --n 5 --cov random-full --samples 5000 --grid-steps 5";
    EXPECT_EQ(run(tails, "GAUSSMIN_SEED=7").out, run("--seed 7 " + tails).out);
    EXPECT_EQ(run(tails, "env -u GAUSSMIN_SEED").out, run("--seed 1 " + tails).out);
    EXPECT_EQ(run("--seed 7 " + tails, "GAUSSMIN_SEED=8").out, run("--seed 7 " + tails).out);
}

TEST_F(CliTest, FigureCov) {
    ASSERT_EQ(run("figure --which cov --out-dir " + dir_.string()).code, 0);
    const auto cos_rows = lines(slurp(dir_ / "figure1_cosine.csv"));
    const auto simplex_rows = lines(slurp(dir_ / "figure1_simplex.csv"));
    EXPECT_EQ(cos_rows.size(), 1u + 16u * 16u);
    EXPECT_EQ(simplex_rows.size(), 1u + 16u * 16u);
    EXPECT_EQ(cos_rows[0], "i,j,value");
    ASSERT_EQ(cos_rows[2].rfind("1,2,", 0), 0u);
    EXPECT_NEAR(std::stod(cos_rows[2].substr(4)), std::cos(std::numbers::pi / 16), 1e-15);
    ASSERT_EQ(simplex_rows[2].rfind("1,2,", 0), 0u);
    EXPECT_NEAR(std::stod(simplex_rows[2].substr(4)), -1.0 / 15.0, 1e-15);
}

TEST_F(CliTest, FigureTailsHasAllCurves) {
    ASSERT_EQ(run("figure --which tails --samples 1000 --grid-steps 10 --out-dir " + dir_.string()).code, 0);
    const auto rows = lines(slurp(dir_ / "figure2_tails.csv"));
    EXPECT_EQ(rows[0], "t,tail,ci_half,label");
    std::map<std::string, std::vector<std::string>> grids;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        grids[row.substr(row.rfind(',') + 1)].push_back(row.substr(0, row.find(',')));
    }
    EXPECT_EQ(grids.size(), 103u);
    for (const char* label : {"cos", "simplex", "identity", "random_full_50", "random_rank2_1"}) {
        EXPECT_TRUE(grids.count(label)) << label;
    }
    for (const auto& [label, grid] : grids) EXPECT_EQ(grid, grids["cos"]) << label;
}

TEST_F(CliTest, FigureZonesSingleCenter) {
    ASSERT_EQ(run("figure --which zones --n 1 --d 4 --out-dir " + dir_.string()).code, 0);
    const auto rows = lines(slurp(dir_ / "figure3_zones.csv"));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "j,x1,x2,x3,x4,alpha");
    EXPECT_EQ(rows[1], "1,1,0,0,0,0.2");
}
