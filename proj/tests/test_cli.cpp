// End-to-end checks of the tdelab command-line tool: verbs, outputs and exit codes.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(TDELAB_CLI) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tdelab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    static std::string scenario(const std::string& name) {
        return std::string(TDELAB_SCENARIO_DIR) + "/" + name + ".json";
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunShippedScenarioSucceeds) {
    const Result r = run("run " + scenario("case1_constant_d") + " -o " + dir_.string());
    EXPECT_EQ(r.code, 0) << r.out;
    std::ifstream report(dir_ / "case1_constant_d.report.json");
    ASSERT_TRUE(report.good());
    const nlohmann::json j = nlohmann::json::parse(report);
    EXPECT_EQ(j["check"], "asymptotic");
    EXPECT_TRUE(j["satisfied"].get<bool>());
    EXPECT_FALSE(j["diverged"].get<bool>());
    EXPECT_TRUE(fs::exists(dir_ / "case1_constant_d.csv"));
}

TEST_F(CliTest, RunBuiltinByName) {
    const Result r = run("run passive_pendulum -o " + dir_.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(dir_ / "passive_pendulum.csv"));
}

TEST_F(CliTest, UnmetToleranceExitsOne) {
    std::ifstream in(scenario("passive_pendulum"));
    nlohmann::json j = nlohmann::json::parse(in);
    j["checks"]["tolerance"] = 1e-30;
    j["id"] = "too_strict";
    const Result r = run("run " + write("strict.json", j.dump()) + " -o " + dir_.string());
    EXPECT_EQ(r.code, 1) << r.out;
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, DivergenceExitsTwo) {
    const Result r = run("run " + std::string(TDELAB_TEST_DATA_DIR) + "/case1_second_difference_diverges.json -o " +
                         dir_.string());
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_NE(r.out.find("DIVERGED"), std::string::npos);
    std::ifstream report(dir_ / "case1_second_difference_diverges.report.json");
    EXPECT_TRUE(nlohmann::json::parse(report)["diverged"].get<bool>());
}

TEST_F(CliTest, ConfigErrorsExitThree) {
    Result r = run("run " + write("bad.json", "{ \"id\": \"x\",\n  broken }") + " -o " + dir_.string());
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("line 2"), std::string::npos) << r.out;

    std::ifstream in(scenario("case1_sinusoid_d"));
    nlohmann::json j = nlohmann::json::parse(in);
    j["controller"]["K"] = {{1.0, 0.0}, {0.0, -1.0}};
    r = run("run " + write("notpd.json", j.dump()) + " --dry-run");
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("controller.K"), std::string::npos) << r.out;

    r = run("run no_such_scenario");
    EXPECT_EQ(r.code, 3);
    r = run("suite no_such_suite");
    EXPECT_EQ(r.code, 3);
    r = run("suite");
    EXPECT_EQ(r.code, 3);
    r = run("frobnicate");
    EXPECT_EQ(r.code, 3);
    r = run("run " + scenario("case1_sinusoid_d") + " --rho 0.0015 --dry-run");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.out.find("rho_s"), std::string::npos) << r.out;
}

TEST_F(CliTest, DryRunValidatesWithoutSimulating) {
    const Result r = run("run " + scenario("case2_sinusoid_d") + " --dry-run --horizon 5 -o " + dir_.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("\"horizon_s\": 5.0"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(CliTest, SuiteListAndNumerics) {
    Result r = run("suite --list");
    EXPECT_EQ(r.code, 0);
    for (const char* s : {"paper-claims", "numerics", "demos"}) EXPECT_NE(r.out.find(s), std::string::npos) << s;

    r = run("suite numerics -o " + dir_.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("3/3 passed"), std::string::npos) << r.out;
    std::ifstream in(dir_ / "numerics.suite.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    EXPECT_EQ(j["rows"].size(), 3u);
}

TEST_F(CliTest, ListExportAndVersion) {
    Result r = run("list-scenarios");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("case1_constant_d"), std::string::npos);

    r = run("export-scenarios " + (dir_ / "exported").string());
    EXPECT_EQ(r.code, 0);
    for (const auto& entry : fs::directory_iterator(TDELAB_SCENARIO_DIR)) {
        const fs::path copy = dir_ / "exported" / entry.path().filename();
        ASSERT_TRUE(fs::exists(copy)) << copy;
        std::ifstream a(entry.path()), b(copy);
        EXPECT_EQ(nlohmann::json::parse(a), nlohmann::json::parse(b)) << entry.path();
    }

    r = run("--version");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("tdelab"), std::string::npos);
}
