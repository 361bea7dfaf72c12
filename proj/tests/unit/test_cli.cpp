#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "cmpslab/csv.hpp"

#ifdef CMPSLAB_CLI

namespace fs = std::filesystem;

namespace {

struct Result {
    int status;
    std::string out;
};

Result sh(const std::string& args) {
    const std::string cmd = std::string(CMPSLAB_CLI) + " " + args + " 2>&1";
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("cmpslab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path write(const std::string& name, const std::string& text) {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }
    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, BetheToStdoutAndFile) {
    const Result r = sh("bethe --gamma 0.5,1,2");
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(cmpslab::parse_csv(r.out).rows.size(), 3u);
    EXPECT_EQ(sh("bethe --gamma 1 --out " + dir_.string()).status, 0);
    EXPECT_TRUE(fs::exists(dir_ / "bethe.csv"));
    EXPECT_NE(sh("bethe --gamma -1").status, 0);
}

TEST_F(CliTest, RunResumeReport) {
    const auto cfg = write("c.json", R"({"mode":"single","D":1,"gamma":[1,2],"optimizer":{"restarts":1}})");
    const fs::path out = dir_ / "run";
    const Result r = sh("run " + cfg.string() + " --jobs 2 --seed 5 --out " + out.string());
    EXPECT_EQ(r.status, 0) << r.out;
    EXPECT_NE(cmpslab::read_file(out / "config.json").find("\"seed\": 5"), std::string::npos);
    EXPECT_EQ(sh("resume " + out.string()).status, 0);
    const Result rep = sh("report " + out.string());
    EXPECT_EQ(rep.status, 0);
    EXPECT_NE(rep.out.find("energy_vs_gamma.csv"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
    const auto bad = write("bad.json", R"({"mode":"single","D":1,"colour":"red"})");
    const Result r = sh("run " + bad.string());
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.out.find("colour: unknown key"), std::string::npos);

    const auto cfg = write("ok.json", R"({"mode":"bethe","gamma":[1]})");
    ASSERT_EQ(sh("run " + cfg.string() + " --out " + (dir_ / "o").string()).status, 0);
    std::ofstream(dir_ / "o" / "config.json", std::ios::app) << " ";
    EXPECT_EQ(sh("resume " + (dir_ / "o").string()).status, 3);

    const auto failing = write("fail.json",
                               R"({"mode":"single","D":2,"optimizer":{"restarts":1,"max_iters":1,"max_outer":1}})");
    EXPECT_EQ(sh("run " + failing.string() + " --out " + (dir_ / "f").string()).status, 1);
    EXPECT_NE(sh("").status, 0);
    EXPECT_EQ(sh("--version").status, 0);
}

TEST_F(CliTest, LogLevelFromEnvironment) {
    const auto cfg = write("ok.json", R"({"mode":"bethe","gamma":[1]})");
    const std::string base = "run " + cfg.string() + " --out " + (dir_ / "o").string();
    const Result quiet = sh(base);
    ASSERT_EQ(quiet.status, 0);
    setenv("CMPSLAB_LOG", "off", 1);
    const Result off = sh(base);
    setenv("CMPSLAB_LOG", "nonsense", 1);
    const Result bad = sh(base);
    unsetenv("CMPSLAB_LOG");
    EXPECT_EQ(off.out.find("[info]"), std::string::npos);
    EXPECT_NE(quiet.out.find("[info]"), std::string::npos);
    EXPECT_EQ(bad.status, 2);
}

#endif
