#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(NSS_LAB_EXE) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        return r;
    }
    char buf[4096];
    while (const std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) {
        r.out.append(buf, n);
    }
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

const char* kQuick =
    "--set simulation.horizon=50 --set simulation.dt=0.01 --set ensemble.n_paths=0";

}  // namespace

TEST(Cli, BoundsOptimal) {
    const Result r = run("bounds --c 1 --gamma-max 0.5 --v1 2 --optimal");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("beta        = 0.317844432899"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("t_uc"), std::string::npos);
    EXPECT_NE(r.out.find("ratio_bound"), std::string::npos);
}

TEST(Cli, BoundsExplicit) {
    const Result r = run("bounds --c 1 --gamma-max 0.5 --v1 2 --v0 1");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("t_uc        = 0.924196240747"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("t_dc        = 2.09861228867"), std::string::npos) << r.out;
}

TEST(Cli, BoundsErrors) {
    EXPECT_EQ(run("bounds --c 1 --gamma-max 0.5 --v1 2").code, 4);
    EXPECT_EQ(run("bounds --c 1 --gamma-max 0.5 --v1 2 --v0 0.2").code, 4);
    EXPECT_EQ(run("bounds --c 1 --gamma-max 0.5 --v1 2 --v0 1 --optimal").code, 4);
    EXPECT_EQ(run("frobnicate").code, 4);
    EXPECT_EQ(run("").code, 4);
}

TEST(Cli, ExampleAndRun) {
    const fs::path dir = fs::temp_directory_path() / "nsslab_cli_test";
    fs::remove_all(dir);
    Result r = run("example --output-dir " + (dir / "ex").string() + " " + kQuick);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(dir / "ex" / "summary.txt"));
    EXPECT_TRUE(fs::exists(dir / "ex" / "distribution.csv"));

    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "ou.ini");
        cfg << "; scalar OU\n[experiment]\nsystem = ou\noutput_dir = " << (dir / "ou").string()
            << "\n[simulation]\nx0 = 0\n";
    }
    r = run("run --config " + (dir / "ou.ini").string() + " " + kQuick);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("system = ou"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "ou" / "occupancy.csv"));

    EXPECT_EQ(run("run --config " + (dir / "missing.ini").string()).code, 4);
    EXPECT_EQ(run("run --config " + (dir / "ou.ini").string() + " --set nope.key=1").code, 4);
    EXPECT_EQ(run("example --set simulation.x0=1,2,3 " + std::string(kQuick)).code, 4);
    fs::remove_all(dir);
}

TEST(Cli, Version) {
    const Result r = run("--version");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("0.1.0"), std::string::npos);
}
