#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end checks of the cranectl binary: exit codes, report content
// and the files it writes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "crane/simulate.hpp"

namespace fs = std::filesystem;

#ifndef CRANECTL_BIN
#define CRANECTL_BIN "cranectl"
#endif
#ifndef CRANE_CONFIG_DIR
#define CRANE_CONFIG_DIR "configs"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("cranectl_test_" + std::to_string(::getpid()) +
                                                "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string& args) {
    const fs::path dir = scratch_dir();
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(CRANECTL_BIN) + " " + args + " >" + out.string() + " 2>" +
                            err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string varying_cfg() {
    return std::string(CRANE_CONFIG_DIR) + "/varying_rope.cfg";
}
std::string constant_cfg() {
    return std::string(CRANE_CONFIG_DIR) + "/constant_rope.cfg";
}

// Copy a bundled config with a line rewritten (for negative tests).
fs::path edited_config(const std::string& base, const std::string& from, const std::string& to) {
    std::string text = slurp(base);
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), to);
    const fs::path p = scratch_dir() / "edited.cfg";
    std::ofstream(p) << text;
    return p;
}

double value_after(const std::string& text, const std::string& label) {
    const auto pos = text.find(label);
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + label.size()));
}

} // namespace

TEST_CASE("synthesize reproduces the published varying-rope gain") {
    const fs::path out = scratch_dir();
    auto r = run_cli("synthesize " + varying_cfg() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("controllable") != std::string::npos);
    CHECK(r.out.find("0.105") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
    CHECK(fs::exists(out / "gain.csv"));
}

TEST_CASE("synthesize reproduces the published fixed-rope gain") {
    const fs::path out = scratch_dir();
    auto r = run_cli("synthesize " + constant_cfg() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("99.1882") != std::string::npos);
    CHECK(r.out.find("-2.106") != std::string::npos);
}

TEST_CASE("a positive pole fails with exit 2 and is named") {
    auto bad = edited_config(varying_cfg(), "poles = -0.1,", "poles = 0.1,");
    auto r = run_cli("synthesize " + bad.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("0.1") != std::string::npos);
    CHECK(r.err.find("negative") != std::string::npos);
}

TEST_CASE("simulate writes the documented artifacts") {
    const fs::path out = scratch_dir();
    auto r = run_cli("simulate " + varying_cfg() + " --horizon 10 --out " + out.string() +
                     " --export-forces");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("settle time") != std::string::npos);
    REQUIRE(fs::exists(out / "trajectory.csv"));
    REQUIRE(fs::exists(out / "forces.csv"));
    REQUIRE(fs::exists(out / "plots.gp"));

    auto tr = crane::sim::parse_trajectory_csv(slurp(out / "trajectory.csv"));
    CHECK(tr.state_dim == 6);
    CHECK(tr.times.size() == 1001);
    auto fp = crane::sim::parse_forces_csv(slurp(out / "forces.csv"));
    CHECK(fp.force_dim == 3);
    CHECK(fp.times.size() == tr.times.size());
}

TEST_CASE("playback at a fine shared step reproduces the closed loop") {
    const fs::path out = scratch_dir();
    auto r = run_cli("simulate " + varying_cfg() + " --horizon 10 --step 0.00025 --playback --out " +
                     out.string());
    CHECK(r.exit_code == 0);
    const double dev = value_after(r.out, "playback max deviation: ");
    CHECK(dev <= 1e-6);
}

TEST_CASE("analyze certifies the linearized loop up to rmax") {
    auto r = run_cli("analyze " + varying_cfg() + " --linear-plant --rmax 2.0");
    CHECK(r.exit_code == 0);
    CHECK(value_after(r.out, "certified radius: ") == doctest::Approx(2.0));
    CHECK(value_after(r.out, "sigma at certified radius: ") == 0.0);
}

TEST_CASE("analyze finds a certificate for the crane and reports extremes") {
    auto r = run_cli("analyze " + varying_cfg());
    CHECK(r.exit_code == 0);
    CHECK(value_after(r.out, "certified radius: ") > 0.0);
    CHECK(value_after(r.out, "lambda_max(P) = ") > 0.0);
    CHECK(r.out.find("margin") != std::string::npos);
    CHECK(r.out.find("valid") != std::string::npos);
}

TEST_CASE("analyze rejects an unstable gain file with exit 6") {
    const fs::path dir = scratch_dir();
    const fs::path gain = dir / "unstable_gain.csv";
    // Positive position feedback destabilizes every channel.
    std::ofstream(gain) << "-0.105,0,0,-0.65,0,0\n0,-0.03,0,0,-0.35,0\n0,0,-0.025,0,0,-0.35\n";
    auto r = run_cli("analyze " + varying_cfg() + " --gain " + gain.string());
    CHECK(r.exit_code == 6);
    CHECK(r.err.find("NotHurwitz") != std::string::npos);
}

TEST_CASE("comparing a config against itself reports ratio one") {
    const fs::path out = scratch_dir();
    auto r = run_cli("compare " + varying_cfg() + " " + varying_cfg() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(value_after(r.out, "transport ratio A/B: ") == doctest::Approx(1.0));
    CHECK(fs::exists(out / "comparison.csv"));
    CHECK(fs::exists(out / "compare_a.csv"));
}

TEST_CASE("mismatched transport tasks fail with exit 7") {
    auto other = edited_config(constant_cfg(), "target = 10, 0, 0, 0", "target = 12, 0, 0, 0");
    auto r = run_cli("compare " + varying_cfg() + " " + other.string());
    CHECK(r.exit_code == 7);
}

TEST_CASE("a missing config file fails with exit 2") {
    auto r = run_cli("synthesize /nonexistent/nowhere.cfg");
    CHECK(r.exit_code == 2);
}
