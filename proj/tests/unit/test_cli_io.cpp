#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "rtfim/commands.hpp"
#include "rtfim/config.hpp"
#include "rtfim/errors.hpp"
#include "rtfim/table.hpp"

using namespace rtfim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rtfim-test-" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp_without_timestamp(const fs::path& p) {
    std::ifstream in(p);
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind("# timestamp:", 0) != 0) {
            out += line + "\n";
        }
    }
    return out;
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(RTFIM_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing, overrides and hashing") {
    RunConfig c("ensemble");
    CHECK(c.get_doubles("tau_q") == std::vector<double>{16, 32, 64, 128, 256});
    c.load_text("# comment\n  sigma = 0, 0.8   # trailing\n\ntau_q=16:64:16\n");
    CHECK(c.get_doubles("sigma") == std::vector<double>{0.0, 0.8});
    CHECK(c.get_doubles("tau_q") == std::vector<double>{16, 32, 48, 64});
    c.set_assignment("n=256");
    CHECK(c.get_ints("n") == std::vector<int>{256});
    CHECK(c.ensemble_plan().protocol.order == 4);

    const auto h = c.hash();
    c.set("output_dir", "/tmp/elsewhere");
    c.set("threads", "8");
    CHECK(c.hash() == h);
    c.set("base_seed", "2");
    CHECK(c.hash() != h);

    CHECK_THROWS_AS(c.set("no_such_key", "1"), ConfigError);
    CHECK_THROWS_AS(c.set("zz_max_r", "1"), ConfigError);  // quench-only key
    CHECK_THROWS_AS(c.load_text("sigma 0.5\n"), ConfigError);
    c.set("order", "two");
    CHECK_THROWS_AS(c.protocol(), ConfigError);
    CHECK_THROWS_AS(RunConfig("plot"), ConfigError);
    CHECK_THROWS_AS(parse_double_list("1:0:0.1"), ConfigError);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("output directory falls back to the environment") {
    RunConfig c("verify");
    ::setenv(kOutputDirEnv, "/tmp/from-env", 1);
    CHECK(c.output_dir() == fs::path("/tmp/from-env"));
    c.set("output_dir", "explicit");
    CHECK(c.output_dir() == fs::path("explicit"));
    ::unsetenv(kOutputDirEnv);
}

TEST_CASE("doubles round-trip with 17 significant digits") {
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-308, 0.028260349906400001}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("csv and json layout") {
    Table t("demo", {"a", "b", "label"});
    t.add_row({0.5, 3LL, std::string("x,y")});
    CHECK_THROWS_AS(t.add_row({1.0}), InvalidArgument);
    const TableMeta meta{"ensemble", "00000000deadbeef", 7, "test", "2000-01-01T00:00:00Z"};
    const std::string csv = render_csv(t, meta);
    CHECK(csv.find("# schema_version: 1\n") == 0);
    CHECK(csv.find("# config_hash: 00000000deadbeef\n") != std::string::npos);
    CHECK(csv.find("# base_seed: 7\n") != std::string::npos);
    CHECK(csv.find("# build: test\n") != std::string::npos);
    CHECK(csv.find("a,b,label\n0.5,3,\"x,y\"\n") != std::string::npos);
    const std::string json = render_json(t, meta);
    CHECK(json.find("\"schema_version\":1") != std::string::npos);
    CHECK(json.find("[0.5,3,\"x,y\"]") != std::string::npos);
}

TEST_CASE("static-scan writes five tables and reruns byte-identically") {
    RunConfig c("static-scan");
    c.set("sigma", "0,0.4");
    c.set("g", "0.5,1.5");
    c.set("n", "16,32");
    c.set("gc_sigma", "0,0.8");
    c.set("realization_budget", "64");
    const auto a = scratch_dir("scan-a");
    const auto b = scratch_dir("scan-b");
    std::ostringstream out, err;
    c.set("output_dir", a.string());
    REQUIRE(run_command(c, out, err) == kExitOk);
    c.set("output_dir", b.string());
    c.set("threads", "2");
    REQUIRE(run_command(c, out, err) == kExitOk);
    for (const char* name : {"critical_field", "kink_density", "coefficient", "correlator", "kink_probability"}) {
        const auto file = std::string(name) + ".csv";
        REQUIRE(fs::exists(a / file));
        CHECK(slurp_without_timestamp(a / file) == slurp_without_timestamp(b / file));
    }
    CHECK(fs::exists(a / "run_meta.json"));
}

TEST_CASE("exit codes") {
    std::ostringstream out, err;
    RunConfig empty("static-scan");
    empty.set("output_dir", scratch_dir("empty").string());
    empty.set("sigma", "");
    CHECK(run_command(empty, out, err) == kExitConfigError);

    RunConfig big("verify");
    big.set("output_dir", scratch_dir("big").string());
    big.set("verify_n", "14");
    CHECK(run_command(big, out, err) == kExitConfigError);

    // Through the executable, with the output directory from the environment.
    const auto dir = scratch_dir("cli");
    CHECK(run_cli("verify --set verify_n=4 --set verify_draws=3 --set verify_dynamic_n=4 -o " + dir.string()) ==
          kExitOk);
    CHECK(fs::exists(dir / "verify.json"));
    CHECK(run_cli("verify --set verify_n=14") == kExitConfigError);
    CHECK(run_cli("quench --set bogus=1") == kExitConfigError);
    CHECK(run_cli("frobnicate") == kExitConfigError);
    const auto env_dir = scratch_dir("env");
    ::setenv(kOutputDirEnv, env_dir.c_str(), 1);
    CHECK(run_cli("quench --set quench_n=8 --set quench_tau_q=1 --set n_snapshots=3") == kExitOk);
    ::unsetenv(kOutputDirEnv);
    CHECK(fs::exists(env_dir / "trajectory.csv"));
}
