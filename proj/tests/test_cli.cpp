#include "cli.hpp"

#include "dmc/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Invocation {
    int status;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "dmc-sim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = dmc::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dmc_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scenario ids are directory safe") {
    CHECK(dmc::cli::scenario_id("M1_limit=0.8 kV") == "m1_limit_0.8_kv");
    CHECK(dmc::cli::scenario_id("M2_limit=10 Mvar") == "m2_limit_10_mvar");
    CHECK(dmc::cli::scenario_id("///") == "scenario");
}

TEST_CASE("batch thread count honours DMC_SIM_THREADS") {
    ::setenv("DMC_SIM_THREADS", "2", 1);
    CHECK(dmc::cli::batch_threads(4) == 2);
    CHECK(dmc::cli::batch_threads(1) == 1);
    ::setenv("DMC_SIM_THREADS", "junk", 1);
    CHECK(dmc::cli::batch_threads(4) >= 1);
    ::unsetenv("DMC_SIM_THREADS");
}

TEST_CASE("validate-config accepts the shipped default silently") {
    const Invocation r = invoke({"validate-config", DMC_DEFAULT_CONFIG});
    CHECK(r.status == 0);
    CHECK(r.out.empty());
    CHECK(r.err.empty());
}

TEST_CASE("validate-config names an unknown key and its line") {
    const fs::path dir = scratch("unknown");
    write(dir / "bad.cfg", "[limits]\nm1_limit_V = 600\nm1_limt_V = 3\n");
    const Invocation r = invoke({"validate-config", (dir / "bad.cfg").string()});
    CHECK(r.status != 0);
    CHECK(r.err.find("bad.cfg:3") != std::string::npos);
    CHECK(r.err.find("m1_limt_V") != std::string::npos);
}

TEST_CASE("run with a zero M1 limit is infeasible") {
    const fs::path dir = scratch("infeasible");
    write(dir / "zero.cfg", "[limits]\nm1_limit_V = 0\n");
    const Invocation r = invoke({"run", "--config", (dir / "zero.cfg").string(), "--out", (dir / "out").string()});
    CHECK(r.status != 0);
    CHECK(r.err.find("m1_limit") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out" / "m1_limit_0.8_kv"));
}

TEST_CASE("run writes a complete scenario directory") {
    const fs::path dir = scratch("run");
    const Invocation r = invoke({"run", "--config", DMC_DEFAULT_CONFIG, "--out", (dir / "out").string(),
                                 "--duration", "30", "--decimation", "200", "--seed", "7"});
    REQUIRE(r.status == 0);
    const fs::path run_dir = dir / "out" / "m1_limit_0.8_kv";
    for (const char* f : {"telemetry.csv", "summary.csv", "summary.txt", "resolved.cfg", "manifest.json"}) {
        CHECK(fs::exists(run_dir / f));
    }
    CHECK(r.out.find("M1_limit=0.8 kV") != std::string::npos);

    SUBCASE("the resolved config validates") {
        CHECK(invoke({"validate-config", (run_dir / "resolved.cfg").string()}).status == 0);
    }
    SUBCASE("summarize reproduces the stored summary") {
        const Invocation s = invoke({"summarize", (run_dir / "telemetry.csv").string(), "--format", "csv"});
        CHECK(s.status == 0);
        CHECK(s.out == slurp(run_dir / "summary.csv"));
    }
    SUBCASE("a rerun replaces the directory with identical telemetry") {
        const std::string first = slurp(run_dir / "telemetry.csv");
        REQUIRE(invoke({"run", "--config", DMC_DEFAULT_CONFIG, "--out", (dir / "out").string(), "--duration",
                        "30", "--decimation", "200"})
                    .status == 0);
        CHECK(slurp(run_dir / "telemetry.csv") == first);
        int entries = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "out")) ++entries;
        CHECK(entries == 1);
    }
}

TEST_CASE("bad arguments exit nonzero") {
    CHECK(invoke({}).status != 0);
    CHECK(invoke({"frobnicate"}).status != 0);
    CHECK(invoke({"run", "--dt", "-1"}).status != 0);
    CHECK(invoke({"summarize", "/nonexistent.csv"}).status != 0);
}
