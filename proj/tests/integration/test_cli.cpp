#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "riskflow/cli/config.hpp"
#include "riskflow/cli/result.hpp"
#include "riskflow/cli/runner.hpp"
#include "riskflow/core/errors.hpp"
#include "riskflow/engine/parallel.hpp"

using namespace riskflow;
using namespace riskflow::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmallCashflow = R"({
  "grid": {"N": 40},
  "mc": {"n_paths": 1500, "seed": 7},
  "pilot": {"n_paths": 1500},
  "diagnostics": {"convexity_probes": 200}
})";

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "test.json");
    } catch (const ConfigurationError& e) {
        return e.what();
    }
    return {};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("riskflow_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(RISKFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json without_clock(nlohmann::json j) {
    j.erase("timestamp");
    j.erase("wall_time_s");
    j["config"]["output"].erase("dir");
    return j;
}

}  // namespace

TEST_CASE("minimal cashflow config resolves defaults") {
    const auto c = parse_config(R"({"experiment": "cashflow"})");
    CHECK(c.grid.steps == 1000);
    CHECK(c.mc.n_paths == 10000);
    CHECK(c.theta == 0.5);
    CHECK(c.resolved["grid"]["N"] == 1000);
    CHECK(c.resolved["mc"]["n_paths"] == 10000);
    CHECK(c.resolved["theta"] == 0.5);
    CHECK(c.resolved["model"]["sigma"] == 0.3);
}

TEST_CASE("schema violations name the key") {
    CHECK(error_of(R"({"model": {"sigma": -0.3}})").find("sigma") != std::string::npos);
    CHECK(error_of(R"({"model": {"sigm": 0.3}})").find("sigm") != std::string::npos);
    CHECK(error_of(R"({"grid": {"N": 0}})").find("grid.N") != std::string::npos);
    CHECK(error_of(R"({"experiment": "other"})").find("experiment") != std::string::npos);
    CHECK(error_of(R"({"model": {"marks": [1.0], "weights": []}})").find("weights") != std::string::npos);
    CHECK(error_of(R"({"mc": {"seed": "x"}})").find("mc.seed") != std::string::npos);
}

TEST_CASE("parse errors carry line and column") {
    const auto msg = error_of("{\n  \"grid\": {\"N\": 10,}\n}");
    CHECK(msg.find("test.json:2:20") != std::string::npos);
}

TEST_CASE("overrides update the resolved echo") {
    auto c = parse_config("{}");
    Overrides o;
    o.paths = 100;
    o.seed = 9;
    o.theta = 0.25;
    apply_overrides(c, o);
    CHECK(c.resolved["mc"]["n_paths"] == 100);
    CHECK(c.resolved["mc"]["seed"] == 9);
    CHECK(c.cashflow.theta == 0.25);
    o = {};
    o.paths = 1;
    CHECK_THROWS_AS(apply_overrides(c, o), ConfigurationError);
}

TEST_CASE("canonical serialization") {
    nlohmann::json j = {{"b", 0.1}, {"a", {1, 2}}, {"c", std::nan("")}};
    CHECK(canonical_dump(j, -1) == R"({"a":[1,2],"b":0.10000000000000001,"c":null})");
    const auto back = nlohmann::json::parse(canonical_dump(j));
    CHECK(back["b"].get<double>() == 0.1);
    CHECK(fnv1a("") == 14695981039346656037ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(metric(std::nan("")).at("value").is_null());
}

TEST_CASE("cashflow result schema and determinism") {
    auto c = parse_config(kSmallCashflow);
    c.output.dir = scratch("det_a").string();
    set_worker_override(1);
    const auto a = run(c);
    c.output.dir = scratch("det_b").string();
    set_worker_override(3);
    const auto b = run(c);
    set_worker_override(0);

    for (const char* key : {"J_theta", "var_psi", "necessary_condition", "sufficient_probe", "config", "version",
                            "timestamp", "wall_time_s", "determinism_hash"}) {
        CHECK(a.result.contains(key));
    }
    CHECK(a.result["var_psi"].contains("se"));
    CHECK(a.result["var_psi"].contains("ci"));
    CHECK(a.result["necessary_condition"]["verdict"] == "pass");
    CHECK(a.result["determinism_hash"] == b.result["determinism_hash"]);
    CHECK(canonical_dump(without_clock(a.result)) == canonical_dump(without_clock(b.result)));
    CHECK(determinism_hash(a.result) == a.result["determinism_hash"].get<std::string>());

    const auto stored = nlohmann::json::parse(slurp(fs::path(c.output.dir) / "result.json"));
    CHECK(canonical_dump(stored) == canonical_dump(b.result));
    CHECK(fs::exists(fs::path(c.output.dir) / "plot.csv"));

    auto other = c;
    other.mc.seed = 8;
    other.resolved["mc"]["seed"] = 8;
    CHECK(run(other).result["determinism_hash"] != a.result["determinism_hash"]);
}

TEST_CASE("command line") {
    const auto dir = scratch("bin");
    const auto cfg = dir / "small.json";
    std::ofstream(cfg) << kSmallCashflow;

    SUBCASE("paths override reaches the result") {
        const auto out = dir / "override";
        CHECK(run_binary("--config " + cfg.string() + " --paths 100 --quiet --dump-paths --out " + out.string()) ==
              0);
        const auto r = nlohmann::json::parse(slurp(out / "result.json"));
        CHECK(r["config"]["mc"]["n_paths"] == 100);
        CHECK(r["J_theta"]["linear"]["n"] == 100);
        CHECK(fs::exists(out / "paths.csv"));
    }
    SUBCASE("byte-identical apart from the clock fields") {
        const auto o1 = dir / "r1", o2 = dir / "r2";
        REQUIRE(run_binary("--config " + cfg.string() + " --quiet --out " + o1.string()) == 0);
        REQUIRE(run_binary("--config " + cfg.string() + " --quiet --out " + o2.string()) == 0);
        auto strip = [](std::string s) {
            std::istringstream in(s);
            std::string line, kept;
            while (std::getline(in, line)) {
                if (line.find("\"timestamp\"") != std::string::npos) continue;
                if (line.find("\"wall_time_s\"") != std::string::npos) continue;
                if (line.find("\"dir\"") != std::string::npos) continue;
                kept += line + "\n";
            }
            return kept;
        };
        CHECK(strip(slurp(o1 / "result.json")) == strip(slurp(o2 / "result.json")));
    }
    SUBCASE("exit codes") {
        const auto bad = dir / "bad.json";
        std::ofstream(bad) << R"({"model": {"sigm": 0.3}})";
        CHECK(run_binary("--config " + bad.string()) == 1);
        CHECK(run_binary("--config " + (dir / "missing.json").string()) == 1);
        CHECK(run_binary("--bogus-flag") == 1);
        // Two Euler steps bias y0 far outside three standard errors.
        CHECK(run_binary("--experiment generic_fbsde --steps 2 --paths 20000 --quiet") == 2);
        CHECK(run_binary("--experiment generic_fbsde --steps 50 --paths 5000 --quiet") == 0);
    }
}
