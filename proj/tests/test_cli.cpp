#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "weakgibbs");
    std::ostringstream o, e;
    const int c = wg::cli::run(args, o, e);
    return {c, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wg_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("check passes on the default model and writes a manifest") {
    const auto d = scratch("check");
    const auto r = run({"check", "--box", "2x2", "--trials", "10", "--out", d.string()});
    CHECK(r.code == 0);
    const json m = json::parse(slurp(d / "manifest.json"));
    CHECK(m["exit_code"] == 0);
    CHECK(m["command"] == "check");
    CHECK(fs::exists(d / "check.json"));
}

TEST_CASE("fault injection gives a violation with a witness") {
    const auto d = scratch("fault");
    const auto r = run({"check", "--box", "2x2", "--trials", "5", "--inject-fault", "--out", d.string()});
    CHECK(r.code == 1);
    CHECK(slurp(d / "check.json").find("witness") != std::string::npos);
}

TEST_CASE("configuration errors exit with 2") {
    const auto d = scratch("bad");
    put(d / "bad.json", "{\n \"model\": {\"model\": \"rfim\", \"J\": \"x\"}\n}");
    const auto r = run({"check", "--config", (d / "bad.json").string(), "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.json") != std::string::npos);
    CHECK(run({"converge", "--out", d.string()}).code == 2);  // no seed
    CHECK(run({"check", "--box", "2x2x2", "--out", d.string()}).code == 2);
    CHECK(run({"no-such-command"}).code == 2);
}

TEST_CASE("disorder-free model: empty potential and passing check") {
    const auto d = scratch("free");
    put(d / "free.json", R"({"model": {"model": "free", "dim": 1, "states": 2}, "box": "3"})");
    CHECK(run({"check", "--config", (d / "free.json").string(), "--out", (d / "c").string()}).code == 0);
    CHECK(run({"potential", "--config", (d / "free.json").string(), "--out", (d / "p").string()}).code == 0);
    const json p = json::parse(slurp(d / "p" / "potential.json"));
    CHECK(p["entries"].empty());
}

TEST_CASE("manifest re-run reproduces the outputs") {
    const auto d = scratch("rerun");
    put(d / "c.json", R"({"model": {"model": "rfim", "dim": 1, "J": 0.3, "h": 0.5}, "box": "6", "radii": [1, 2]})");
    REQUIRE(run({"converge", "--config", (d / "c.json").string(), "--seed", "9", "--samples", "60", "--out",
                 (d / "a").string()})
                .code == 0);
    REQUIRE(run({"converge", "--config", (d / "a" / "manifest.json").string(), "--out", (d / "b").string()}).code ==
            0);
    CHECK(slurp(d / "a" / "converge.csv") == slurp(d / "b" / "converge.csv"));
    CHECK_FALSE(slurp(d / "a" / "converge.csv").empty());
}

TEST_CASE("dilute coefficients") {
    const auto d = scratch("dilute");
    CHECK(run({"dilute-coeffs", "--box", "2x2", "--out", d.string()}).code == 0);
    CHECK(slurp(d / "dilute_coeffs.csv").find("0.29075356032839") != std::string::npos);
}

}  // TEST_SUITE
