#include "perflens/cli.hpp"

#include "../support/temp_dir.hpp"

#include "doctest.h"

#include <nlohmann/json.hpp>

#include <sstream>

using perflens::testing::TempDir;

namespace {

const std::filesystem::path kFixtures(PERFLENS_FIXTURES);

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = perflens::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::filesystem::path& rel) { return (kFixtures / rel).string(); }

}  // namespace

TEST_CASE("load summary") {
    auto r = cli({"load", fixture("reports/three_in_file.json")});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("3 procedures, 1 file, ", 0) == 0);
    r = cli({"load", fixture("reports/single.json")});
    CHECK(r.out.rfind("1 procedure, 1 file, ", 0) == 0);
    r = cli({"load", fixture("reports/missing.json")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: IoError", 0) == 0);
    r = cli({"load", fixture("reports/not_json.txt")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: FormatError", 0) == 0);

    TempDir root;
    r = cli({"load", fixture("reports/single.json"), "--root", root.path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("recorded run 1") != std::string::npos);
}

TEST_CASE("annotate the Java case study") {
    const std::string dir = fixture("case_study/java/buggy");
    auto r = cli({"annotate", dir, "--report", dir + "/report.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("IndexNameMatcher.java:15") != std::string::npos);
    CHECK(r.out.find("[red]") != std::string::npos);
    CHECK(r.out.find("[green]") != std::string::npos);

    const auto serial = cli({"annotate", dir, "--report", dir + "/report.json", "--serial"});
    CHECK(serial.out == r.out);

    r = cli({"annotate", dir, "--report", dir + "/report.json", "--format", "json"});
    const auto items = nlohmann::json::parse(r.out);
    REQUIRE(items.size() == 2);
    CHECK(items[1].at("severity") == "polynomial");
}

TEST_CASE("analyze MiniLang and diff runs") {
    TempDir tmp;
    auto r = cli({"analyze", fixture("case_study/buggy"), "--format", "json"});
    REQUIRE(r.code == 0);
    tmp.write("buggy.json", r.out);
    r = cli({"analyze", fixture("case_study/fixed"), "--format", "json"});
    REQUIRE(r.code == 0);
    tmp.write("fixed.json", r.out);

    const auto text = cli({"analyze", fixture("case_study/buggy")});
    CHECK(text.out.find("MatchesIndices.matchesIndices") != std::string::npos);
    CHECK(text.out.find("O(indices × shards) [red]") != std::string::npos);

    const auto improved = cli({"diff", (tmp.path / "buggy.json").string(), (tmp.path / "fixed.json").string()});
    CHECK(improved.code == 0);
    CHECK(improved.out.find("Improved") != std::string::npos);
    const auto regressed = cli({"diff", (tmp.path / "fixed.json").string(), (tmp.path / "buggy.json").string()});
    CHECK(regressed.code == 2);
    CHECK(regressed.out.find("Regressed") != std::string::npos);
    const auto same = cli({"diff", (tmp.path / "fixed.json").string(), (tmp.path / "fixed.json").string()});
    CHECK(same.code == 0);
    CHECK(same.out.find("Improved") == std::string::npos);
}

TEST_CASE("analyze unknown chain with and without risky constant") {
    auto r = cli({"analyze", fixture("mini"), "--format", "json"});
    REQUIRE(r.code == 0);
    auto report = nlohmann::json::parse(r.out);
    std::map<std::string, std::string> cost;
    for (const auto& e : report) cost[e.at("procedure_id")] = e.at("exec_cost").at("polynomial");
    CHECK(cost.at("unknown_chain.top") == "unknown");
    CHECK(cost.at("unknown_chain.bystander") != "unknown");

    r = cli({"analyze", fixture("mini"), "--format", "json", "--risky-constant"});
    report = nlohmann::json::parse(r.out);
    for (const auto& e : report) cost[e.at("procedure_id")] = e.at("exec_cost").at("polynomial");
    CHECK(cost.at("unknown_chain.top") == "6 × m + 1");
    CHECK(cost.at("recursion.ping") == "unknown");
}

TEST_CASE("bench and usage errors") {
    auto r = cli({"bench", "load", "--entries", "100", "--runs", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("median_ms=") != std::string::npos);
    r = cli({"bench", "staleness", "--lines", "200", "--runs", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("median_ms=") != std::string::npos);
    CHECK(cli({"frobnicate"}).code != 0);
    CHECK(cli({}).code != 0);
}
