#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "fieldkde/config.hpp"

using namespace fieldkde;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("minimal clt config parses against the preset") {
    RunConfig c = RunConfig::from_json_text(
        R"({"experiment": "clt", "points": [-1.0, 1.0], "replicates": 50})");
    CHECK(c.experiment == "clt");
    CHECK(c.points.size() == 2);
    CHECK(c.replicates == 50);
    CHECK(c.field.d == 2);                     // preset default
    CHECK(c.field.coeffs.law == "geometric");  // preset default
    CHECK(c.seed == 1);
}

TEST_CASE("validation errors") {
    CHECK_THROWS_WITH_AS(
        RunConfig::from_json_text(R"({"experiment": "clt", "points": [1.0, 1.0]})"),
        "config: distinct points required", std::invalid_argument);

    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"experiment": "clt", "bogus": 1})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        RunConfig::from_json_text(R"({"experiment": "clt", "kernel": {"nam": "x"}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"experiment": "warp-drive"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        RunConfig::from_json_text(R"({"experiment": "clt", "schema_version": 2})"),
        std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"seed": 3})"), std::invalid_argument);
}

TEST_CASE("parse errors carry line and column") {
    try {
        RunConfig::from_json_text("{\n  \"experiment\": }\n");
        FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("parse error") != std::string::npos);
        CHECK(msg.find(":2:") != std::string::npos);
    }
}

TEST_CASE("A3 arithmetic holds for the rate preset") {
    RunConfig c = RunConfig::preset("l1-rate");
    BandwidthSchedule schedule = c.bandwidth.build();
    double prev = 0.0;
    for (std::size_t n : c.sizes) {
        double nb = static_cast<double>(n) * schedule.bandwidth(n);
        CHECK(nb > prev);  // |Λ|b = |Λ|^{2/3} increasing
        prev = nb;
    }
}

TEST_CASE("config echo is stable json") {
    RunConfig c = RunConfig::preset("audit-mn");
    std::string echo = c.to_json_text();
    CHECK(echo.find("\"experiment\": \"audit-mn\"") != std::string::npos);
    RunConfig back = RunConfig::from_json_text(echo);
    CHECK(back.to_json_text() == echo);
}

TEST_CASE("run emits byte-identical csv across worker counts and reruns") {
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "fieldkde_test_runs";
    fs::remove_all(base);

    RunConfig c = RunConfig::preset("audit-kbar");
    c.replicates = 300;
    c.m_grid = {1};
    c.b_grid = {0.25};
    c.p_grid = {2.0};

    c.out = (base / "w1").string();
    c.workers = 1;
    RunResult r1 = run(c);
    CHECK(r1.exit_code == 0);

    c.out = (base / "w3").string();
    c.workers = 3;
    RunResult r3 = run(c);
    CHECK(r3.exit_code == 0);

    c.out = (base / "w1b").string();
    c.workers = 1;
    run(c);

    std::string csv1 = slurp(base / "w1" / "audit-kbar.csv");
    CHECK(csv1 == slurp(base / "w3" / "audit-kbar.csv"));
    CHECK(csv1 == slurp(base / "w1b" / "audit-kbar.csv"));
    CHECK(fs::exists(base / "w1" / "audit-kbar.json"));
    fs::remove_all(base);
}

TEST_CASE("run creates missing output directories and rejects unwritable ones") {
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "fieldkde_test_mkdir" / "a" / "b";
    fs::remove_all(fs::temp_directory_path() / "fieldkde_test_mkdir");
    RunConfig c = RunConfig::preset("audit-mn");
    c.out = base.string();
    RunResult r = run(c);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(base / "audit-mn.csv"));
    fs::remove_all(fs::temp_directory_path() / "fieldkde_test_mkdir");

    RunConfig bad = RunConfig::preset("audit-mn");
    bad.out = "/proc/fieldkde_forbidden";
    CHECK_THROWS(run(bad));
}

TEST_CASE("assumption gate blocks and --force overrides") {
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "fieldkde_test_gate";
    fs::remove_all(base);

    // A fixed bandwidth cannot certify A3, which l1-rate requires.
    RunConfig c = RunConfig::preset("l1-rate");
    c.replicates = 5;
    c.sizes = {128, 256, 512, 1024};
    c.bandwidth.rule = "fixed";
    c.bandwidth.value = 0.2;
    c.out = (base / "blocked").string();
    RunResult blocked = run(c);
    CHECK(blocked.exit_code == 1);
    CHECK_FALSE(fs::exists(base / "blocked" / "l1-rate.csv"));

    c.force = true;
    c.out = (base / "forced").string();
    RunResult forced = run(c);
    CHECK(fs::exists(base / "forced" / "l1-rate.csv"));
    std::string json = slurp(base / "forced" / "l1-rate.json");
    CHECK(json.find("\"forced\": true") != std::string::npos);
    fs::remove_all(base);
}

TEST_CASE("grid parsing") {
    RunConfig c = RunConfig::from_json_text(
        R"({"experiment": "l1-rate", "grid": {"lo": -2.0, "hi": 2.0, "step": 0.5}})");
    REQUIRE(c.grid.has_value());
    CHECK(c.grid->lo == -2.0);
    CHECK(c.grid->step == 0.5);
    CHECK_THROWS_AS(RunConfig::from_json_text(
                        R"({"experiment": "l1-rate", "grid": {"lo": 2.0, "hi": -2.0}})"),
                    std::invalid_argument);
}

TEST_CASE("audit-mn preset passes end to end") {
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "fieldkde_test_mn";
    fs::remove_all(base);
    RunConfig c = RunConfig::preset("audit-mn");
    c.out = base.string();
    RunResult r = run(c);
    CHECK(r.exit_code == 0);
    std::string csv = slurp(base / "audit-mn.csv");
    CHECK(csv.find("bandwidth,v_n,m_n") == 0);
    fs::remove_all(base);
}
