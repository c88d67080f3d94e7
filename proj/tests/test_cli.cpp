#include <catch2/catch_amalgamated.hpp>

#include "json.hpp"
#include "test_util.hpp"

using namespace gridbound;
using Catch::Approx;
using testutil::repo_path;
using testutil::run_cli;

TEST_CASE("bound emits a report and exits clean") {
    auto res = run_cli("bound " + repo_path("docs/cases/ring3.json"));
    REQUIRE(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["lower"].get<double>() <= j["upper"].get<double>());
    CHECK(j["infeasible"] == false);
    CHECK(j["upper"].get<double>() == Approx(21.0).epsilon(1e-9));
    CHECK(j["terms"].contains("penalty_inj"));
    CHECK(j["time_index"] == 0);
}

TEST_CASE("bound signals certified infeasibility with exit 3") {
    auto res = run_cli("bound " + repo_path("docs/cases/infeasible3.json"));
    REQUIRE(res.exit_code == 3);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["infeasible"] == true);
    CHECK(j["upper"].get<double>() < 0.0);
}

TEST_CASE("missing case file exits 1 with a message") {
    auto res = run_cli("bound /nonexistent/nope.json", /*merge_stderr=*/true);
    CHECK(res.exit_code == 1);
    CHECK(res.out.find("error:") != std::string::npos);
}

TEST_CASE("malformed case exits 1") {
    const std::string path = "/tmp/gridbound_test_bad.json";
    {
        std::ofstream out(path);
        out << "{\"buses\": []}";
    }
    CHECK(run_cli("bound " + path).exit_code == 1);
}

TEST_CASE("islanding contingency: exit 2, or skipped on request") {
    GridCase chain;
    chain.buses = {{0, true}, {1, false}, {2, false}};
    chain.lines = {{0, 0, 1, 2.0, 1.0, 1.0}, {1, 1, 2, 2.0, 1.0, 1.0}};
    Generator g;
    g.id = 0;
    g.bus = 0;
    g.p_min = 0.0;
    g.p_max = 0.5;
    g.cost_curve = {{{1.0, 0.5}}, CurveKind::ConvexCost};
    chain.generators = {g};
    Demand d;
    d.id = 0;
    d.bus = 2;
    d.p_min = 0.0;
    d.p_max = 0.5;
    d.benefit_curve = {{{2.0, 0.5}}, CurveKind::ConcaveBenefit};
    chain.demands = {d};
    chain.contingencies = {1};  // a bridge in a radial network
    chain.tau = 1.0;
    chain.penalty_inj = 10.0;
    chain.penalty_flow = 10.0;
    const std::string path = testutil::write_temp_case(chain, "bridge");

    CHECK(run_cli("bound " + path).exit_code == 2);

    auto res = run_cli("bound " + path + " --skip-islanding");
    REQUIRE(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    REQUIRE(j.contains("skipped_islanding"));
    CHECK(j["skipped_islanding"] == std::vector<int>{1});
}

TEST_CASE("verify is clean on ring3 and reports the oracle gap") {
    auto res = run_cli("verify " + repo_path("docs/cases/ring3.json") +
                       " --samples 2000 --seed 3 --grid 120");
    REQUIRE(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["violations"] == 0);
    CHECK(j["oracle_max"].get<double>() > 0.0);
    CHECK(j["gap_vs_oracle"].get<double>() == Approx(0.117).margin(2e-3));
}

TEST_CASE("verify's corrupted self-test trips") {
    auto res = run_cli("verify " + repo_path("docs/cases/tight2.json") +
                       " --samples 1000 --seed 1 --self-test-corrupt");
    REQUIRE(res.exit_code == 4);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["violations"].get<int>() > 0);
    CHECK(j["corrupted_upper"] == true);
}

TEST_CASE("verify rejects a zero sample count") {
    auto res = run_cli("verify " + repo_path("docs/cases/ring3.json") + " --samples 0");
    CHECK(res.exit_code != 0);
}

TEST_CASE("ptdf prints plain CSV") {
    auto res = run_cli("ptdf " + repo_path("docs/cases/tight2.json"));
    REQUIRE(res.exit_code == 0);
    CHECK(res.out == "0,-1\n");
}

TEST_CASE("gen is deterministic and valid") {
    auto a = run_cli("gen --buses 12 --seed 5");
    auto b = run_cli("gen --buses 12 --seed 5");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    auto c = parse_case(a.out);
    CHECK(c.n_buses() == 12);
    auto other = run_cli("gen --buses 12 --seed 6");
    CHECK(a.out != other.out);
}

TEST_CASE("bench emits one sample per repeat") {
    auto res = run_cli("bench --buses 20 --repeat 5 --seed 2 --threads 1");
    REQUIRE(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["samples_s"].size() == 5);
    CHECK(j["bound_s"]["min"].get<double>() <= j["bound_s"]["mean"].get<double>());
    CHECK(j["bound_s"]["mean"].get<double>() <= j["bound_s"]["max"].get<double>());
    CHECK(j["repeat"] == 5);
}

TEST_CASE("bench caps the contingency request") {
    auto res = run_cli("bench --buses 10 --repeat 1 --ctg 3 --seed 4");
    REQUIRE(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["contingencies"].get<int>() <= 3);
}

TEST_CASE("--output writes the report to a file") {
    const std::string out_path = "/tmp/gridbound_test_report.json";
    std::remove(out_path.c_str());
    auto res = run_cli("bound " + repo_path("docs/cases/ring3.json") + " --output " + out_path);
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.empty());
    auto j = nlohmann::json::parse(testutil::slurp(out_path));
    CHECK(j["upper"].get<double>() == Approx(21.0).epsilon(1e-9));
}
