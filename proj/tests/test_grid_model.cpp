#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace gridbound;
using Catch::Approx;

TEST_CASE("ring3 fixture parses") {
    auto c = testutil::load_case("docs/cases/ring3.json");
    CHECK(c.n_buses() == 3);
    CHECK(c.n_lines() == 3);
    CHECK(c.n_gens() == 1);
    CHECK(c.n_demands() == 1);
    CHECK(c.slack_bus() == 0);
    CHECK(c.contingencies == std::vector<int>{0, 1});
    CHECK(c.penalty_inj == 1e6);  // stored exactly
    CHECK(c.penalty_flow == 1e6);
    CHECK(c.base_mva.has_value());
}

TEST_CASE("two slack buses rejected") {
    const std::string text = R"({
      "buses": [{"id":0,"slack":true},{"id":1,"slack":true}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0}],
      "generators": [], "demands": [], "contingencies": [], "tau": 1.0,
      "penalty_inj": 1.0, "penalty_flow": 1.0})";
    CHECK_THROWS_MATCHES(parse_case(text), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("slack")));
}

TEST_CASE("unknown keys rejected with a path") {
    const std::string text = R"({
      "buses": [{"id":0,"slack":true},{"id":1,"voltage":1.0}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0}],
      "generators": [], "demands": [], "contingencies": [], "tau": 1.0,
      "penalty_inj": 1.0, "penalty_flow": 1.0})";
    CHECK_THROWS_MATCHES(parse_case(text), SchemaError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("voltage")));
    CHECK_THROWS_AS(parse_case(R"({"weird": 1})"), SchemaError);
    CHECK_THROWS_AS(parse_case("not json at all"), SchemaError);
}

TEST_CASE("validation errors name the offending entity") {
    auto base = testutil::load_case("docs/cases/ring3.json");

    auto broken = base;
    broken.lines[1].susceptance = -2.0;
    CHECK_THROWS_MATCHES(validate(broken), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("line 1")));

    broken = base;
    broken.generators[0].p_min = 2.0;
    CHECK_THROWS_MATCHES(validate(broken), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("generator 0")));

    broken = base;
    broken.contingencies = {0, 0};
    CHECK_THROWS_MATCHES(validate(broken), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("contingency line 0")));

    broken = base;
    broken.tau = 0.0;
    CHECK_THROWS_AS(validate(broken), ValidationError);
}

TEST_CASE("curve shape is validated at parse") {
    auto base = testutil::load_case("docs/cases/ring3.json");

    auto bad = base;
    bad.generators[0].cost_curve.segments = {{5.0, 0.5}, {2.0, 0.5}};  // decreasing
    CHECK_THROWS_AS(validate(bad), ValidationError);

    bad = base;
    bad.demands[0].benefit_curve.segments = {{5.0, 0.5}, {9.0, 0.5}};  // increasing
    CHECK_THROWS_AS(validate(bad), ValidationError);

    bad = base;
    bad.generators[0].cost_curve.segments = {{5.0, 0.3}};  // narrower than the box
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("disconnected network rejected") {
    const std::string text = R"({
      "buses": [{"id":0,"slack":true},{"id":1},{"id":2},{"id":3}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0},
                {"id":1,"from":2,"to":3,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0}],
      "generators": [], "demands": [], "contingencies": [], "tau": 1.0,
      "penalty_inj": 1.0, "penalty_flow": 1.0})";
    CHECK_THROWS_AS(parse_case(text), DisconnectedError);
}

TEST_CASE("limit_ctg falls back to limit_base with a warning") {
    const std::string text = R"({
      "buses": [{"id":0,"slack":true},{"id":1}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.5}],
      "generators": [], "demands": [], "contingencies": [], "tau": 1.0,
      "penalty_inj": 1.0, "penalty_flow": 1.0})";
    std::vector<std::string> warnings;
    auto c = parse_case(text, &warnings);
    CHECK(c.lines[0].flow_limit_ctg == 1.5);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("line 0") != std::string::npos);
}

TEST_CASE("penalty coefficients default to 1e6") {
    const std::string text = R"({
      "buses": [{"id":0,"slack":true},{"id":1}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.5,"limit_ctg":1.5}],
      "generators": [], "demands": [], "contingencies": [], "tau": 1.0})";
    auto c = parse_case(text);
    CHECK(c.penalty_inj == 1e6);
    CHECK(c.penalty_flow == 1e6);
}

TEST_CASE("round trip is identity") {
    auto ring3 = testutil::load_case("docs/cases/ring3.json");
    CHECK(parse_case(serialize(ring3)) == ring3);

    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        auto c = random_case(8, 1.4, seed);
        CHECK(parse_case(serialize(c)) == c);
    }
}

TEST_CASE("entity order in the file does not matter") {
    const std::string text = R"({
      "buses": [{"id":1},{"id":0,"slack":true}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0}],
      "generators": [], "demands": [], "contingencies": [], "tau": 1.0,
      "penalty_inj": 1.0, "penalty_flow": 1.0})";
    auto c = parse_case(text);
    CHECK(c.buses[0].id == 0);
    CHECK(c.buses[1].id == 1);
}

TEST_CASE("net injection map places devices") {
    const std::string text = R"({
      "buses": [{"id":0,"slack":true},{"id":1},{"id":2}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0},
                {"id":1,"from":1,"to":2,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0}],
      "generators": [{"id":0,"bus":0,"p_min":0.0,"p_max":1.0,"cost":[[1.0,1.0]]}],
      "demands": [{"id":0,"bus":1,"p_min":0.0,"p_max":1.0,"benefit":[[2.0,1.0]]}],
      "contingencies": [], "tau": 1.0, "penalty_inj": 1.0, "penalty_flow": 1.0})";
    auto c = parse_case(text);
    auto m = net_injection_map(c);
    VectorXd pg(1), pd(1);
    pg << 0.5;
    pd << 0.3;
    VectorXd inj = m.apply(pg, pd);
    CHECK(inj[0] == 0.5);
    CHECK(inj[1] == -0.3);
    CHECK(inj[2] == 0.0);

    // dense operator agrees with the sparse route
    VectorXd x(2);
    x << 0.5, 0.3;
    CHECK((m.dense_operator() * x).isApprox(inj));
}

TEST_CASE("colocated generators sum on their bus row") {
    const std::string text = R"({
      "buses": [{"id":0,"slack":true},{"id":1}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":1.0,"limit_base":1.0,"limit_ctg":1.0}],
      "generators": [{"id":0,"bus":1,"p_min":0.0,"p_max":1.0,"cost":[[1.0,1.0]]},
                     {"id":1,"bus":1,"p_min":0.0,"p_max":1.0,"cost":[[1.0,1.0]]}],
      "demands": [], "contingencies": [], "tau": 1.0, "penalty_inj": 1.0, "penalty_flow": 1.0})";
    auto c = parse_case(text);
    VectorXd pg(2);
    pg << 0.25, 0.5;
    VectorXd inj = net_injection_map(c).apply(pg, VectorXd(0));
    CHECK(inj[1] == 0.75);
}

TEST_CASE("injection totals match device totals exactly") {
    // dyadic dispatch values make the sums exact in binary
    auto c = random_case(12, 1.5, 77);
    auto m = net_injection_map(c);
    VectorXd pg(c.n_gens()), pd(c.n_demands());
    for (int i = 0; i < c.n_gens(); ++i)
        pg[i] = c.generators[i].p_min +
                std::floor((c.generators[i].p_max - c.generators[i].p_min) * 1024.0 * (i % 3) / 3.0) /
                    1024.0;
    for (int i = 0; i < c.n_demands(); ++i) pd[i] = c.demands[i].p_min;
    const VectorXd inj = m.apply(pg, pd);
    CHECK(inj.sum() == Approx(pg.sum() - pd.sum()).margin(1e-12));
}

TEST_CASE("ring3 injection matches per-device aggregation") {
    auto c = testutil::load_case("docs/cases/ring3.json");
    auto m = net_injection_map(c);
    VectorXd pg(1), pd(1);
    pg << 0.7;
    pd << 0.4;
    VectorXd expected = VectorXd::Zero(3);
    for (const auto& g : c.generators) expected[g.bus] += pg[g.id];
    for (const auto& d : c.demands) expected[d.bus] -= pd[d.id];
    CHECK(m.apply(pg, pd).isApprox(expected));
}

TEST_CASE("device_box concatenates generator and demand limits") {
    auto c = testutil::load_case("docs/cases/ring3.json");
    auto box = device_box(c);
    REQUIRE(box.size() == 2);
    CHECK(box.lower()[0] == 0.0);
    CHECK(box.upper()[0] == 0.8);
    CHECK(box.lower()[1] == 0.0);
    CHECK(box.upper()[1] == 0.8);
}
