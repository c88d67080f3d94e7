#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace gridbound;
using Catch::Approx;

TEST_CASE("flat objective: zero dispatch, zero surplus") {
    auto c = testutil::load_case("docs/cases/ring3.json");
    VectorXd zero(1);
    zero << 0.0;
    CHECK(flat_objective(c, zero, zero) == Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(flat_objective(c, VectorXd::Zero(2), zero), DimensionError);
    VectorXd outside(1);
    outside << 5.0;
    CHECK_THROWS_AS(flat_objective(c, outside, zero), DomainError);
}

TEST_CASE("flat objective prices a single overload linearly") {
    auto c = parse_case(R"({
      "buses": [{"id":0,"slack":true},{"id":1}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":4.0,"limit_base":0.5,"limit_ctg":0.5}],
      "generators": [{"id":0,"bus":0,"p_min":0.0,"p_max":1.0,"cost":[[10.0,1.0]]}],
      "demands": [{"id":0,"bus":1,"p_min":0.0,"p_max":1.0,"benefit":[[10.0,1.0]]}],
      "contingencies": [], "tau": 1.0, "penalty_inj": 1000.0, "penalty_flow": 100.0})");
    VectorXd a(1), b(1);
    a << 0.5;
    b << 0.75;
    CHECK(flat_objective(c, a, a) - flat_objective(c, b, b) == Approx(25.0).margin(1e-9));
}

TEST_CASE("grid search finds the matched-quantity optimum") {
    // demand marginal value exceeds the generation cost, nothing congests and
    // imbalance is priced out, so surplus peaks at the shared upper limit
    auto c = parse_case(R"({
      "buses": [{"id":0,"slack":true},{"id":1}],
      "lines": [{"id":0,"from":0,"to":1,"susceptance":5.0,"limit_base":10.0,"limit_ctg":10.0}],
      "generators": [{"id":0,"bus":0,"p_min":0.0,"p_max":1.0,"cost":[[1.0,1.0]]}],
      "demands": [{"id":0,"bus":1,"p_min":0.0,"p_max":1.0,"benefit":[[5.0,1.0]]}],
      "contingencies": [], "tau": 1.0, "penalty_inj": 1000.0, "penalty_flow": 1000.0})");
    const auto gs = grid_search_max(c, 41);
    REQUIRE(gs.argmax.size() == 2);
    CHECK(gs.argmax[0] == Approx(1.0));
    CHECK(gs.argmax[1] == Approx(1.0));
    CHECK(gs.value == Approx(4.0));  // 5 - 1, balanced at 1 pu

    // resolution 1: midpoints plus the always-included corner sweep
    const auto gs1 = grid_search_max(c, 1);
    CHECK(gs1.value == Approx(4.0));  // the (1,1) corner still wins
}

TEST_CASE("grid search guards its input") {
    GridCase big = random_case(24, 1.4, 55);
    for (std::uint64_t s = 56; big.n_gens() + big.n_demands() <= 6 && s < 200; ++s)
        big = random_case(24, 1.4, s);
    REQUIRE(big.n_gens() + big.n_demands() > 6);
    CHECK_THROWS_AS(grid_search_max(big, 3), DimensionTooLargeError);

    auto c = testutil::load_case("docs/cases/tight2.json");
    CHECK_THROWS_AS(grid_search_max(c, 0), DomainError);
    CHECK_THROWS_AS(grid_search_max(c, 10000), DimensionTooLargeError);  // 1e8 points
}

TEST_CASE("soundness sampling is deterministic and clean on fixtures") {
    for (const char* rel : {"docs/cases/ring3.json", "docs/cases/tight2.json"}) {
        auto c = testutil::load_case(rel);
        auto b = testutil::build_all(c);
        CHECK(sample_soundness(c, b.graph, 2000, 7) == 0);
        CHECK(sample_soundness(c, b.graph, 2000, 7) == 0);  // same seed, same verdict
    }
}

TEST_CASE("a corrupted upper bound is caught") {
    auto c = testutil::load_case("docs/cases/tight2.json");
    auto b = testutil::build_all(c);
    const auto r = compute_bounds(b.graph, device_box(c));
    const int violations =
        count_bound_violations(c, 2000, 7, r.objective_lower, r.objective_upper - 1.0);
    CHECK(violations > 0);
    const int again =
        count_bound_violations(c, 2000, 7, r.objective_lower, r.objective_upper - 1.0);
    CHECK(violations == again);  // seeded determinism
}

TEST_CASE("random cases honor their contract") {
    CHECK(random_case(2, 1.5, 1).n_lines() == 1);

    auto c30 = random_case(30, 1.5, 2);
    CHECK(c30.n_lines() >= 43);
    CHECK(c30.n_lines() <= 44);
    CHECK_NOTHROW(validate(c30));

    // deterministic to the byte
    CHECK(serialize(random_case(17, 1.4, 99)) == serialize(random_case(17, 1.4, 99)));
    CHECK(serialize(random_case(17, 1.4, 99)) != serialize(random_case(17, 1.4, 100)));

    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const int n = 2 + static_cast<int>(seed % 14);
        auto c = random_case(n, 1.3, seed);
        CHECK_NOTHROW(validate(c));
        CHECK(parse_case(serialize(c)) == c);
        // contingencies never island: precompute must accept all of them
        auto nm = build_ptdf(c);
        if (!c.contingencies.empty()) CHECK_NOTHROW(precompute(nm, c));
    }
}

TEST_CASE("flat and graph objectives agree across random cases") {
    std::mt19937_64 eng(16);
    auto uni = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    for (std::uint64_t seed : {401, 402, 403, 404}) {
        auto c = random_case(2 + static_cast<int>(seed % 20), 1.5, seed);
        auto b = testutil::build_all(c);
        const auto box = device_box(c);
        for (int k = 0; k < 100; ++k) {
            VectorXd x(box.size());
            for (Eigen::Index i = 0; i < box.size(); ++i)
                x[i] = box.lower()[i] + uni() * (box.upper()[i] - box.lower()[i]);
            const double flat = flat_objective(c, x.head(c.n_gens()), x.tail(c.n_demands()));
            const double graph =
                evaluate_concrete(b.graph, x.head(c.n_gens()), x.tail(c.n_demands()));
            CHECK(std::abs(flat - graph) <=
                  1e-8 * std::max(1.0, std::max(std::abs(flat), std::abs(graph))));
        }
    }
}

TEST_CASE("grid search maximum sits inside the certified interval") {
    auto c = testutil::load_case("docs/cases/ring3.json");
    auto b = testutil::build_all(c);
    const auto r = compute_bounds(b.graph, device_box(c));
    const auto gs = grid_search_max(c, 60);
    CHECK(gs.value <= r.objective_upper);
    CHECK(gs.value >= r.objective_lower);
}
