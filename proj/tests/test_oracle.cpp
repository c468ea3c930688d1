#include "doctest.h"
#include "shfl/oracle.hpp"
#include "support.hpp"

using namespace shfl;

TEST_CASE("one client, one edge") {
    const Scenario s = ref::tiny_scenario({{5, 5}}, {{0}}, {1}, {0.7});
    const auto costs = pair_cost_table(s, 5);
    ConstraintThresholds th;
    th.d_min = 10;
    th.kld_max = 0.1;
    const SolverOutcome o = solve_exact_p0(s, costs, {1}, {}, th, 3);
    REQUIRE(o.feasible);
    CHECK(o.assoc.edge_of(0) == 0);
    CHECK(o.objective == doctest::Approx(ref::round_objective(s, {0}, {1}, {}, 5, 3)).epsilon(1e-12));
}

TEST_CASE("hand-enumerated 3 clients on 2 edges") {
    const Scenario s = ref::tiny_scenario({{50, 50}, {50, 50}, {50, 50}}, {{0, 1}, {0, 1}, {0, 1}}, {2, 2},
                                          {1, 1, 1});
    Matrix<PairCost> c(3, 2);
    c(0, 0) = {1.0, 1.0};
    c(0, 1) = {2.0, 1.5};
    c(1, 0) = {1.5, 1.0};
    c(1, 1) = {1.0, 2.0};
    c(2, 0) = {3.0, 3.0};
    c(2, 1) = {3.0, 3.0};
    ConstraintThresholds th;
    th.d_min = 100;  // one client per edge at least
    // Feasible two-client splits (T, E incl. backhaul 0.1 s / 0.2 J per edge):
    //   0->e0, 1->e1: T = 1.1, E = 3.4, F = 2.25   <- optimum
    //   0->e1, 1->e0: T = 2.1, E = 2.9, F = 2.50
    //   any split using client 2 has T >= 3.1
    const SolverOutcome o = solve_exact_p0(s, c, {1, 1, 1}, {0.5, 0.5, 0.0}, th, 1);
    REQUIRE(o.feasible);
    CHECK(o.objective == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(o.assoc.edge_vector() == std::vector<EdgeId>{0, 1, kNoEdge});

    // offline client 0 forces the next best feasible choice
    const SolverOutcome o2 = solve_exact_p0(s, c, {0, 1, 1}, {0.5, 0.5, 0.0}, th, 1);
    REQUIRE(o2.feasible);
    CHECK(o2.assoc.edge_of(0) == kNoEdge);
}

TEST_CASE("impossible thresholds are proven infeasible") {
    const Scenario s = ref::tiny_scenario({{5, 5}, {5, 5}}, {{0}, {0}}, {2}, {0.9, 0.9});
    const auto costs = pair_cost_table(s, 5);
    ConstraintThresholds th;
    th.d_min = 1000;
    const SolverOutcome o = solve_exact_p0(s, costs, {1, 1}, {}, th, 3);
    CHECK_FALSE(o.feasible);
    CHECK(is_infinite_cost(o.objective));
    const SolverOutcome o1 = solve_exact_p1(s, costs, {0.9, 0.9}, {}, th, 3);
    CHECK_FALSE(o1.feasible);
}

TEST_CASE("size limits") {
    Rng rng(73);
    ref::MicroSpec m;
    m.n_clients = 13;
    const Scenario s = ref::micro_scenario(rng, m);
    const auto costs = pair_cost_table(s, 5);
    CHECK_THROWS_AS(solve_exact_p0(s, costs, std::vector<int>(13, 1), {}, {}, 3), SizeError);
    OracleLimits tight;
    tight.max_space = 10;
    const Scenario small = ref::tiny_scenario({{5, 5}, {5, 5}, {5, 5}}, {{0, 1}, {0, 1}, {0, 1}}, {3, 3}, {1, 1, 1});
    CHECK_THROWS_AS(solve_exact_p0(small, pair_cost_table(small, 5), {1, 1, 1}, {}, {}, 3, tight), SizeError);
}

TEST_CASE("single client pre-decision optimum") {
    const Scenario s = ref::tiny_scenario({{5, 5}}, {{0}}, {1}, {0.8});
    const auto costs = pair_cost_table(s, 5);
    ConstraintThresholds th;
    th.d_min = 5;
    th.delta_d = 1;
    th.epsilon_risk = 0.5;
    th.delta_risk = 0.5;
    const CostWeights w{0.5, 0.5, 1.0};
    const SolverOutcome o = solve_exact_p1(s, costs, {0.8}, w, th, 3);
    REQUIRE(o.feasible);
    CHECK(o.objective == doctest::Approx(ref::round_objective(s, {0}, {1}, w, 5, 3) - 0.8).epsilon(1e-12));
}

TEST_CASE("raising the continuity weight never lowers the optimum's continuity") {
    Rng rng(79);
    int checked = 0;
    for (int t = 0; t < 40; ++t) {
        ref::MicroSpec m;
        m.n_clients = 4;
        m.n_edges = 2;
        m.n_labels = 3;
        m.balanced_labels = true;
        m.p_min = 0.3;
        const Scenario s = ref::micro_scenario(rng, m);
        const auto costs = pair_cost_table(s, 5);
        std::vector<double> p;
        for (const auto& c : s.clients) p.push_back(c.online_prob);
        ConstraintThresholds th;
        th.kld_max = 4;
        th.delta_risk = 0.7;
        th.d_min = 50;
        th.delta_d = 10;
        double prev = -1.0;
        bool all = true;
        for (double lc : {0.0, 0.05, 0.1, 0.5, 1.0, 5.0}) {
            const SolverOutcome o = solve_exact_p1(s, costs, p, {0.5, 0.5, lc}, th, 3);
            if (!o.feasible) {
                all = false;
                break;
            }
            const double c = ref::geo_mean(o.assoc.edge_vector(), p);
            CHECK(c >= prev - 1e-12);
            prev = c;
            // the returned objective is the reference objective of the returned vector
            CHECK(o.objective == doctest::Approx(ref::round_objective(s, o.assoc.edge_vector(), {1, 1, 1, 1},
                                                                     {0.5, 0.5, lc}, 5, 3) - lc * c)
                                     .epsilon(1e-12));
        }
        checked += all;
    }
    CHECK(checked >= 10);
}
