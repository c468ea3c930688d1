#include "doctest.h"
#include "shfl/cost.hpp"
#include "shfl/engine.hpp"
#include "support.hpp"

using namespace shfl;

namespace {

ScenarioConfig small_config() {
    ScenarioConfig c;
    c.n_clients = 24;
    c.n_edges = 2;
    c.global_rounds = 5;
    c.backtrack_budget = 2000;
    c.seed = 5;
    return c;
}

}  // namespace

TEST_CASE("zero rounds return the initial model") {
    ScenarioConfig c = small_config();
    c.global_rounds = 0;
    const auto r = run_experiment(c, "stagewise");
    CHECK(r.rounds.empty());
    CHECK(r.final_model == r.initial_model);
    CHECK_FALSE(r.initial_model.empty());
}

TEST_CASE("unknown policy") {
    CHECK_THROWS_AS(run_experiment(small_config(), "bogus"), ConfigError);
}

TEST_CASE("always-online clients need no repair") {
    ScenarioConfig c = small_config();
    c.online_prob_min = c.online_prob_max = 1.0;
    const auto r = run_experiment(c, "stagewise");
    REQUIRE(r.plan_a.size() == 1);
    REQUIRE(r.rounds.size() == 5);
    for (std::size_t g = 0; g < r.rounds.size(); ++g) {
        CHECK(r.rounds[g].substitutions == 0);
        CHECK(r.rounds[g].dropouts == 0);
        CHECK(r.associations[g].same_assignment(r.plan_a[0].assoc));
    }
}

TEST_CASE("metrics agree with an independent cost recomputation") {
    for (const std::string policy : {"stagewise", "orig_prob_solver", "fed_cs", "client_sel_only"}) {
        const ScenarioConfig c = small_config();
        const auto r = run_experiment(c, policy);
        const Scenario s = generate_scenario(c);
        REQUIRE(r.rounds.size() == 5);
        for (std::size_t g = 0; g < r.rounds.size(); ++g) {
            const auto& m = r.rounds[g];
            CHECK(m.round == static_cast<int>(g) + 1);
            CHECK(m.policy == policy);
            const double f = ref::round_objective(s, r.associations[g].edge_vector(), r.participation[g], c.weights,
                                                  c.local_steps, c.edge_rounds);
            CHECK(m.objective == doctest::Approx(f).epsilon(1e-12));
            CHECK(m.decision_time_s >= 0.0);
            CHECK(m.accuracy >= 0.0);
            CHECK(m.accuracy <= 1.0);
            int online = 0;
            for (ClientId i : r.associations[g].selected_clients()) {
                CHECK(r.participation[g][i] == 1);
                ++online;
            }
            CHECK(m.selected == online);
        }
    }
}

TEST_CASE("runs are reproducible") {
    const ScenarioConfig c = small_config();
    const auto a = run_experiment(c, "stagewise");
    const auto b = run_experiment(c, "stagewise");
    CHECK(a.final_model == b.final_model);
    for (std::size_t g = 0; g < a.rounds.size(); ++g) {
        CHECK(a.rounds[g].objective == b.rounds[g].objective);
        CHECK(a.rounds[g].accuracy == b.rounds[g].accuracy);
    }
}

TEST_CASE("periodic re-planning") {
    ScenarioConfig c = small_config();
    c.global_rounds = 7;
    c.replan_period = 3;
    const auto r = run_experiment(c, "stagewise");
    CHECK(r.plan_a.size() == 3);  // before round 1, at rounds 4 and 7
    for (double p : r.estimated_probs) {
        CHECK(p >= 1e-3);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("rounds to target") {
    std::vector<RoundMetrics> m(3);
    m[0].round = 1;
    m[0].accuracy = 0.5;
    m[1].round = 2;
    m[1].accuracy = 0.85;
    m[2].round = 3;
    m[2].accuracy = 0.9;
    CHECK(rounds_to_target(m, 0.8) == 2);
    CHECK(std::isinf(rounds_to_target(m, 0.95)));
}
