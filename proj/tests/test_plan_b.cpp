#include <set>

#include "doctest.h"
#include "json.hpp"
#include "shfl/divergence.hpp"
#include "shfl/plan_b.hpp"
#include "support.hpp"

using namespace shfl;

namespace {

SimilarityMatrix from_vectors(const std::vector<FeatureVector>& v) {
    std::vector<ClientId> ids;
    for (std::size_t k = 0; k < v.size(); ++k) ids.push_back(static_cast<ClientId>(k));
    return similarity_matrix(ids, v);
}

// Reference: core points are those with >= p_min neighbours (self included);
// clusters are connected components of the core graph.
struct RefClusters {
    std::vector<bool> core;
    std::vector<int> component;  // -1 for non-core
    std::vector<bool> noise;
};

RefClusters brute_dbscan(const SimilarityMatrix& s, double psi_min, int p_min) {
    const int n = static_cast<int>(s.clients.size());
    RefClusters r;
    r.core.assign(n, false);
    r.component.assign(n, -1);
    r.noise.assign(n, false);
    auto near = [&](int a, int b) { return a == b || s.psi(a, b) >= psi_min; };
    for (int a = 0; a < n; ++a) {
        int c = 0;
        for (int b = 0; b < n; ++b) c += near(a, b);
        r.core[a] = c >= p_min;
    }
    int comp = 0;
    for (int a = 0; a < n; ++a) {
        if (!r.core[a] || r.component[a] >= 0) continue;
        std::vector<int> stack = {a};
        r.component[a] = comp;
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            for (int b = 0; b < n; ++b)
                if (r.core[b] && r.component[b] < 0 && near(x, b)) {
                    r.component[b] = comp;
                    stack.push_back(b);
                }
        }
        ++comp;
    }
    for (int a = 0; a < n; ++a) {
        if (r.core[a]) continue;
        bool reached = false;
        for (int b = 0; b < n; ++b) reached |= r.core[b] && near(a, b);
        r.noise[a] = !reached;
    }
    return r;
}

}  // namespace

TEST_CASE("cosine similarity") {
    CHECK(cosine_similarity({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1, 0, 0}, {0, 1, 0}) == 0.0);
    CHECK(cosine_similarity({1, 2, 3}, {2.5, 5, 7.5}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(cosine_similarity({0, 0, 0}, {1, 0, 0}), DomainError);
    const auto m = from_vectors({{1, 2, 3}, {3, 1, 2}, {0, 1, 5}});
    for (int a = 0; a < 3; ++a) {
        CHECK(m.psi(a, a) == 1.0);
        for (int b = 0; b < 3; ++b) CHECK(m.psi(a, b) == m.psi(b, a));
    }
}

TEST_CASE("DBSCAN examples") {
    SUBCASE("identical vectors form one cluster") {
        const auto cs = dbscan_clusters(from_vectors({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), 0.99, 2);
        REQUIRE(cs.clusters.size() == 1);
        CHECK(cs.clusters[0].size() == 3);
        CHECK(cs.noise.empty());
    }
    SUBCASE("orthogonal vectors are noise") {
        const auto cs = dbscan_clusters(from_vectors({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), 0.99, 2);
        CHECK(cs.clusters.empty());
        CHECK(cs.noise.size() == 3);
    }
    SUBCASE("two separated groups") {
        const auto cs = dbscan_clusters(
            from_vectors({{1, 0, 0}, {1, 0.01, 0}, {0.99, 0, 0.01}, {0, 1, 0}, {0, 1, 0.01}}), 0.99, 2);
        REQUIRE(cs.clusters.size() == 2);
        CHECK(cs.clusters[0] == std::vector<ClientId>{0, 1, 2});
        CHECK(cs.clusters[1] == std::vector<ClientId>{3, 4});
    }
    SUBCASE("agrees with a brute-force reference") {
        Rng rng(53);
        for (int t = 0; t < 300; ++t) {
            const int n = static_cast<int>(uniform_int(rng, 1, 10));
            std::vector<FeatureVector> v;
            for (int k = 0; k < n; ++k) v.push_back({uniform(rng, 0.1, 1), uniform(rng, 0.1, 1), uniform(rng, 0.1, 1)});
            const auto sim = from_vectors(v);
            const double psi = uniform(rng, 0.8, 0.99);
            const int pm = static_cast<int>(uniform_int(rng, 1, 4));
            const auto cs = dbscan_clusters(sim, psi, pm);
            const auto r = brute_dbscan(sim, psi, pm);
            for (int a = 0; a < n; ++a) {
                CHECK((cs.cluster_at(a) < 0) == r.noise[a]);
                for (int b = 0; b < n; ++b)
                    if (r.core[a] && r.core[b]) CHECK((cs.cluster_at(a) == cs.cluster_at(b)) == (r.component[a] == r.component[b]));
                if (!r.core[a] && !r.noise[a]) {
                    // border point joins the cluster of one of its core neighbours
                    bool ok = false;
                    for (int b = 0; b < n; ++b)
                        ok |= r.core[b] && sim.psi(a, b) >= psi && cs.cluster_at(b) == cs.cluster_at(a);
                    CHECK(ok);
                }
            }
        }
    }
}

namespace {

struct Fixture {
    // edge 0 needs two clients' worth of data; clients 1 and 2 are twins
    Scenario s = ref::tiny_scenario({{40, 60}, {60, 40}, {60, 40}, {10, 10}}, {{0}, {0}, {0}, {0}}, {4},
                                    {0.9, 0.8, 0.8, 0.9});
    Matrix<PairCost> costs = pair_cost_table(s, 5);
    ConstraintThresholds th;
    AssociationMatrix plan_a{4, 1, AssocRole::PlanA};
    CcuOptions opt;
    Fixture() {
        th.kld_max = 0.1;
        th.d_min = 200;
        plan_a.set(0, 0);
        plan_a.set(1, 0);
        opt.round = 4;
        opt.seed = 9;
    }
};

}  // namespace

TEST_CASE("repair with everyone online keeps the long-term association") {
    Fixture f;
    const auto r = ccu(f.plan_a, {1, 1, 1, 1}, f.s, f.costs, {}, f.th, f.opt);
    CHECK(r.outcome.assoc.same_assignment(f.plan_a));
    CHECK(r.outcome.assoc.role() == AssocRole::PlanB);
    CHECK(r.report.substitutions.empty());
    CHECK_FALSE(r.report.fallback);
    CHECK(r.outcome.feasible);
    CHECK(r.outcome.objective ==
          doctest::Approx(ref::round_objective(f.s, f.plan_a.edge_vector(), {1, 1, 1, 1}, {}, 5, 3)).epsilon(1e-12));
}

TEST_CASE("a dropout is replaced by its online twin") {
    Fixture f;
    const auto r = ccu(f.plan_a, {1, 0, 1, 1}, f.s, f.costs, {}, f.th, f.opt);
    REQUIRE(r.report.substitutions.size() == 1);
    CHECK(r.report.substitutions[0].dropout == 1);
    CHECK(r.report.substitutions[0].substitute == 2);
    CHECK(r.report.substitutions[0].psi == doctest::Approx(1.0));
    CHECK(r.outcome.feasible);
    CHECK(r.outcome.assoc.selected_clients() == std::vector<ClientId>{0, 2});
    const auto v = ref::check(r.outcome.assoc, f.s, {1, 0, 1, 1}, {}, f.th, ref::Mode::Deterministic,
                              {true}, 5);
    CHECK_MESSAGE(v.ok, v.why);
    const auto j = nlohmann::json::parse(r.report.to_json());
    CHECK(j["round"] == 4);
    CHECK(j["dropouts"] == std::vector<int>{1});
    CHECK(j["substitutions"][0]["substitute"] == 2);
    CHECK(j["feasible"] == true);
}

TEST_CASE("no online candidates leaves an infeasible best effort") {
    Fixture f;
    const std::vector<int> xi = {1, 0, 0, 0};
    const auto r = ccu(f.plan_a, xi, f.s, f.costs, {}, f.th, f.opt);
    CHECK_FALSE(r.outcome.feasible);
    CHECK(r.outcome.violation > 0);
    CHECK(r.report.fallback);
    CHECK(r.outcome.assoc.selected_clients() == std::vector<ClientId>{0});
    CHECK_FALSE(nlohmann::json::parse(r.report.to_json())["feasible"].get<bool>());
}

TEST_CASE("online long-term clients are always kept") {
    Rng rng(59);
    for (int t = 0; t < 40; ++t) {
        ref::MicroSpec m;
        m.n_clients = 14;
        m.n_edges = 2;
        const Scenario s = ref::micro_scenario(rng, m);
        const auto costs = pair_cost_table(s, 5);
        AssociationMatrix a(14, 2, AssocRole::PlanA);
        std::vector<int> load(2, 0);
        for (const auto& c : s.clients) {
            const EdgeId j = c.reachable_edges[0];
            if (uniform01(rng) < 0.5 && load[j] < s.edges[j].max_clients) {
                a.set(c.id, j);
                ++load[j];
            }
        }
        const auto xi = ref::sample_xi(rng, s);
        ConstraintThresholds th;
        th.d_min = 300;
        th.kld_max = 0.8;
        CcuOptions opt;
        opt.seed = static_cast<std::uint64_t>(t);
        opt.node_budget = 500;
        const auto r = ccu(a, xi, s, costs, {}, th, opt);
        for (const auto& c : s.clients)
            if (a.selected(c.id) && xi[c.id]) CHECK(r.outcome.assoc.edge_of(c.id) == a.edge_of(c.id));
        const auto v = ref::check(r.outcome.assoc, s, xi, {}, th, ref::Mode::DataOnly, {false, false}, 5);
        CHECK_MESSAGE(v.ok, v.why);  // structure only
        if (r.outcome.feasible) {
            const auto full = ref::check(r.outcome.assoc, s, xi, {}, th, ref::Mode::Deterministic, {true, true}, 5);
            CHECK_MESSAGE(full.ok, full.why);
        }
    }
}
