#include <cmath>
#include <set>

#include "doctest.h"
#include "shfl/learner.hpp"
#include "support.hpp"

using namespace shfl;

namespace {

Dataset toy(Rng& rng, int dim, int classes, int n) {
    Dataset d;
    d.dim = dim;
    for (int k = 0; k < n; ++k) {
        for (int t = 0; t < dim; ++t) d.x.push_back(normal01(rng));
        d.y.push_back(static_cast<int>(uniform_int(rng, 0, classes - 1)));
    }
    return d;
}

}  // namespace

TEST_CASE("batch sampling") {
    Rng rng(1);
    const auto idx = sample_batch(20, 7, rng);
    CHECK(idx.size() == 7);
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 7);
    for (auto i : idx) CHECK(i < 20);
    CHECK_THROWS_AS(sample_batch(3, 4, rng), DomainError);
}

TEST_CASE("zero learning rate leaves the model unchanged") {
    Rng rng(2);
    const SoftmaxLearner L(4, 3);
    const Dataset d = toy(rng, 4, 3, 30);
    const ModelVector w = L.init(rng);
    LearnerSpec spec{0.0, 5, 0.2};
    CHECK(L.local_sgd(w, d, spec, rng) == w);
    CHECK_THROWS_AS(L.local_sgd(w, Dataset{4, {}, {}}, spec, rng), DomainError);
}

TEST_CASE("one SGD step equals minus eta times the gradient") {
    Rng rng(3);
    const SoftmaxLearner L(3, 2);
    const Dataset d = toy(rng, 3, 2, 10);
    const ModelVector w = L.init(rng);
    LearnerSpec spec{0.3, 1, 1.0};  // full batch
    Rng a(9);
    const ModelVector w1 = L.local_sgd(w, d, spec, a);
    std::vector<std::size_t> all(10);
    for (std::size_t k = 0; k < 10; ++k) all[k] = k;
    const ModelVector g = L.gradient(w, d, all);
    for (std::size_t k = 0; k < w.size(); ++k) CHECK(w1[k] == doctest::Approx(w[k] - 0.3 * g[k]).epsilon(1e-12));
    Rng b(9);
    CHECK(L.local_sgd(w, d, spec, b) == w1);
}

TEST_CASE("softmax gradient matches central finite differences") {
    Rng rng(4);
    const SoftmaxLearner L(5, 4);
    const Dataset d = toy(rng, 5, 4, 25);
    std::vector<std::size_t> idx(25);
    for (std::size_t k = 0; k < 25; ++k) idx[k] = k;
    for (int t = 0; t < 20; ++t) {
        ModelVector w(L.dimension());
        for (double& v : w) v = normal01(rng);
        const ModelVector g = L.gradient(w, d, idx);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double h = 1e-5;
            ModelVector wp = w, wm = w;
            wp[k] += h;
            wm[k] -= h;
            const double fd = (L.loss(wp, d, idx) - L.loss(wm, d, idx)) / (2 * h);
            CHECK(std::fabs(fd - g[k]) <= 1e-6 * std::max(1.0, std::fabs(g[k])));
        }
    }
}

TEST_CASE("weighted averaging") {
    const ModelVector a = {0.0}, b = {4.0};
    CHECK(edge_aggregate({&a, &b}, {1, 3}) == ModelVector{3.0});
    const ModelVector u = {1.0, -2.0, 3.5}, v = {3.0, 6.0, -0.5};
    const ModelVector mid = edge_aggregate({&u, &v}, {7, 7});
    for (std::size_t k = 0; k < 3; ++k) CHECK(mid[k] == doctest::Approx((u[k] + v[k]) / 2).epsilon(1e-15));
    CHECK(edge_aggregate({&u, &u, &u}, {1, 2, 3}) == u);
    CHECK(global_aggregate({&v}, {123.0}) == v);
    CHECK_THROWS_AS(weighted_average({&u, &v}, {0, 0}), DomainError);
    CHECK_THROWS_AS(weighted_average({&u, &a}, {1, 1}), DomainError);

    // convex hull, coordinate-wise
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        std::vector<ModelVector> ms(4, ModelVector(6));
        std::vector<double> ws(4);
        for (auto& m : ms)
            for (double& x : m) x = normal01(rng);
        for (double& x : ws) x = uniform(rng, 0.1, 10);
        std::vector<const ModelVector*> ptrs;
        for (const auto& m : ms) ptrs.push_back(&m);
        const ModelVector out = global_aggregate(ptrs, ws);
        for (std::size_t k = 0; k < 6; ++k) {
            double lo = INFINITY, hi = -INFINITY;
            for (const auto& m : ms) {
                lo = std::min(lo, m[k]);
                hi = std::max(hi, m[k]);
            }
            CHECK(out[k] >= lo - 1e-12);
            CHECK(out[k] <= hi + 1e-12);
        }
    }
}

TEST_CASE("synthetic task") {
    ScenarioConfig c;
    c.n_clients = 12;
    const Scenario s = generate_scenario(c);
    const SyntheticTask task = synthetic_task(c, s, 5);
    REQUIRE(task.shards.size() == 12);
    for (const auto& cl : s.clients) {
        const Dataset& d = task.shards[cl.id];
        CHECK(static_cast<long>(d.size()) == cl.data_size);
        std::vector<long> counts(10, 0);
        for (int y : d.y) ++counts[y];
        CHECK(counts == cl.label_counts);
    }
    std::vector<int> per(10, 0);
    for (int y : task.test.y) ++per[y];
    for (int n : per) CHECK(n == c.test_per_label);
    CHECK(synthetic_task(c, s, 5).test.x == task.test.x);
}

TEST_CASE("centralized training on a well-separated mixture") {
    ScenarioConfig c;
    c.n_clients = 30;
    c.class_separation = 6.0;
    const Scenario s = generate_scenario(c);
    const SyntheticTask task = synthetic_task(c, s, 11);
    Dataset pooled;
    pooled.dim = c.feature_dim;
    for (const auto& d : task.shards) {
        pooled.x.insert(pooled.x.end(), d.x.begin(), d.x.end());
        pooled.y.insert(pooled.y.end(), d.y.begin(), d.y.end());
    }
    const SoftmaxLearner L(c.feature_dim, c.n_labels);
    Rng rng(12);
    ModelVector w = L.init(rng);
    LearnerSpec spec{0.2, 300, 0.05};
    w = L.local_sgd(w, pooled, spec, rng);
    CHECK(L.evaluate(w, task.test) >= 0.95);
}
