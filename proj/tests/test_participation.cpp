#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "shfl/participation.hpp"

using namespace shfl;

namespace {

std::vector<ClientProfile> clients(std::vector<double> probs) {
    std::vector<ClientProfile> out;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        ClientProfile c;
        c.id = static_cast<ClientId>(i);
        c.online_prob = probs[i];
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST_CASE("trace sampling") {
    const auto cl = clients({1.0, 0.5});
    const auto t = sample_trace(cl, 10000, 3);
    const auto always = t.history(0, 0, 10000);
    CHECK(std::accumulate(always.begin(), always.end(), 0) == 10000);
    const auto half = t.history(1, 0, 10000);
    const double mean = std::accumulate(half.begin(), half.end(), 0) / 10000.0;
    CHECK(std::fabs(mean - 0.5) <= 0.02);
    CHECK(sample_trace(cl, 100, 3).xi == sample_trace(cl, 100, 3).xi);
    CHECK_THROWS_AS(sample_trace(cl, 0, 3), DomainError);
    // a row does not depend on how many other clients exist
    const auto wider = sample_trace(clients({1.0, 0.5, 0.7}), 100, 3);
    CHECK(wider.history(1, 0, 100) == sample_trace(cl, 100, 3).history(1, 0, 100));
}

TEST_CASE("estimator weights") {
    for (int K = 1; K <= 200; ++K) {
        const auto w = estimator_weights(K);
        REQUIRE(w.size() == static_cast<std::size_t>(K));
        double s = 0.0;
        for (double x : w) s += x;
        CHECK(s == 1.0);
        for (int k = 1; k < K; ++k) CHECK(w[k] > w[k - 1]);
    }
}

TEST_CASE("rolling-window estimate") {
    CHECK(estimate_online_prob(std::vector<int>(50, 1), 10, 5) == 1.0);
    CHECK(estimate_online_prob({1, 0, 1, 1}, 2, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(estimate_online_prob({1, 0, 1, 1, 0}, 5, 1) == doctest::Approx(0.6).epsilon(1e-15));
    // only the most recent K*tau entries count
    CHECK(estimate_online_prob({0, 0, 0, 1, 0, 1, 1}, 2, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(estimate_online_prob({1, 1, 1}, 2, 2), DomainError);
    CHECK_THROWS_AS(estimate_online_prob({1, 1}, 0, 2), DomainError);
}

TEST_CASE("trace CSV round trip") {
    const auto t = sample_trace(clients({0.3, 0.9, 0.6}), 25, 8);
    const auto path = std::filesystem::temp_directory_path() / "shfl_trace_test.csv";
    write_trace_csv(t, path);
    const auto back = read_trace_csv(path);
    CHECK(back.xi == t.xi);
    std::filesystem::remove(path);
}
