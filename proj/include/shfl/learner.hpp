#pragma once

#include <cstdint>
#include <vector>

#include "shfl/rng.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

using ModelVector = std::vector<double>;

/// Row-major feature matrix with integer labels.
struct Dataset {
    int dim = 0;
    std::vector<double> x;
    std::vector<int> y;

    std::size_t size() const noexcept { return y.size(); }
    const double* row(std::size_t k) const { return x.data() + k * static_cast<std::size_t>(dim); }
};

struct LearnerSpec {
    double learning_rate = 0.1;
    int local_steps = 5;
    double batch_fraction = 0.1;
};

/// `k` distinct indices from [0, n), uniformly without replacement
/// (partial Fisher-Yates), in draw order.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t k, Rng& rng);

/// Pluggable learner: the engine only needs initialization, a mini-batch
/// gradient, and evaluation.
class Learner {
public:
    virtual ~Learner() = default;
    virtual std::size_t dimension() const = 0;
    virtual ModelVector init(Rng& rng) const = 0;
    /// Mean loss over the listed samples.
    virtual double loss(const ModelVector& w, const Dataset& data, const std::vector<std::size_t>& idx) const = 0;
    /// Gradient of `loss` with respect to w.
    virtual ModelVector gradient(const ModelVector& w, const Dataset& data,
                                 const std::vector<std::size_t>& idx) const = 0;
    /// Fraction of correctly classified samples.
    virtual double evaluate(const ModelVector& w, const Dataset& data) const = 0;

    /// local_steps SGD updates on batches of ceil(batch_fraction * n) samples.
    /// Throws DomainError for an empty shard.
    ModelVector local_sgd(const ModelVector& w, const Dataset& shard, const LearnerSpec& spec, Rng& rng) const;
};

/// Multinomial logistic regression with cross-entropy loss. Parameters are
/// the classes x dim weight matrix followed by the class biases.
class SoftmaxLearner final : public Learner {
public:
    SoftmaxLearner(int dim, int classes) : dim_(dim), classes_(classes) {}

    std::size_t dimension() const override { return static_cast<std::size_t>(classes_) * (dim_ + 1); }
    ModelVector init(Rng& rng) const override;
    double loss(const ModelVector& w, const Dataset& data, const std::vector<std::size_t>& idx) const override;
    ModelVector gradient(const ModelVector& w, const Dataset& data, const std::vector<std::size_t>& idx) const override;
    double evaluate(const ModelVector& w, const Dataset& data) const override;

private:
    void logits(const ModelVector& w, const double* x, std::vector<double>& out) const;

    int dim_;
    int classes_;
};

/// sum_k (weights[k] / sum weights) * models[k], accumulated from zero in the
/// given order. Entries with zero weight are skipped. Throws DomainError when
/// the total weight is not positive or dimensions differ.
ModelVector weighted_average(const std::vector<const ModelVector*>& models, const std::vector<double>& weights);

/// Edge aggregation: client models weighted by data size.
inline ModelVector edge_aggregate(const std::vector<const ModelVector*>& models, const std::vector<double>& data_sizes) {
    return weighted_average(models, data_sizes);
}

/// Global aggregation: edge models weighted by participating data D_j.
inline ModelVector global_aggregate(const std::vector<const ModelVector*>& models, const std::vector<double>& edge_data) {
    return weighted_average(models, edge_data);
}

struct SyntheticTask {
    std::vector<Dataset> shards;  // per client, realizing label_counts exactly
    Dataset test;                 // test_per_label samples of every label
    std::vector<std::vector<double>> means;
};

/// Gaussian-mixture classification task: label h has mean
/// class_separation * (random unit vector) and unit-variance noise.
SyntheticTask synthetic_task(const ScenarioConfig& config, const Scenario& scenario, std::uint64_t seed);

}  // namespace shfl
