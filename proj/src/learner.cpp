#include "shfl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shfl {

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) throw DomainError("sample_batch: batch larger than the shard");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t t = 0; t < k; ++t) {
        const auto r = static_cast<std::size_t>(uniform_int(rng, static_cast<long>(t), static_cast<long>(n) - 1));
        std::swap(idx[t], idx[r]);
    }
    idx.resize(k);
    return idx;
}

ModelVector Learner::local_sgd(const ModelVector& w0, const Dataset& shard, const LearnerSpec& spec, Rng& rng) const {
    if (shard.size() == 0) throw DomainError("local_sgd: empty shard");
    const auto batch = static_cast<std::size_t>(std::ceil(spec.batch_fraction * static_cast<double>(shard.size())));
    ModelVector w = w0;
    for (int t = 0; t < spec.local_steps; ++t) {
        const auto idx = sample_batch(shard.size(), std::max<std::size_t>(batch, 1), rng);
        const ModelVector g = gradient(w, shard, idx);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= spec.learning_rate * g[k];
    }
    return w;
}

ModelVector SoftmaxLearner::init(Rng& rng) const {
    ModelVector w(dimension());
    for (double& v : w) v = 0.01 * normal01(rng);
    return w;
}

void SoftmaxLearner::logits(const ModelVector& w, const double* x, std::vector<double>& out) const {
    out.assign(classes_, 0.0);
    const double* bias = w.data() + static_cast<std::size_t>(classes_) * dim_;
    for (int c = 0; c < classes_; ++c) {
        const double* wc = w.data() + static_cast<std::size_t>(c) * dim_;
        double z = bias[c];
        for (int d = 0; d < dim_; ++d) z += wc[d] * x[d];
        out[c] = z;
    }
}

double SoftmaxLearner::loss(const ModelVector& w, const Dataset& data, const std::vector<std::size_t>& idx) const {
    std::vector<double> z;
    double total = 0.0;
    for (std::size_t k : idx) {
        logits(w, data.row(k), z);
        const double m = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double v : z) s += std::exp(v - m);
        total += m + std::log(s) - z[data.y[k]];
    }
    return total / static_cast<double>(idx.size());
}

ModelVector SoftmaxLearner::gradient(const ModelVector& w, const Dataset& data,
                                     const std::vector<std::size_t>& idx) const {
    ModelVector g(dimension(), 0.0);
    std::vector<double> z;
    const double scale = 1.0 / static_cast<double>(idx.size());
    double* gb = g.data() + static_cast<std::size_t>(classes_) * dim_;
    for (std::size_t k : idx) {
        const double* x = data.row(k);
        logits(w, x, z);
        const double m = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double& v : z) {
            v = std::exp(v - m);
            s += v;
        }
        for (int c = 0; c < classes_; ++c) {
            const double r = (z[c] / s - (c == data.y[k] ? 1.0 : 0.0)) * scale;
            double* gc = g.data() + static_cast<std::size_t>(c) * dim_;
            for (int d = 0; d < dim_; ++d) gc[d] += r * x[d];
            gb[c] += r;
        }
    }
    return g;
}

double SoftmaxLearner::evaluate(const ModelVector& w, const Dataset& data) const {
    if (data.size() == 0) return 0.0;
    std::vector<double> z;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        logits(w, data.row(k), z);
        const auto best = std::max_element(z.begin(), z.end()) - z.begin();
        hits += best == data.y[k];
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

ModelVector weighted_average(const std::vector<const ModelVector*>& models, const std::vector<double>& weights) {
    if (models.empty() || models.size() != weights.size()) throw DomainError("weighted_average: bad input sizes");
    double total = 0.0;
    for (double v : weights) {
        if (v < 0) throw DomainError("weighted_average: negative weight");
        total += v;
    }
    if (!(total > 0)) throw DomainError("weighted_average: total weight must be positive");
    const std::size_t dim = models.front()->size();
    ModelVector out(dim, 0.0);
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (weights[k] == 0) continue;
        if (models[k]->size() != dim) throw DomainError("weighted_average: dimension mismatch");
        const double coef = weights[k] / total;
        for (std::size_t d = 0; d < dim; ++d) out[d] += coef * (*models[k])[d];
    }
    return out;
}

SyntheticTask synthetic_task(const ScenarioConfig& config, const Scenario& scenario, std::uint64_t seed) {
    const int dim = config.feature_dim;
    const int Z = scenario.n_labels;
    SyntheticTask task;
    Rng mean_rng = make_rng(seed, {kTaskStream, 0});
    task.means.assign(Z, std::vector<double>(dim));
    for (auto& mu : task.means) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& v : mu) {
                v = normal01(mean_rng);
                norm += v * v;
            }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (double& v : mu) v = config.class_separation * v / norm;
    }
    auto draw = [&](Dataset& ds, int label, Rng& rng) {
        for (int d = 0; d < dim; ++d) ds.x.push_back(task.means[label][d] + normal01(rng));
        ds.y.push_back(label);
    };
    for (const auto& c : scenario.clients) {
        Dataset shard;
        shard.dim = dim;
        Rng rng = make_rng(seed, {kTaskStream, 1, static_cast<std::uint64_t>(c.id)});
        for (int h = 0; h < Z; ++h)
            for (long k = 0; k < c.label_counts[h]; ++k) draw(shard, h, rng);
        task.shards.push_back(std::move(shard));
    }
    task.test.dim = dim;
    Rng test_rng = make_rng(seed, {kTaskStream, 2});
    for (int h = 0; h < Z; ++h)
        for (int k = 0; k < config.test_per_label; ++k) draw(task.test, h, test_rng);
    return task;
}

}  // namespace shfl
