#include "shfl/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shfl/rng.hpp"

namespace shfl {

LabelDistribution::LabelDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DomainError("label distribution needs at least one label");
    double total = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw DomainError("label distribution entries must be non-negative");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw DomainError("label distribution must sum to 1");
}

LabelDistribution LabelDistribution::uniform(int n_labels) {
    if (n_labels < 1) throw DomainError("uniform distribution needs at least one label");
    return LabelDistribution(std::vector<double>(n_labels, 1.0 / n_labels));
}

std::optional<LabelDistribution> LabelDistribution::from_counts(const std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) {
        if (c < 0) throw DomainError("negative label count");
        total += c;
    }
    if (total <= 0.0) return std::nullopt;
    std::vector<double> p(counts.size());
    for (std::size_t h = 0; h < counts.size(); ++h) p[h] = counts[h] / total;
    // re-normalize the rounding residue into the largest entry
    double sum = 0.0;
    for (double x : p) sum += x;
    auto big = std::max_element(p.begin(), p.end());
    *big += 1.0 - sum;
    return LabelDistribution(std::move(p));
}

std::optional<LabelDistribution> edge_distribution(const AssociationMatrix& assoc, const std::vector<int>& xi,
                                                   const std::vector<ClientProfile>& clients, EdgeId j) {
    if (clients.empty()) return std::nullopt;
    std::vector<double> counts(clients.front().label_counts.size(), 0.0);
    for (const auto& c : clients) {
        if (!assoc(c.id, j) || !xi[c.id]) continue;
        for (std::size_t h = 0; h < counts.size(); ++h) counts[h] += static_cast<double>(c.label_counts[h]);
    }
    return LabelDistribution::from_counts(counts);
}

double kld(const LabelDistribution& p, const LabelDistribution& q) {
    if (p.size() != q.size()) throw DomainError("kld: label dimension mismatch");
    double sum = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) {
        if (!(q[h] > 0)) throw DomainError("kld: reference distribution has a zero entry");
        if (p[h] > 0) sum += p[h] * std::log(p[h] / q[h]);
    }
    return std::max(sum, 0.0);
}

double kld(const std::optional<LabelDistribution>& p, const LabelDistribution& q) {
    if (!p) return std::numeric_limits<double>::infinity();
    return kld(*p, q);
}

bool P0Report::all_ok() const {
    if (!structural_ok()) return false;
    for (std::size_t j = 0; j < kld_ok.size(); ++j)
        if (!kld_ok[j] || !data_ok[j]) return false;
    return true;
}

P0Report check_p0_constraints(const AssociationMatrix& assoc, const std::vector<int>& xi, const Scenario& s,
                              const ConstraintThresholds& th) {
    P0Report r;
    const LabelDistribution q(s.reference);
    for (const auto& c : s.clients) {
        const int n = assoc.assignments_of(c.id);
        if (n > 1) r.unique_ok = false;
        if (n > 0 && !xi[c.id]) r.offline_ok = false;
        for (std::size_t j = 0; j < s.n_edges(); ++j)
            if (assoc(c.id, static_cast<EdgeId>(j)) && !c.reaches(static_cast<EdgeId>(j))) r.reach_ok = false;
    }
    for (const auto& e : s.edges) {
        if (assoc.load(e.id) > e.max_clients) r.capacity_ok = false;
        long data = 0;
        for (ClientId i : assoc.members(e.id))
            if (xi[i]) data += s.clients[i].data_size;
        const double k = kld(edge_distribution(assoc, xi, s.clients, e.id), q);
        r.kld.push_back(k);
        r.data.push_back(data);
        r.kld_ok.push_back(k <= th.kld_max);
        r.data_ok.push_back(static_cast<double>(data) >= th.d_min);
    }
    return r;
}

double u_function(double r, double q) { return r > 0 ? r * std::log(r / q) : 0.0; }

double g_bound_from_range(double lo, double hi, double q) {
    // U decreases up to q/e and increases after it
    const double turn = q / std::exp(1.0);
    if (turn >= hi) return u_function(lo, q);
    if (turn <= lo) return u_function(hi, q);
    return std::max(u_function(lo, q), u_function(hi, q));
}

double piecewise_bound_G(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                         const LabelDistribution& q, int h) {
    if (members.empty()) throw DomainError("piecewise_bound_G: no clients assigned");
    double lo = INFINITY, hi = -INFINITY;
    for (ClientId i : members) {
        const auto& c = clients[i];
        const double rho = static_cast<double>(c.label_counts[h]) / static_cast<double>(c.data_size);
        lo = std::min(lo, rho);
        hi = std::max(hi, rho);
    }
    return g_bound_from_range(lo, hi, q[h]);
}

double markov_kld_bound(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                        const std::vector<double>& probs, const LabelDistribution& q,
                        const ConstraintThresholds& th) {
    if (!(th.kld_max > th.delta_k)) throw ConfigError("kld_max", "must exceed delta_k");
    if (members.empty()) return 1.0;
    double all_offline = 1.0;
    for (ClientId i : members) all_offline *= 1.0 - probs[i];
    double g_sum = 0.0;
    for (int h = 0; h < static_cast<int>(q.size()); ++h) g_sum += piecewise_bound_G(members, clients, q, h);
    return all_offline + (1.0 - all_offline) * g_sum / (th.kld_max - th.delta_k);
}

bool markov_data_bound(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                       const std::vector<double>& probs, const ConstraintThresholds& th) {
    double expected = 0.0;
    for (ClientId i : members) expected += probs[i] * static_cast<double>(clients[i].data_size);
    return expected >= (th.d_min + th.delta_d) * (1.0 - th.epsilon_risk);
}

namespace {

// Pattern-level violation test shared by the exact and sampled estimators.
bool pattern_violates(const std::vector<double>& counts, long data, const LabelDistribution& q, ViolationKind kind,
                      const ConstraintThresholds& th) {
    if (kind == ViolationKind::Data) return static_cast<double>(data) < th.d_min + th.delta_d;
    const auto p = LabelDistribution::from_counts(counts);
    return !p || kld(*p, q) > th.kld_max - th.delta_k;
}

}  // namespace

double exact_violation_prob(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                            const std::vector<double>& probs, const LabelDistribution& q, ViolationKind kind,
                            const ConstraintThresholds& th) {
    const std::size_t k = members.size();
    if (k > 20) throw SizeError("exact_violation_prob: more than 20 clients");
    double total = 0.0;
    std::vector<double> counts(q.size());
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        double weight = 1.0;
        long data = 0;
        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t b = 0; b < k; ++b) {
            const auto& c = clients[members[b]];
            if (mask & (1u << b)) {
                weight *= probs[c.id];
                data += c.data_size;
                for (std::size_t h = 0; h < counts.size(); ++h) counts[h] += static_cast<double>(c.label_counts[h]);
            } else {
                weight *= 1.0 - probs[c.id];
            }
        }
        if (weight > 0 && pattern_violates(counts, data, q, kind, th)) total += weight;
    }
    return total;
}

ViolationRates estimate_violation_rate(const AssociationMatrix& assoc, const std::vector<ClientProfile>& clients,
                                       const std::vector<double>& probs, const LabelDistribution& q,
                                       const ConstraintThresholds& th, long trials, std::uint64_t seed) {
    if (trials < 1) throw DomainError("estimate_violation_rate: trials must be >= 1");
    ViolationRates out;
    const std::size_t n_edges = assoc.n_edges();
    if (n_edges == 0) return out;
    std::vector<double> counts(q.size());
    for (std::size_t j = 0; j < n_edges; ++j) {
        const auto members = assoc.members(static_cast<EdgeId>(j));
        Rng rng = make_rng(seed, {kMonteCarloStream, j});
        long kld_viol = 0, data_viol = 0;
        for (long t = 0; t < trials; ++t) {
            std::fill(counts.begin(), counts.end(), 0.0);
            long data = 0;
            for (ClientId i : members) {
                if (uniform01(rng) >= probs[i]) continue;
                data += clients[i].data_size;
                for (std::size_t h = 0; h < counts.size(); ++h)
                    counts[h] += static_cast<double>(clients[i].label_counts[h]);
            }
            kld_viol += pattern_violates(counts, data, q, ViolationKind::Kld, th);
            data_viol += pattern_violates(counts, data, q, ViolationKind::Data, th);
        }
        out.delta_hat += static_cast<double>(kld_viol) / trials;
        out.epsilon_hat += static_cast<double>(data_viol) / trials;
    }
    out.delta_hat /= static_cast<double>(n_edges);
    out.epsilon_hat /= static_cast<double>(n_edges);
    return out;
}

bool ChanceReport::all_ok() const {
    if (!unique_ok || !capacity_ok || !reach_ok) return false;
    for (std::size_t j = 0; j < kld_ok.size(); ++j)
        if (!kld_ok[j] || !data_ok[j]) return false;
    return true;
}

ChanceReport check_chance_constraints(const AssociationMatrix& assoc, const Scenario& s,
                                      const std::vector<double>& probs, const ConstraintThresholds& th) {
    ChanceReport r;
    const LabelDistribution q(s.reference);
    for (const auto& c : s.clients) {
        if (assoc.assignments_of(c.id) > 1) r.unique_ok = false;
        for (std::size_t j = 0; j < s.n_edges(); ++j)
            if (assoc(c.id, static_cast<EdgeId>(j)) && !c.reaches(static_cast<EdgeId>(j))) r.reach_ok = false;
    }
    for (const auto& e : s.edges) {
        const auto members = assoc.members(e.id);
        if (static_cast<int>(members.size()) > e.max_clients) r.capacity_ok = false;
        const double bound = markov_kld_bound(members, s.clients, probs, q, th);
        double expected = 0.0;
        for (ClientId i : members) expected += probs[i] * static_cast<double>(s.clients[i].data_size);
        r.kld_bound.push_back(bound);
        r.expected_data.push_back(expected);
        r.kld_ok.push_back(bound <= th.delta_risk);
        r.data_ok.push_back(markov_data_bound(members, s.clients, probs, th));
    }
    return r;
}

}  // namespace shfl
