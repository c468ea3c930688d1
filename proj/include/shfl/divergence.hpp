#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shfl/association.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

/// Probability vector over labels. Construction validates non-negativity and
/// unit mass (1e-12).
class LabelDistribution {
public:
    explicit LabelDistribution(std::vector<double> probs);
    static LabelDistribution uniform(int n_labels);
    /// Normalizes a non-negative count vector; nullopt when the total is zero.
    static std::optional<LabelDistribution> from_counts(const std::vector<double>& counts);

    const std::vector<double>& probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t h) const { return probs_[h]; }

private:
    std::vector<double> probs_;
};

/// Label distribution of the participating clients on edge j; nullopt
/// (the EMPTY marker) when no data participates.
std::optional<LabelDistribution> edge_distribution(const AssociationMatrix& assoc, const std::vector<int>& xi,
                                                   const std::vector<ClientProfile>& clients, EdgeId j);

/// Natural-log KL divergence. Throws DomainError if q has a zero entry or
/// the sizes differ.
double kld(const LabelDistribution& p, const LabelDistribution& q);
/// EMPTY maps to +infinity.
double kld(const std::optional<LabelDistribution>& p, const LabelDistribution& q);

struct P0Report {
    std::vector<double> kld;        // per edge, +inf when empty
    std::vector<long> data;         // D_j per edge
    std::vector<bool> kld_ok;       // KLD <= kld_max
    std::vector<bool> data_ok;      // D_j >= d_min
    bool unique_ok = true;          // each client on at most one edge
    bool capacity_ok = true;        // load <= M_j
    bool reach_ok = true;           // assignments only to reachable edges
    bool offline_ok = true;         // no offline client assigned

    bool structural_ok() const { return unique_ok && capacity_ok && reach_ok && offline_ok; }
    bool all_ok() const;
};

P0Report check_p0_constraints(const AssociationMatrix& assoc, const std::vector<int>& xi, const Scenario& scenario,
                              const ConstraintThresholds& thresholds);

/// U(r) = r ln(r / q), with U(0) = 0.
double u_function(double r, double q);

/// max of U over [lo, hi] for reference mass q (U is convex, so an endpoint).
double g_bound_from_range(double lo, double hi, double q);

/// Upper bound of U over the label-h ratio range spanned by `members`.
/// Throws DomainError for an empty member list.
double piecewise_bound_G(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                         const LabelDistribution& q, int h);

/// Markov surrogate of Pr(KLD_j > kld_max - delta_k). `probs` is indexed by
/// client id. An empty member list gives 1 (the edge is always empty).
double markov_kld_bound(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                        const std::vector<double>& probs, const LabelDistribution& q,
                        const ConstraintThresholds& thresholds);

/// Expected-data condition: sum p_i d_i >= (d_min + delta_d)(1 - epsilon).
bool markov_data_bound(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                       const std::vector<double>& probs, const ConstraintThresholds& thresholds);

enum class ViolationKind { Kld, Data };

/// Exact violation probability over all 2^k participation patterns.
/// Throws SizeError for more than 20 members.
double exact_violation_prob(std::span<const ClientId> members, const std::vector<ClientProfile>& clients,
                            const std::vector<double>& probs, const LabelDistribution& q, ViolationKind kind,
                            const ConstraintThresholds& thresholds);

struct ViolationRates {
    double delta_hat = 0.0;
    double epsilon_hat = 0.0;
};

/// Monte-Carlo violation rates of an association under Bernoulli(probs)
/// participation, averaged over edges.
ViolationRates estimate_violation_rate(const AssociationMatrix& assoc, const std::vector<ClientProfile>& clients,
                                       const std::vector<double>& probs, const LabelDistribution& q,
                                       const ConstraintThresholds& thresholds, long trials, std::uint64_t seed);

struct ChanceReport {
    std::vector<double> kld_bound;  // per edge
    std::vector<double> expected_data;
    std::vector<bool> kld_ok;
    std::vector<bool> data_ok;
    bool unique_ok = true;
    bool capacity_ok = true;
    bool reach_ok = true;

    bool all_ok() const;
};

/// Re-validates the pre-decision constraints on every edge.
ChanceReport check_chance_constraints(const AssociationMatrix& assoc, const Scenario& scenario,
                                      const std::vector<double>& probs, const ConstraintThresholds& thresholds);

}  // namespace shfl
