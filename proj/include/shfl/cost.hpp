#pragma once

#include <array>
#include <limits>
#include <vector>

#include "shfl/association.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

/// Marks an unusable (client, edge) pair, e.g. a zero channel gain. Solvers
/// reject pairs carrying it; arithmetic never touches it.
inline constexpr double kInfiniteCost = std::numeric_limits<double>::max();

inline bool is_infinite_cost(double x) { return x >= kInfiniteCost; }

struct ComputeCost {
    double time = 0.0;    // s, one SGD update
    double energy = 0.0;  // J
};

struct UplinkCost {
    double rate = 0.0;  // bit/s
    double time = 0.0;  // s
    double energy = 0.0;
};

struct PairCost {
    double delay = 0.0;
    double energy = 0.0;

    bool admissible() const { return !is_infinite_cost(delay) && !is_infinite_cost(energy); }
};

struct RoundCost {
    double delay = 0.0;
    double energy = 0.0;
};

ComputeCost local_compute_cost(const ClientProfile& client);
UplinkCost uplink_cost(const ClientProfile& client, const EdgeProfile& edge, const ChannelState& channel);

/// Per-global-round cost of one client training local_steps SGD updates and
/// uploading once. Throws DomainError when local_steps < 1.
PairCost pair_cost(const ClientProfile& client, const EdgeProfile& edge, const ChannelState& channel,
                   int local_steps);

/// clients x edges table; unreachable pairs hold the sentinel.
Matrix<PairCost> pair_cost_table(const Scenario& scenario, int local_steps);

/// Round delay (max over edges) and energy (sum over edges). `xi` holds 0/1
/// per client. A participating pair with the sentinel yields sentinel totals.
RoundCost round_cost(const AssociationMatrix& assoc, const std::vector<int>& xi, const Matrix<PairCost>& costs,
                     const std::vector<EdgeProfile>& edges, int edge_rounds);

/// Geometric mean of `probs` over selected clients; 0 for an empty selection.
double continuity(const AssociationMatrix& assoc, const std::vector<double>& probs);
/// Same, using each client's online_prob.
double continuity(const AssociationMatrix& assoc, const std::vector<ClientProfile>& clients);

double weighted_cost(const CostWeights& w, const RoundCost& c);

/// Pre-decision objective: everyone assumed online, minus the continuity reward.
double objective_plan_a(const AssociationMatrix& assoc, const Matrix<PairCost>& costs, const std::vector<double>& probs,
                        const std::vector<EdgeProfile>& edges, const CostWeights& weights, int edge_rounds);
double objective_plan_a(const AssociationMatrix& assoc, const Scenario& scenario, const CostWeights& weights,
                        int local_steps, int edge_rounds);

/// Per-round objective with realized participation (no continuity term).
double objective_round(const AssociationMatrix& assoc, const std::vector<int>& xi, const Matrix<PairCost>& costs,
                       const std::vector<EdgeProfile>& edges, const CostWeights& weights, int edge_rounds);

using FeatureVector = std::array<double, 3>;

/// [d_i, T_ij, E_ij], the similarity features of the repair stage.
FeatureVector feature_vector(const ClientProfile& client, const EdgeProfile& edge, const ChannelState& channel,
                             int local_steps);

}  // namespace shfl
