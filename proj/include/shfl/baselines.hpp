#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shfl/association.hpp"
#include "shfl/cost.hpp"
#include "shfl/plan_a.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

/// Shared knobs of the per-round benchmark policies.
struct PolicyContext {
    const Scenario* scenario = nullptr;
    const Matrix<PairCost>* costs = nullptr;
    CostWeights weights;
    ConstraintThresholds thresholds;
    int edge_rounds = 3;
    int max_sweeps = 50;
    long node_budget = 1000000;
    int init_attempts = 20;
    std::uint64_t seed = 0;
};

/// Solves the per-round problem with Add/Remove/Exchange and the greedy
/// backtracking association, KLD and data constraints enforced, no
/// continuity term.
SolverOutcome orig_prob_solver(const PolicyContext& ctx, const std::vector<int>& xi);

/// Minimizes the mean per-edge KLD subject to the data constraint.
SolverOutcome kld_minimization(const PolicyContext& ctx, const std::vector<int>& xi);

/// Local search over client sets with a random association of each set.
SolverOutcome client_sel_only(const PolicyContext& ctx, const std::vector<int>& xi);

/// Random client set, optimized association.
SolverOutcome c2e_assoc_only(const PolicyContext& ctx, const std::vector<int>& xi);

/// Local search over client sets, each client on its lowest-upload-latency edge.
SolverOutcome c2e_greedy_assoc(const PolicyContext& ctx, const std::vector<int>& xi);

/// As many clients as the edge capacities allow (maximum b-matching).
SolverOutcome fed_cs(const PolicyContext& ctx, const std::vector<int>& xi);

/// Lowest-latency associator used by c2e_greedy_assoc: clients in id order,
/// each to its non-full allowed edge with the smallest upload time.
SolverOutcome min_latency_association(const AssociationProblem& problem, const std::vector<ClientId>& selected);

/// Associator of kld_minimization: a feasible placement refined by moves and
/// swaps that lower the objective.
SolverOutcome kld_association(const AssociationProblem& problem, const std::vector<ClientId>& selected);

/// Names accepted by run_policy / the CLI, in documentation order.
const std::vector<std::string>& baseline_names();

/// Dispatches by name; throws ConfigError("policy", ...) for unknown names.
SolverOutcome run_baseline(const std::string& name, const PolicyContext& ctx, const std::vector<int>& xi);

}  // namespace shfl
