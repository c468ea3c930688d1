#pragma once

#include <vector>

#include "shfl/association.hpp"
#include "shfl/cost.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

struct OracleLimits {
    std::size_t max_clients = 12;  // candidate clients
    double max_space = 1e7;        // product of (options + 1) per client
};

/// Exhaustive search over every assignment vector (each candidate client
/// unselected or on one admissible reachable edge), in lexicographic order
/// with client 0 most significant; the first optimum wins. An infeasible
/// result (feasible = false, objective = kInfiniteCost) is a proof that no
/// vector satisfies the constraints. Throws SizeError beyond `limits`.

/// Per-round problem: online clients, KLD and data constraints on every edge,
/// objective lambda_t T + lambda_e E.
SolverOutcome solve_exact_p0(const Scenario& scenario, const Matrix<PairCost>& costs, const std::vector<int>& xi,
                             const CostWeights& weights, const ConstraintThresholds& thresholds, int edge_rounds,
                             const OracleLimits& limits = {});

/// Pre-decision problem: all clients assumed online, Markov KLD bound and
/// expected-data constraints, continuity term included.
SolverOutcome solve_exact_p1(const Scenario& scenario, const Matrix<PairCost>& costs, const std::vector<double>& probs,
                             const CostWeights& weights, const ConstraintThresholds& thresholds, int edge_rounds,
                             const OracleLimits& limits = {});

}  // namespace shfl
