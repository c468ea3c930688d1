#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "shfl/association.hpp"
#include "shfl/cost.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

enum class ObjectiveMode {
    PlanA,    // lambda_t T + lambda_e E - lambda_c C, everyone assumed online
    Cost,     // lambda_t T + lambda_e E
    MeanKld,  // mean KLD over checked edges
};

/// Everything an associator or the local search needs to score a selection.
/// One structure serves the pre-decision stage, the per-round repair and the
/// benchmark policies; they differ in the allowed edges, the probabilities,
/// the objective and the constraint family.
struct AssociationProblem {
    const Scenario* scenario = nullptr;
    const Matrix<PairCost>* costs = nullptr;
    CostWeights weights;
    ConstraintThresholds thresholds;
    int edge_rounds = 1;
    std::vector<double> probs;  // per client; enters continuity and Chance constraints
    ObjectiveMode objective = ObjectiveMode::PlanA;
    ConstraintMode constraints = ConstraintMode::Chance;
    std::vector<std::vector<EdgeId>> allowed;  // per client, ascending
    std::vector<EdgeId> fixed;                 // per client: pinned edge or kNoEdge
    std::vector<bool> checked_edges;
    long node_budget = 1000000;

    /// Pre-decision problem: every client, reachable admissible edges.
    static AssociationProblem plan_a(const Scenario& scenario, const Matrix<PairCost>& costs,
                                     const CostWeights& weights, const ConstraintThresholds& thresholds,
                                     int edge_rounds, std::vector<double> probs);

    /// Per-round problem: only online clients (xi = 1) are allowed; probs = 1.
    static AssociationProblem per_round(const Scenario& scenario, const Matrix<PairCost>& costs,
                                        const CostWeights& weights, const ConstraintThresholds& thresholds,
                                        int edge_rounds, const std::vector<int>& xi, ObjectiveMode objective,
                                        ConstraintMode constraints);

    std::size_t n_clients() const { return scenario->n_clients(); }
    std::size_t n_edges() const { return scenario->n_edges(); }
    /// Clients that may be selected (non-empty allowed set, not fixed).
    std::vector<ClientId> free_pool() const;
};

/// Scores a complete placement. Selected clients left at kNoEdge count as
/// unplaced (infeasible). Fixed clients are always included.
SolverOutcome outcome_from_assignment(const AssociationProblem& problem, const std::vector<EdgeId>& edge_of,
                                      const std::vector<ClientId>& selected);

/// Greedy minimum-variation association followed by depth-first
/// backtracking (most recent choice first) when the constraints fail.
SolverOutcome goc_min_c2e(const AssociationProblem& problem, const std::vector<ClientId>& selected);

using Associator = std::function<SolverOutcome(const AssociationProblem&, const std::vector<ClientId>&)>;

struct DecisionEntry {
    std::string stage;  // e.g. "plan_a" or "round 3 edge 1"
    std::string op;     // add | remove | exchange
    std::vector<ClientId> removed;
    std::vector<ClientId> added;
    double delta = 0.0;  // candidate objective minus incumbent objective
    bool feasible = false;
    bool accepted = false;
};

struct DecisionLog {
    std::string stage;
    std::vector<DecisionEntry> entries;

    void write_jsonl(std::ostream& out) const;
};

struct LocalSearchOptions {
    int max_sweeps = 50;
    DecisionLog* log = nullptr;
};

/// Add / Remove / Exchange sweeps over `pool`. A candidate replaces the
/// incumbent when it ranks strictly better by (feasible, violation,
/// objective); from a feasible incumbent this is "feasible and strictly lower
/// objective".
SolverOutcome local_search(const AssociationProblem& problem, const std::vector<ClientId>& pool,
                           const std::vector<ClientId>& initial, const LocalSearchOptions& options,
                           const Associator& associator = goc_min_c2e);

/// Randomized greedy: clients join in random order until the data
/// condition can hold on every checked edge and the association is
/// feasible. Throws InfeasibleError once `attempts` orders failed.
std::vector<ClientId> initial_selection(const AssociationProblem& problem, const std::vector<ClientId>& pool,
                                        std::uint64_t seed, int attempts);

struct PlanAOptions {
    int local_steps = 5;
    int edge_rounds = 3;
    std::vector<double> probs;  // empty: use each client's online_prob
    int max_sweeps = 50;
    long node_budget = 1000000;
    int init_attempts = 20;
    DecisionLog* log = nullptr;
};

/// Long-term client determination. When no feasible start exists the search
/// still runs from the first randomized start and returns the least-violating
/// association it finds, marked infeasible.
SolverOutcome li_long_client_d(const AssociationProblem& problem, const std::vector<ClientId>& pool,
                               std::uint64_t seed, int max_sweeps, int init_attempts, DecisionLog* log = nullptr,
                               const Associator& associator = goc_min_c2e);

SolverOutcome li_long_client_d(const Scenario& scenario, const CostWeights& weights,
                               const ConstraintThresholds& thresholds, std::uint64_t seed,
                               const PlanAOptions& options = {});

/// Lexicographic rank used by the local search.
bool ranks_better(const SolverOutcome& a, const SolverOutcome& b);

}  // namespace shfl
