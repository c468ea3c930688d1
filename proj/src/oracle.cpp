#include "shfl/oracle.hpp"

#include <chrono>
#include <functional>

#include "shfl/divergence.hpp"

namespace shfl {

namespace {

struct Candidate {
    ClientId id;
    std::vector<EdgeId> options;  // kNoEdge first, then edges ascending
};

SolverOutcome enumerate(const Scenario& s, const std::vector<Candidate>& cands, const OracleLimits& limits,
                        const std::function<bool(const AssociationMatrix&)>& feasible,
                        const std::function<double(const AssociationMatrix&)>& objective) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cands.size() > limits.max_clients) throw SizeError("oracle: too many candidate clients");
    double space = 1.0;
    for (const auto& c : cands) space *= static_cast<double>(c.options.size());
    if (space > limits.max_space) throw SizeError("oracle: assignment space too large");

    SolverOutcome best;
    best.feasible = false;
    best.objective = kInfiniteCost;
    best.assoc = AssociationMatrix(s.n_clients(), s.n_edges());
    std::vector<std::size_t> digit(cands.size(), 0);
    AssociationMatrix a(s.n_clients(), s.n_edges());
    long visited = 0;
    while (true) {
        ++visited;
        bool capacity_ok = true;
        std::vector<int> load(s.n_edges(), 0);
        for (std::size_t k = 0; k < cands.size(); ++k) {
            a.clear_client(cands[k].id);
            const EdgeId j = cands[k].options[digit[k]];
            if (j == kNoEdge) continue;
            a.set(cands[k].id, j);
            if (++load[j] > s.edges[j].max_clients) capacity_ok = false;
        }
        if (capacity_ok && feasible(a)) {
            const double f = objective(a);
            if (!best.feasible || f < best.objective) {
                best.feasible = true;
                best.objective = f;
                best.assoc = a;
            }
        }
        // next vector in lexicographic order (last client varies fastest)
        std::size_t k = cands.size();
        bool advanced = false;
        while (k > 0 && !advanced) {
            --k;
            if (++digit[k] < cands[k].options.size())
                advanced = true;
            else
                digit[k] = 0;
        }
        if (!advanced) break;
    }
    best.violation = best.feasible ? 0.0 : 1.0;
    best.checked_edges.assign(s.n_edges(), true);
    best.stats.candidates = visited;
    best.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

std::vector<Candidate> candidates(const Scenario& s, const Matrix<PairCost>& costs, const std::vector<int>& online) {
    std::vector<Candidate> out;
    for (const auto& c : s.clients) {
        if (!online[c.id]) continue;
        Candidate cand{c.id, {kNoEdge}};
        for (EdgeId j = 0; j < static_cast<EdgeId>(s.n_edges()); ++j)
            if (c.reaches(j) && costs(c.id, j).admissible()) cand.options.push_back(j);
        out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace

SolverOutcome solve_exact_p0(const Scenario& s, const Matrix<PairCost>& costs, const std::vector<int>& xi,
                             const CostWeights& weights, const ConstraintThresholds& th, int edge_rounds,
                             const OracleLimits& limits) {
    auto feasible = [&](const AssociationMatrix& a) { return check_p0_constraints(a, xi, s, th).all_ok(); };
    auto objective = [&](const AssociationMatrix& a) {
        return objective_round(a, xi, costs, s.edges, weights, edge_rounds);
    };
    SolverOutcome out = enumerate(s, candidates(s, costs, xi), limits, feasible, objective);
    out.mode = ConstraintMode::Deterministic;
    return out;
}

SolverOutcome solve_exact_p1(const Scenario& s, const Matrix<PairCost>& costs, const std::vector<double>& probs,
                             const CostWeights& weights, const ConstraintThresholds& th, int edge_rounds,
                             const OracleLimits& limits) {
    auto feasible = [&](const AssociationMatrix& a) { return check_chance_constraints(a, s, probs, th).all_ok(); };
    auto objective = [&](const AssociationMatrix& a) {
        return objective_plan_a(a, costs, probs, s.edges, weights, edge_rounds);
    };
    const std::vector<int> everyone(s.n_clients(), 1);
    SolverOutcome out = enumerate(s, candidates(s, costs, everyone), limits, feasible, objective);
    out.mode = ConstraintMode::Chance;
    out.probabilities = probs;
    return out;
}

}  // namespace shfl
