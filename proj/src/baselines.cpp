#include "shfl/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

#include "shfl/rng.hpp"

namespace shfl {

namespace {

AssociationProblem round_problem(const PolicyContext& ctx, const std::vector<int>& xi, ObjectiveMode objective,
                                 ConstraintMode constraints) {
    AssociationProblem p = AssociationProblem::per_round(*ctx.scenario, *ctx.costs, ctx.weights, ctx.thresholds,
                                                         ctx.edge_rounds, xi, objective, constraints);
    p.node_budget = ctx.node_budget;
    return p;
}

SolverOutcome finish(SolverOutcome out, std::chrono::steady_clock::time_point t0) {
    out.assoc.set_role(AssocRole::GroundTruth);
    out.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SolverOutcome search(const PolicyContext& ctx, const std::vector<int>& xi, ObjectiveMode objective,
                     ConstraintMode constraints, const Associator& associator) {
    const auto t0 = std::chrono::steady_clock::now();
    const AssociationProblem p = round_problem(ctx, xi, objective, constraints);
    return finish(li_long_client_d(p, p.free_pool(), ctx.seed, ctx.max_sweeps, ctx.init_attempts, nullptr, associator),
                  t0);
}

std::uint64_t set_hash(std::uint64_t seed, const std::vector<ClientId>& set) {
    std::uint64_t h = splitmix64(seed ^ 0x5eedULL);
    for (ClientId i : set) h = splitmix64(h ^ static_cast<std::uint64_t>(i + 1));
    return h;
}

bool allows(const AssociationProblem& p, ClientId i, EdgeId j) {
    return std::binary_search(p.allowed[i].begin(), p.allowed[i].end(), j);
}

}  // namespace

SolverOutcome orig_prob_solver(const PolicyContext& ctx, const std::vector<int>& xi) {
    return search(ctx, xi, ObjectiveMode::Cost, ConstraintMode::Deterministic, goc_min_c2e);
}

// goc_min_c2e only looks for a feasible placement; for the KLD policy the
// placement of a fixed set is then improved by single moves and pairwise
// swaps until neither lowers the mean KLD.
SolverOutcome kld_association(const AssociationProblem& p, const std::vector<ClientId>& selected) {
    SolverOutcome best = goc_min_c2e(p, selected);
    if (!best.feasible) return best;
    std::vector<EdgeId> edge_of = best.assoc.edge_vector();
    auto try_assignment = [&](const std::vector<EdgeId>& cand) {
        SolverOutcome out = outcome_from_assignment(p, cand, selected);
        if (!out.feasible || !(out.objective < best.objective - 1e-15)) return false;
        best = std::move(out);
        edge_of = cand;
        return true;
    };
    for (bool improved = true; improved;) {
        improved = false;
        for (ClientId i : selected) {
            if (p.fixed[i] != kNoEdge) continue;
            for (EdgeId j : p.allowed[i]) {
                if (j == edge_of[i]) continue;
                std::vector<EdgeId> cand = edge_of;
                cand[i] = j;
                if (best.assoc.load(j) < p.scenario->edges[j].max_clients && try_assignment(cand)) improved = true;
            }
        }
        for (std::size_t a = 0; a < selected.size(); ++a)
            for (std::size_t b = a + 1; b < selected.size(); ++b) {
                const ClientId x = selected[a], y = selected[b];
                if (edge_of[x] == edge_of[y] || p.fixed[x] != kNoEdge || p.fixed[y] != kNoEdge) continue;
                if (!allows(p, x, edge_of[y]) || !allows(p, y, edge_of[x])) continue;
                std::vector<EdgeId> cand = edge_of;
                std::swap(cand[x], cand[y]);
                if (try_assignment(cand)) improved = true;
            }
    }
    return best;
}

SolverOutcome kld_minimization(const PolicyContext& ctx, const std::vector<int>& xi) {
    return search(ctx, xi, ObjectiveMode::MeanKld, ConstraintMode::DataOnly, kld_association);
}

SolverOutcome client_sel_only(const PolicyContext& ctx, const std::vector<int>& xi) {
    const std::uint64_t seed = ctx.seed;
    // the association of a given set is random but reproducible
    Associator random_assoc = [seed](const AssociationProblem& p, const std::vector<ClientId>& selected) {
        Rng rng(set_hash(seed, selected));
        std::vector<int> load(p.n_edges(), 0);
        for (EdgeId j : p.fixed)
            if (j != kNoEdge) ++load[j];
        std::vector<EdgeId> edge_of(p.n_clients(), kNoEdge);
        for (ClientId i : selected) {
            std::vector<EdgeId> open;
            for (EdgeId j : p.allowed[i])
                if (load[j] < p.scenario->edges[j].max_clients) open.push_back(j);
            if (open.empty()) continue;
            const EdgeId j = open[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(open.size()) - 1))];
            edge_of[i] = j;
            ++load[j];
        }
        return outcome_from_assignment(p, edge_of, selected);
    };
    return search(ctx, xi, ObjectiveMode::Cost, ConstraintMode::DataOnly, random_assoc);
}

SolverOutcome c2e_assoc_only(const PolicyContext& ctx, const std::vector<int>& xi) {
    const auto t0 = std::chrono::steady_clock::now();
    const AssociationProblem p = round_problem(ctx, xi, ObjectiveMode::Cost, ConstraintMode::DataOnly);
    std::vector<ClientId> pool = p.free_pool();
    if (pool.empty()) return finish(outcome_from_assignment(p, std::vector<EdgeId>(p.n_clients(), kNoEdge), {}), t0);
    Rng rng = make_rng(ctx.seed, {kPolicyStream, 1});
    long capacity = 0;
    for (const auto& e : ctx.scenario->edges) capacity += e.max_clients;
    const long size = std::min<long>(uniform_int(rng, 1, capacity), static_cast<long>(pool.size()));
    shuffle(pool, rng);
    pool.resize(static_cast<std::size_t>(size));
    return finish(goc_min_c2e(p, pool), t0);
}

SolverOutcome min_latency_association(const AssociationProblem& p, const std::vector<ClientId>& selected_in) {
    std::vector<ClientId> selected = selected_in;
    std::sort(selected.begin(), selected.end());
    const Scenario& s = *p.scenario;
    std::vector<int> load(p.n_edges(), 0);
    for (EdgeId j : p.fixed)
        if (j != kNoEdge) ++load[j];
    std::vector<EdgeId> edge_of(p.n_clients(), kNoEdge);
    for (ClientId i : selected) {
        EdgeId best = kNoEdge;
        double best_t = kInfiniteCost;
        for (EdgeId j : p.allowed[i]) {
            if (load[j] >= s.edges[j].max_clients) continue;
            const double t = uplink_cost(s.clients[i], s.edges[j], s.channel).time;
            if (t < best_t) {
                best_t = t;
                best = j;
            }
        }
        if (best == kNoEdge) continue;
        edge_of[i] = best;
        ++load[best];
    }
    return outcome_from_assignment(p, edge_of, selected);
}

SolverOutcome c2e_greedy_assoc(const PolicyContext& ctx, const std::vector<int>& xi) {
    return search(ctx, xi, ObjectiveMode::Cost, ConstraintMode::DataOnly, min_latency_association);
}

SolverOutcome fed_cs(const PolicyContext& ctx, const std::vector<int>& xi) {
    const auto t0 = std::chrono::steady_clock::now();
    const AssociationProblem p = round_problem(ctx, xi, ObjectiveMode::Cost, ConstraintMode::DataOnly);
    const Scenario& s = *ctx.scenario;
    const auto& costs = *ctx.costs;

    // faster clients claim seats first; augmenting paths then maximize the count
    std::vector<ClientId> order = p.free_pool();
    auto fastest = [&](ClientId i) {
        double t = kInfiniteCost;
        for (EdgeId j : p.allowed[i]) t = std::min(t, costs(i, j).delay);
        return t;
    };
    std::stable_sort(order.begin(), order.end(), [&](ClientId a, ClientId b) { return fastest(a) < fastest(b); });

    std::vector<EdgeId> edge_of(s.n_clients(), kNoEdge);
    std::vector<std::vector<ClientId>> seated(s.n_edges());
    std::vector<bool> visited;
    std::function<bool(ClientId)> augment = [&](ClientId i) -> bool {
        std::vector<EdgeId> opts = p.allowed[i];
        std::stable_sort(opts.begin(), opts.end(), [&](EdgeId a, EdgeId b) { return costs(i, a).delay < costs(i, b).delay; });
        for (EdgeId j : opts) {
            if (visited[j]) continue;
            visited[j] = true;
            if (static_cast<int>(seated[j].size()) < s.edges[j].max_clients) {
                seated[j].push_back(i);
                edge_of[i] = j;
                return true;
            }
            for (ClientId& other : seated[j]) {
                const ClientId moved = other;
                if (augment(moved)) {
                    other = i;
                    edge_of[i] = j;
                    return true;
                }
            }
        }
        return false;
    };
    std::vector<ClientId> selected;
    for (ClientId i : order) {
        visited.assign(s.n_edges(), false);
        if (augment(i)) selected.push_back(i);
    }
    std::sort(selected.begin(), selected.end());
    return finish(outcome_from_assignment(p, edge_of, selected), t0);
}

const std::vector<std::string>& baseline_names() {
    static const std::vector<std::string> names = {"orig_prob_solver", "kld_minimization", "client_sel_only",
                                                   "c2e_assoc_only",   "c2e_greedy_assoc", "fed_cs"};
    return names;
}

SolverOutcome run_baseline(const std::string& name, const PolicyContext& ctx, const std::vector<int>& xi) {
    if (name == "orig_prob_solver") return orig_prob_solver(ctx, xi);
    if (name == "kld_minimization") return kld_minimization(ctx, xi);
    if (name == "client_sel_only") return client_sel_only(ctx, xi);
    if (name == "c2e_assoc_only") return c2e_assoc_only(ctx, xi);
    if (name == "c2e_greedy_assoc") return c2e_greedy_assoc(ctx, xi);
    if (name == "fed_cs") return fed_cs(ctx, xi);
    throw ConfigError("policy", "unknown policy '" + name + "'");
}

}  // namespace shfl
