#include "shfl/plan_a.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "shfl/divergence.hpp"
#include "shfl/rng.hpp"

namespace shfl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct EdgeAgg {
    int load = 0;
    double max_delay = 0.0;
    double energy = 0.0;
    long data = 0;
    double expected_data = 0.0;
    double all_offline = 1.0;
    double kld = 0.0;  // of the current members, or the empty value
    std::vector<double> counts;
    std::vector<double> rmin, rmax;
};

/// Incremental evaluation of a (partial) placement. Used by the greedy pass,
/// the backtracking search, and to score finished placements.
class PlacementState {
public:
    explicit PlacementState(const AssociationProblem& p)
        : p_(p),
          s_(*p.scenario),
          q_(s_.reference),
          edge_of_(s_.n_clients(), kNoEdge),
          agg_(s_.n_edges()) {
        const std::size_t Z = q_.size();
        empty_kld_ = -std::log(*std::min_element(q_.begin(), q_.end()));
        for (auto& a : agg_) {
            a.counts.assign(Z, 0.0);
            a.rmin.assign(Z, INFINITY);
            a.rmax.assign(Z, -INFINITY);
            a.kld = empty_kld_;
        }
        for (const auto& e : s_.edges) energy_total_ += e.backhaul_energy;
        chance_rhs_ = (p.thresholds.d_min + p.thresholds.delta_d) * (1.0 - p.thresholds.epsilon_risk);
        chance_t_ = p.thresholds.kld_max - p.thresholds.delta_k;
    }

    EdgeId edge_of(ClientId i) const { return edge_of_[i]; }
    const std::vector<EdgeId>& placement() const { return edge_of_; }
    bool full(EdgeId j) const { return agg_[j].load >= s_.edges[j].max_clients; }
    const EdgeAgg& agg(EdgeId j) const { return agg_[j]; }

    void place(ClientId i, EdgeId j) {
        undo_.push_back({i, j, agg_[j], log_p_sum_, n_selected_, energy_total_});
        apply(i, j, agg_[j]);
        edge_of_[i] = j;
        energy_total_ += p_.edge_rounds * (*p_.costs)(i, j).energy;
        log_p_sum_ += std::log(p_.probs[i]);
        ++n_selected_;
    }

    void undo() {
        Undo& u = undo_.back();
        agg_[u.edge] = std::move(u.agg);
        edge_of_[u.client] = kNoEdge;
        log_p_sum_ = u.log_p_sum;
        n_selected_ = u.n_selected;
        energy_total_ = u.energy_total;
        undo_.pop_back();
    }

    double objective() const { return objective_impl(kNoEdge, kNoEdge); }
    /// Objective if client i were added to edge j, without modifying state.
    double objective_with(ClientId i, EdgeId j) const { return objective_impl(i, j); }

    double edge_violation(EdgeId j) const {
        const EdgeAgg& a = agg_[j];
        const auto& th = p_.thresholds;
        double v = std::max(0, a.load - s_.edges[j].max_clients);
        switch (p_.constraints) {
            case ConstraintMode::Chance:
                // the bound is a probability; past 1 it carries no information
                v += std::max(0.0, std::min(chance_bound(j), 1.0) - th.delta_risk);
                v += std::max(0.0, chance_rhs_ - a.expected_data) / chance_rhs_;
                break;
            case ConstraintMode::Deterministic:
                v += std::max(0.0, a.kld - th.kld_max);
                v += std::max(0.0, th.d_min - static_cast<double>(a.data)) / th.d_min;
                break;
            case ConstraintMode::DataOnly:
                v += std::max(0.0, th.d_min - static_cast<double>(a.data)) / th.d_min;
                break;
        }
        return v;
    }

    bool edge_ok(EdgeId j) const {
        const EdgeAgg& a = agg_[j];
        const auto& th = p_.thresholds;
        if (a.load > s_.edges[j].max_clients) return false;
        switch (p_.constraints) {
            case ConstraintMode::Chance:
                return a.load > 0 && chance_bound(j) <= th.delta_risk && a.expected_data >= chance_rhs_;
            case ConstraintMode::Deterministic:
                return a.load > 0 && a.kld <= th.kld_max && static_cast<double>(a.data) >= th.d_min;
            case ConstraintMode::DataOnly:
                return static_cast<double>(a.data) >= th.d_min;
        }
        return false;
    }

    bool all_ok() const {
        for (std::size_t j = 0; j < agg_.size(); ++j)
            if (p_.checked_edges[j] && !edge_ok(static_cast<EdgeId>(j))) return false;
        return true;
    }

    double violation() const {
        double v = 0.0;
        for (std::size_t j = 0; j < agg_.size(); ++j)
            if (p_.checked_edges[j]) v += edge_violation(static_cast<EdgeId>(j));
        return v;
    }

    /// Normalized Markov KLD surrogate sum_h G(h) / (kld_max - delta_k) of
    /// the current members; never decreases as members are added.
    double g_ratio(EdgeId j) const {
        const EdgeAgg& a = agg_[j];
        double g = 0.0;
        for (std::size_t h = 0; h < q_.size(); ++h) g += g_bound_from_range(a.rmin[h], a.rmax[h], q_[h]);
        return g / chance_t_;
    }

    double chance_bound(EdgeId j) const {
        const EdgeAgg& a = agg_[j];
        if (a.load == 0) return 1.0;
        return a.all_offline + (1.0 - a.all_offline) * g_ratio(j);
    }

    double chance_rhs() const { return chance_rhs_; }

private:
    struct Undo {
        ClientId client;
        EdgeId edge;
        EdgeAgg agg;
        double log_p_sum;
        int n_selected;
        double energy_total;
    };

    double kld_of(const std::vector<double>& counts, double total) const {
        if (total <= 0) return empty_kld_;
        double k = 0.0;
        for (std::size_t h = 0; h < counts.size(); ++h) {
            const double r = counts[h] / total;
            if (r > 0) k += r * std::log(r / q_[h]);
        }
        return std::max(k, 0.0);
    }

    void apply(ClientId i, EdgeId j, EdgeAgg& a) const {
        const ClientProfile& c = s_.clients[i];
        const PairCost& pc = (*p_.costs)(i, j);
        ++a.load;
        a.max_delay = std::max(a.max_delay, pc.delay);
        a.energy += pc.energy;
        a.data += c.data_size;
        a.expected_data += p_.probs[i] * static_cast<double>(c.data_size);
        a.all_offline *= 1.0 - p_.probs[i];
        for (std::size_t h = 0; h < q_.size(); ++h) {
            const double y = static_cast<double>(c.label_counts[h]);
            a.counts[h] += y;
            const double r = y / static_cast<double>(c.data_size);
            a.rmin[h] = std::min(a.rmin[h], r);
            a.rmax[h] = std::max(a.rmax[h], r);
        }
        a.kld = kld_of(a.counts, static_cast<double>(a.data));
    }

    double objective_impl(ClientId i, EdgeId j) const {
        const auto& w = p_.weights;
        if (p_.objective == ObjectiveMode::MeanKld) {
            double sum = 0.0;
            int n = 0;
            for (std::size_t k = 0; k < agg_.size(); ++k) {
                if (!p_.checked_edges[k]) continue;
                ++n;
                if (static_cast<EdgeId>(k) == j) {
                    std::vector<double> counts = agg_[k].counts;
                    const auto& c = s_.clients[i];
                    for (std::size_t h = 0; h < counts.size(); ++h)
                        counts[h] += static_cast<double>(c.label_counts[h]);
                    sum += kld_of(counts, static_cast<double>(agg_[k].data + c.data_size));
                } else {
                    sum += agg_[k].kld;
                }
            }
            return n == 0 ? 0.0 : sum / n;
        }
        double delay = 0.0;
        for (std::size_t k = 0; k < agg_.size(); ++k) {
            double slowest = agg_[k].max_delay;
            if (static_cast<EdgeId>(k) == j) slowest = std::max(slowest, (*p_.costs)(i, j).delay);
            delay = std::max(delay, p_.edge_rounds * slowest + s_.edges[k].backhaul_delay);
        }
        double energy = energy_total_;
        if (j != kNoEdge) energy += p_.edge_rounds * (*p_.costs)(i, j).energy;
        double f = w.lambda_t * delay + w.lambda_e * energy;
        if (p_.objective == ObjectiveMode::PlanA) {
            double log_sum = log_p_sum_;
            int n = n_selected_;
            if (j != kNoEdge) {
                log_sum += std::log(p_.probs[i]);
                ++n;
            }
            f -= w.lambda_c * (n == 0 ? 0.0 : std::exp(log_sum / n));
        }
        return f;
    }

    const AssociationProblem& p_;
    const Scenario& s_;
    std::vector<double> q_;
    std::vector<EdgeId> edge_of_;
    std::vector<EdgeAgg> agg_;
    std::vector<Undo> undo_;
    double empty_kld_ = 0.0;
    double energy_total_ = 0.0;
    double log_p_sum_ = 0.0;
    int n_selected_ = 0;
    double chance_rhs_ = 0.0;
    double chance_t_ = 1.0;
};

bool allows(const AssociationProblem& p, ClientId i, EdgeId j) {
    const auto& a = p.allowed[i];
    return std::binary_search(a.begin(), a.end(), j);
}

/// Places the pinned clients of the problem.
void place_fixed(const AssociationProblem& p, PlacementState& st) {
    for (std::size_t i = 0; i < p.fixed.size(); ++i)
        if (p.fixed[i] != kNoEdge) st.place(static_cast<ClientId>(i), p.fixed[i]);
}

/// Independent re-check through the library constraint checkers, restricted
/// to the checked edges.
bool revalidate(const AssociationProblem& p, const AssociationMatrix& assoc) {
    const Scenario& s = *p.scenario;
    for (std::size_t i = 0; i < s.n_clients(); ++i) {
        const auto id = static_cast<ClientId>(i);
        if (assoc.assignments_of(id) > 1) return false;
        const EdgeId j = assoc.edge_of(id);
        if (j != kNoEdge && !s.clients[i].reaches(j)) return false;
    }
    for (const auto& e : s.edges)
        if (assoc.load(e.id) > e.max_clients) return false;
    if (p.constraints == ConstraintMode::Chance) {
        const auto r = check_chance_constraints(assoc, s, p.probs, p.thresholds);
        for (std::size_t j = 0; j < s.n_edges(); ++j)
            if (p.checked_edges[j] && !(r.kld_ok[j] && r.data_ok[j])) return false;
        return true;
    }
    const std::vector<int> ones(s.n_clients(), 1);
    const auto r = check_p0_constraints(assoc, ones, s, p.thresholds);
    for (std::size_t j = 0; j < s.n_edges(); ++j) {
        if (!p.checked_edges[j]) continue;
        if (!r.data_ok[j]) return false;
        if (p.constraints == ConstraintMode::Deterministic && !r.kld_ok[j]) return false;
    }
    return true;
}

SolverOutcome make_outcome(const AssociationProblem& p, const PlacementState& st, int unplaced) {
    SolverOutcome out;
    out.assoc = AssociationMatrix::from_edges(st.placement(), p.n_edges(), AssocRole::GroundTruth);
    out.objective = st.objective();
    out.violation = st.violation() + unplaced;
    out.feasible = unplaced == 0 && st.all_ok() && revalidate(p, out.assoc);
    if (out.feasible) out.violation = 0.0;
    out.mode = p.constraints;
    out.checked_edges = p.checked_edges;
    if (p.constraints == ConstraintMode::Chance) out.probabilities = p.probs;
    return out;
}

std::vector<ClientId> sorted_unique(std::vector<ClientId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Depth-first search over the greedy order; the first leaf it reaches is the
// greedy association itself, and backtracking revisits the most recent
// choice first.
class Backtracker {
public:
    Backtracker(const AssociationProblem& p, PlacementState& st, std::vector<ClientId> order)
        : p_(p), st_(st), order_(std::move(order)) {
        const std::size_t S = p.n_edges();
        const auto& th = p.thresholds;
        need_.assign(S, 0.0);
        for (std::size_t j = 0; j < S; ++j)
            need_[j] = p.constraints == ConstraintMode::Chance ? st.chance_rhs() : th.d_min;
        // potential[d][j]: data the clients order[d..] could still bring to j
        potential_.assign(order_.size() + 1, std::vector<double>(S, 0.0));
        for (std::size_t d = order_.size(); d-- > 0;) {
            potential_[d] = potential_[d + 1];
            const ClientId c = order_[d];
            const double mass = p.constraints == ConstraintMode::Chance
                                    ? p.probs[c] * static_cast<double>(p.scenario->clients[c].data_size)
                                    : static_cast<double>(p.scenario->clients[c].data_size);
            for (EdgeId j : p.allowed[c]) potential_[d][j] += mass;
        }
    }

    bool run() { return dfs(0); }
    long nodes() const { return nodes_; }
    bool has_best() const { return has_best_; }
    const std::vector<EdgeId>& best() const { return best_; }

private:
    bool pruned(std::size_t depth) const {
        const std::size_t S = p_.n_edges();
        for (std::size_t j = 0; j < S; ++j) {
            if (!p_.checked_edges[j]) continue;
            const EdgeAgg& a = st_.agg(static_cast<EdgeId>(j));
            const double have = p_.constraints == ConstraintMode::Chance ? a.expected_data
                                                                           : static_cast<double>(a.data);
            if (have + potential_[depth][j] < need_[j]) return true;
            // the surrogate bound is at least min(g_ratio, 1) and g_ratio only grows
            if (p_.constraints == ConstraintMode::Chance && a.load > 0 &&
                st_.g_ratio(static_cast<EdgeId>(j)) > p_.thresholds.delta_risk)
                return true;
        }
        return false;
    }

    bool dfs(std::size_t depth) {
        if (depth == 0 && pruned(0)) return false;
        if (depth == order_.size()) {
            if (st_.all_ok()) return true;
            const double v = st_.violation();
            const double f = st_.objective();
            if (!has_best_ || v < best_v_ || (v == best_v_ && f < best_f_)) {
                has_best_ = true;
                best_v_ = v;
                best_f_ = f;
                best_ = st_.placement();
            }
            return false;
        }
        const ClientId c = order_[depth];
        std::vector<std::pair<double, EdgeId>> options;
        for (EdgeId j : p_.allowed[c])
            if (!st_.full(j)) options.emplace_back(st_.objective_with(c, j), j);
        std::sort(options.begin(), options.end());
        for (const auto& [f, j] : options) {
            if (nodes_ >= p_.node_budget) return false;
            ++nodes_;
            st_.place(c, j);
            if (!pruned(depth + 1) && dfs(depth + 1)) return true;
            st_.undo();
        }
        return false;
    }

    const AssociationProblem& p_;
    PlacementState& st_;
    std::vector<ClientId> order_;
    std::vector<double> need_;
    std::vector<std::vector<double>> potential_;
    long nodes_ = 0;
    bool has_best_ = false;
    double best_v_ = 0.0, best_f_ = 0.0;
    std::vector<EdgeId> best_;
};

}  // namespace

// ---------------------------------------------------------------------------

AssociationProblem AssociationProblem::plan_a(const Scenario& scenario, const Matrix<PairCost>& costs,
                                              const CostWeights& weights, const ConstraintThresholds& thresholds,
                                              int edge_rounds, std::vector<double> probs) {
    if (probs.size() != scenario.n_clients()) throw DomainError("plan_a: probability vector size mismatch");
    for (double p : probs)
        if (!(p > 0 && p <= 1)) throw DomainError("plan_a: probabilities must lie in (0,1]");
    AssociationProblem p;
    p.scenario = &scenario;
    p.costs = &costs;
    p.weights = weights;
    p.thresholds = thresholds;
    p.edge_rounds = edge_rounds;
    p.probs = std::move(probs);
    p.objective = ObjectiveMode::PlanA;
    p.constraints = ConstraintMode::Chance;
    p.allowed.resize(scenario.n_clients());
    for (const auto& c : scenario.clients) {
        for (EdgeId j : c.reachable_edges)
            if (costs(c.id, j).admissible()) p.allowed[c.id].push_back(j);
        std::sort(p.allowed[c.id].begin(), p.allowed[c.id].end());
    }
    p.fixed.assign(scenario.n_clients(), kNoEdge);
    p.checked_edges.assign(scenario.n_edges(), true);
    return p;
}

AssociationProblem AssociationProblem::per_round(const Scenario& scenario, const Matrix<PairCost>& costs,
                                                 const CostWeights& weights, const ConstraintThresholds& thresholds,
                                                 int edge_rounds, const std::vector<int>& xi, ObjectiveMode objective,
                                                 ConstraintMode constraints) {
    AssociationProblem p = plan_a(scenario, costs, weights, thresholds, edge_rounds,
                                  std::vector<double>(scenario.n_clients(), 1.0));
    p.objective = objective;
    p.constraints = constraints;
    for (std::size_t i = 0; i < scenario.n_clients(); ++i)
        if (!xi[i]) p.allowed[i].clear();
    return p;
}

std::vector<ClientId> AssociationProblem::free_pool() const {
    std::vector<ClientId> out;
    for (std::size_t i = 0; i < allowed.size(); ++i)
        if (!allowed[i].empty() && fixed[i] == kNoEdge) out.push_back(static_cast<ClientId>(i));
    return out;
}

SolverOutcome outcome_from_assignment(const AssociationProblem& p, const std::vector<EdgeId>& edge_of,
                                      const std::vector<ClientId>& selected) {
    PlacementState st(p);
    place_fixed(p, st);
    int unplaced = 0;
    for (ClientId i : selected) {
        if (p.fixed[i] != kNoEdge) continue;
        const EdgeId j = edge_of[i];
        if (j == kNoEdge || !allows(p, i, j) || st.full(j)) {
            ++unplaced;
            continue;
        }
        st.place(i, j);
    }
    return make_outcome(p, st, unplaced);
}

SolverOutcome goc_min_c2e(const AssociationProblem& p, const std::vector<ClientId>& selected_in) {
    const auto t0 = Clock::now();
    const std::vector<ClientId> selected = sorted_unique(selected_in);

    PlacementState st(p);
    place_fixed(p, st);
    int unplaced = 0;
    std::vector<ClientId> remaining;
    for (ClientId i : selected) {
        if (p.fixed[i] != kNoEdge) continue;
        const auto& opts = p.allowed[i];
        if (opts.empty()) {
            ++unplaced;
        } else if (opts.size() == 1) {
            // single-edge clients go straight to their only edge
            if (st.full(opts[0]))
                ++unplaced;
            else
                st.place(i, opts[0]);
        } else {
            remaining.push_back(i);
        }
    }

    // Greedy pass: minimum objective variation, ties to lower client, then edge.
    std::vector<ClientId> order;
    std::vector<ClientId> pending = remaining;
    int greedy_unplaced = 0;
    while (!pending.empty()) {
        const double base = st.objective();
        double best_delta = INFINITY;
        ClientId best_i = -1;
        EdgeId best_j = kNoEdge;
        std::vector<ClientId> stuck;
        for (ClientId i : pending) {
            bool any = false;
            for (EdgeId j : p.allowed[i]) {
                if (st.full(j)) continue;
                any = true;
                const double delta = st.objective_with(i, j) - base;
                if (delta < best_delta) {
                    best_delta = delta;
                    best_i = i;
                    best_j = j;
                }
            }
            if (!any) stuck.push_back(i);
        }
        for (ClientId i : stuck) pending.erase(std::find(pending.begin(), pending.end(), i));
        greedy_unplaced += static_cast<int>(stuck.size());
        if (best_i < 0) break;
        st.place(best_i, best_j);
        order.push_back(best_i);
        pending.erase(std::find(pending.begin(), pending.end(), best_i));
    }

    SolverOutcome out = make_outcome(p, st, unplaced + greedy_unplaced);
    long nodes = 0;
    if (!out.feasible && unplaced == 0 && !remaining.empty()) {
        // rebuild the prefix (fixed + single-edge clients) and search over the
        // greedy order; stuck clients are appended last
        for (ClientId i : remaining)
            if (std::find(order.begin(), order.end(), i) == order.end()) order.push_back(i);
        PlacementState bt_state(p);
        place_fixed(p, bt_state);
        for (ClientId i : selected)
            if (p.fixed[i] == kNoEdge && p.allowed[i].size() == 1) bt_state.place(i, p.allowed[i][0]);
        Backtracker bt(p, bt_state, order);
        const bool found = bt.run();
        nodes = bt.nodes();
        if (found) {
            out = make_outcome(p, bt_state, 0);
        } else if (bt.has_best()) {
            SolverOutcome alt = outcome_from_assignment(p, bt.best(), selected);
            if (ranks_better(alt, out)) out = std::move(alt);
        }
    }
    out.stats.candidates = 1;
    out.stats.backtrack_nodes = nodes;
    out.stats.wall_time_s = seconds_since(t0);
    return out;
}

bool ranks_better(const SolverOutcome& a, const SolverOutcome& b) {
    if (a.feasible != b.feasible) return a.feasible;
    auto tol = [](double x) { return 1e-12 * std::max(1.0, std::fabs(x)); };
    if (!a.feasible) {
        if (a.violation < b.violation - tol(b.violation)) return true;
        if (a.violation > b.violation + tol(b.violation)) return false;
    }
    return a.objective < b.objective - tol(b.objective);
}

void DecisionLog::write_jsonl(std::ostream& out) const {
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["stage"] = e.stage;
        j["op"] = e.op;
        j["removed"] = e.removed;
        j["added"] = e.added;
        j["delta"] = e.delta;
        j["feasible"] = e.feasible;
        j["accepted"] = e.accepted;
        out << j.dump() << '\n';
    }
}

SolverOutcome local_search(const AssociationProblem& p, const std::vector<ClientId>& pool_in,
                           const std::vector<ClientId>& initial, const LocalSearchOptions& options,
                           const Associator& associator) {
    const auto t0 = Clock::now();
    const std::vector<ClientId> pool = sorted_unique(pool_in);
    std::vector<ClientId> current = sorted_unique(initial);
    const bool has_fixed = std::any_of(p.fixed.begin(), p.fixed.end(), [](EdgeId j) { return j != kNoEdge; });

    SolverOutcome best = associator(p, current);
    SolverStats stats = best.stats;
    const std::string stage = options.log ? options.log->stage : std::string();

    auto consider = [&](const char* op, std::vector<ClientId> candidate, std::vector<ClientId> removed,
                        std::vector<ClientId> added) {
        if (candidate.empty() && !has_fixed) return false;
        SolverOutcome out = associator(p, candidate);
        ++stats.candidates;
        stats.backtrack_nodes += out.stats.backtrack_nodes;
        const bool accept = ranks_better(out, best);
        if (options.log)
            options.log->entries.push_back({stage, op, std::move(removed), std::move(added),
                                            out.objective - best.objective, out.feasible, accept});
        if (accept) {
            best = std::move(out);
            current = std::move(candidate);
        }
        return accept;
    };

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        ++stats.iterations;
        bool improved = false;
        const std::vector<ClientId> snap_in = current;
        std::vector<ClientId> snap_out;
        std::set_difference(pool.begin(), pool.end(), snap_in.begin(), snap_in.end(), std::back_inserter(snap_out));
        auto in_current = [&](ClientId i) { return std::binary_search(current.begin(), current.end(), i); };

        for (ClientId i : snap_out) {
            if (in_current(i)) continue;
            std::vector<ClientId> cand = current;
            cand.insert(std::upper_bound(cand.begin(), cand.end(), i), i);
            improved |= consider("add", std::move(cand), {}, {i});
        }
        for (ClientId i : snap_in) {
            if (!in_current(i)) continue;
            std::vector<ClientId> cand = current;
            cand.erase(std::find(cand.begin(), cand.end(), i));
            improved |= consider("remove", std::move(cand), {i}, {});
        }
        for (ClientId i : snap_in) {
            for (ClientId k : snap_out) {
                if (!in_current(i) || in_current(k)) continue;
                std::vector<ClientId> cand = current;
                cand.erase(std::find(cand.begin(), cand.end(), i));
                cand.insert(std::upper_bound(cand.begin(), cand.end(), k), k);
                improved |= consider("exchange", std::move(cand), {i}, {k});
            }
        }
        if (!improved) break;
    }
    best.stats = stats;
    best.stats.wall_time_s = seconds_since(t0);
    return best;
}

namespace {

// One randomized start: clients join in random order until every checked
// edge could meet its data requirement and the greedy association does.
std::vector<ClientId> random_start(const AssociationProblem& p, const std::vector<ClientId>& pool, Rng& rng) {
    std::vector<ClientId> order = pool;
    shuffle(order, rng);
    const bool chance = p.constraints == ConstraintMode::Chance;
    const double need = chance ? (p.thresholds.d_min + p.thresholds.delta_d) * (1.0 - p.thresholds.epsilon_risk)
                               : p.thresholds.d_min;
    std::vector<double> reach(p.n_edges(), 0.0);
    // pinned clients already contribute
    for (std::size_t i = 0; i < p.fixed.size(); ++i)
        if (p.fixed[i] != kNoEdge)
            reach[p.fixed[i]] += (chance ? p.probs[i] : 1.0) * static_cast<double>(p.scenario->clients[i].data_size);

    AssociationProblem data_only = p;
    data_only.constraints = ConstraintMode::DataOnly;
    data_only.node_budget = 0;
    if (chance) {
        // expected data expressed as the DataOnly threshold
        data_only.thresholds.d_min = need;
    }

    std::vector<ClientId> sel;
    for (ClientId i : order) {
        sel.push_back(i);
        const double mass = (chance ? p.probs[i] : 1.0) * static_cast<double>(p.scenario->clients[i].data_size);
        for (EdgeId j : p.allowed[i]) reach[j] += mass;
        bool possible = true;
        for (std::size_t j = 0; j < p.n_edges(); ++j)
            if (p.checked_edges[j] && reach[j] < need) possible = false;
        if (!possible) continue;
        if (!chance) {
            if (goc_min_c2e(data_only, sel).feasible) break;
        } else {
            // the greedy association has to carry enough expected data per edge
            const SolverOutcome g = goc_min_c2e(p, sel);
            if (g.feasible) break;
            bool enough = true;
            for (std::size_t j = 0; j < p.n_edges(); ++j) {
                if (!p.checked_edges[j]) continue;
                double e = 0.0;
                for (ClientId m : g.assoc.members(static_cast<EdgeId>(j)))
                    e += p.probs[m] * static_cast<double>(p.scenario->clients[m].data_size);
                if (e < need) enough = false;
            }
            if (enough) break;
        }
    }
    std::sort(sel.begin(), sel.end());
    return sel;
}

}  // namespace

std::vector<ClientId> initial_selection(const AssociationProblem& p, const std::vector<ClientId>& pool,
                                        std::uint64_t seed, int attempts) {
    for (int a = 0; a < attempts; ++a) {
        Rng rng = make_rng(seed, {kPlanAStream, static_cast<std::uint64_t>(a)});
        auto sel = random_start(p, pool, rng);
        if (sel.empty()) continue;
        if (goc_min_c2e(p, sel).feasible) return sel;
        // the data condition holds but some other constraint does not: keep
        // adding the remaining clients in random order
        std::vector<ClientId> rest;
        for (ClientId i : pool)
            if (!std::binary_search(sel.begin(), sel.end(), i)) rest.push_back(i);
        shuffle(rest, rng);
        for (ClientId i : rest) {
            sel.insert(std::upper_bound(sel.begin(), sel.end(), i), i);
            if (goc_min_c2e(p, sel).feasible) return sel;
        }
    }
    throw InfeasibleError("no feasible initial selection within " + std::to_string(attempts) + " attempts");
}

SolverOutcome li_long_client_d(const AssociationProblem& p, const std::vector<ClientId>& pool, std::uint64_t seed,
                               int max_sweeps, int init_attempts, DecisionLog* log, const Associator& associator) {
    const auto t0 = Clock::now();
    const bool nothing_fixed =
        std::all_of(p.fixed.begin(), p.fixed.end(), [](EdgeId j) { return j == kNoEdge; });
    SolverOutcome out;
    try {
        const auto start = initial_selection(p, pool, seed, init_attempts);
        out = local_search(p, pool, start, {max_sweeps, log}, associator);
    } catch (const InfeasibleError&) {
        // No feasible start: minimize the violation from several random
        // starts. The violation landscape has many local minima, and a
        // feasible point reached from any start ends the restarts.
        bool have = false;
        for (int a = 0; a < std::max(1, init_attempts); ++a) {
            Rng rng = make_rng(seed, {kPlanAStream, static_cast<std::uint64_t>(a)});
            const auto start = random_start(p, pool, rng);
            SolverOutcome cand = start.empty() && nothing_fixed
                                     ? outcome_from_assignment(p, std::vector<EdgeId>(p.n_clients(), kNoEdge), {})
                                     : local_search(p, pool, start, {max_sweeps, log}, associator);
            if (!have || ranks_better(cand, out)) {
                out = std::move(cand);
                have = true;
            }
            if (out.feasible || pool.empty()) break;
        }
    }
    out.stats.wall_time_s = seconds_since(t0);
    return out;
}

SolverOutcome li_long_client_d(const Scenario& scenario, const CostWeights& weights,
                               const ConstraintThresholds& thresholds, std::uint64_t seed,
                               const PlanAOptions& options) {
    const auto costs = pair_cost_table(scenario, options.local_steps);
    std::vector<double> probs = options.probs;
    if (probs.empty())
        for (const auto& c : scenario.clients) probs.push_back(c.online_prob);
    AssociationProblem p = AssociationProblem::plan_a(scenario, costs, weights, thresholds, options.edge_rounds, probs);
    p.node_budget = options.node_budget;
    SolverOutcome out = li_long_client_d(p, p.free_pool(), seed, options.max_sweeps, options.init_attempts,
                                         options.log);
    out.assoc.set_role(AssocRole::PlanA);
    return out;
}

}  // namespace shfl
