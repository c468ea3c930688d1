#include "shfl/plan_b.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include "json.hpp"
#include "shfl/divergence.hpp"
#include "shfl/rng.hpp"

namespace shfl {

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) throw DomainError("cosine similarity of a zero vector is undefined");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

int SimilarityMatrix::index_of(ClientId i) const {
    const auto it = std::find(clients.begin(), clients.end(), i);
    return it == clients.end() ? -1 : static_cast<int>(it - clients.begin());
}

SimilarityMatrix similarity_matrix(const std::vector<ClientId>& clients, const std::vector<FeatureVector>& features) {
    if (clients.size() != features.size()) throw DomainError("similarity_matrix: size mismatch");
    SimilarityMatrix m;
    m.clients = clients;
    const std::size_t n = clients.size();
    m.psi = Matrix<double>(n, n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        m.psi(a, a) = cosine_similarity(features[a], features[a]) > 0 ? 1.0 : 0.0;
        for (std::size_t b = a + 1; b < n; ++b) m.psi(a, b) = m.psi(b, a) = cosine_similarity(features[a], features[b]);
    }
    return m;
}

namespace {

SimilarityMatrix edge_similarity(const Scenario& s, const Matrix<PairCost>& costs, EdgeId j) {
    std::vector<ClientId> ids;
    std::vector<FeatureVector> feats;
    for (const auto& c : s.clients) {
        if (!c.reaches(j) || !costs(c.id, j).admissible()) continue;
        ids.push_back(c.id);
        feats.push_back({static_cast<double>(c.data_size), costs(c.id, j).delay, costs(c.id, j).energy});
    }
    return similarity_matrix(ids, feats);
}

}  // namespace

SimilarityMatrix similarity_matrix(const Scenario& scenario, EdgeId j, int local_steps) {
    return edge_similarity(scenario, pair_cost_table(scenario, local_steps), j);
}

ClusterSet dbscan_clusters(const SimilarityMatrix& sim, double psi_min, int p_min) {
    const int n = static_cast<int>(sim.clients.size());
    auto neighbours = [&](int a) {
        std::vector<int> out;
        for (int b = 0; b < n; ++b)
            if (sim.psi(a, b) >= psi_min || a == b) out.push_back(b);
        return out;
    };
    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    ClusterSet cs;
    cs.label.assign(n, kUnvisited);
    int next = 0;
    for (int a = 0; a < n; ++a) {
        if (cs.label[a] != kUnvisited) continue;
        const auto nb = neighbours(a);
        if (static_cast<int>(nb.size()) < p_min) {
            cs.label[a] = kNoise;
            continue;
        }
        const int id = next++;
        cs.label[a] = id;
        std::deque<int> frontier(nb.begin(), nb.end());
        while (!frontier.empty()) {
            const int b = frontier.front();
            frontier.pop_front();
            if (cs.label[b] == kNoise) cs.label[b] = id;  // border point
            if (cs.label[b] != kUnvisited) continue;
            cs.label[b] = id;
            const auto nb2 = neighbours(b);
            if (static_cast<int>(nb2.size()) >= p_min) frontier.insert(frontier.end(), nb2.begin(), nb2.end());
        }
    }
    cs.clusters.assign(next, {});
    for (int a = 0; a < n; ++a) {
        if (cs.label[a] >= 0)
            cs.clusters[cs.label[a]].push_back(sim.clients[a]);
        else
            cs.noise.push_back(sim.clients[a]);
    }
    return cs;
}

std::string RepairReport::to_json() const {
    nlohmann::ordered_json j;
    j["round"] = round;
    j["dropouts"] = dropouts;
    auto subs = nlohmann::ordered_json::array();
    for (const auto& s : substitutions)
        subs.push_back({{"edge", s.edge}, {"dropout", s.dropout}, {"substitute", s.substitute}, {"psi", s.psi}});
    j["substitutions"] = subs;
    j["fallback"] = fallback;
    j["fallback_edges"] = fallback_edges;
    j["backups"] = backups;
    j["feasible"] = feasible;
    return j.dump();
}

namespace {

bool edge_holds(const AssociationMatrix& assoc, const std::vector<int>& xi, const Scenario& s,
                const ConstraintThresholds& th, EdgeId j) {
    long data = 0;
    for (ClientId i : assoc.members(j))
        if (xi[i]) data += s.clients[i].data_size;
    if (static_cast<double>(data) < th.d_min) return false;
    return kld(edge_distribution(assoc, xi, s.clients, j), LabelDistribution(s.reference)) <= th.kld_max;
}

}  // namespace

CcuResult ccu(const AssociationMatrix& plan_a, const std::vector<int>& xi, const Scenario& s,
              const Matrix<PairCost>& costs, const CostWeights& weights, const ConstraintThresholds& th,
              const CcuOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t N = s.n_clients();
    CcuResult res;
    RepairReport& rep = res.report;
    rep.round = opt.round;

    // long-term clients that are online stay where Plan A put them
    AssociationMatrix cur(N, s.n_edges(), AssocRole::PlanB);
    for (std::size_t i = 0; i < N; ++i) {
        const EdgeId j = plan_a.edge_of(static_cast<ClientId>(i));
        if (j == kNoEdge) continue;
        if (xi[i])
            cur.set(static_cast<ClientId>(i), j);
        else
            rep.dropouts.push_back(static_cast<ClientId>(i));
    }

    long nodes = 0, candidates = 0;
    for (const auto& edge : s.edges) {
        const EdgeId j = edge.id;
        if (edge_holds(cur, xi, s, th, j)) continue;
        std::vector<ClientId> dropouts;
        for (ClientId i : plan_a.members(j))
            if (!xi[i]) dropouts.push_back(i);
        if (dropouts.empty()) continue;

        const SimilarityMatrix sim = edge_similarity(s, costs, j);
        const ClusterSet clusters = dbscan_clusters(sim, opt.psi_min, opt.p_min);
        int unrepaired = 0;
        bool holds = false;
        for (ClientId d : dropouts) {
            if (edge_holds(cur, xi, s, th, j)) {
                holds = true;
                break;
            }
            const int row = sim.index_of(d);
            const int cluster = row < 0 ? -1 : clusters.cluster_at(row);
            if (cluster < 0 || cur.load(j) >= edge.max_clients) {
                ++unrepaired;
                continue;
            }
            std::vector<std::pair<double, ClientId>> pool;
            for (ClientId c : clusters.clusters[cluster]) {
                if (!xi[c] || plan_a.selected(c) || cur.selected(c)) continue;
                pool.emplace_back(sim.psi(row, sim.index_of(c)), c);
            }
            if (pool.empty()) {
                ++unrepaired;
                continue;
            }
            std::sort(pool.begin(), pool.end(), [&](const auto& a, const auto& b) {
                if (a.first != b.first) return opt.ascending ? a.first < b.first : a.first > b.first;
                return a.second < b.second;
            });
            cur.set(pool.front().second, j);
            rep.substitutions.push_back({j, d, pool.front().second, pool.front().first});
        }
        if (holds || edge_holds(cur, xi, s, th, j)) continue;

        // Fallback: random backups for the unrepaired dropouts, then a local
        // search restricted to this edge with everything placed so far pinned.
        rep.fallback = true;
        rep.fallback_edges.push_back(j);
        std::vector<ClientId> pool;
        for (const auto& c : s.clients)
            if (xi[c.id] && !cur.selected(c.id) && !plan_a.selected(c.id) && c.reaches(j) &&
                costs(c.id, j).admissible())
                pool.push_back(c.id);
        Rng rng = make_rng(opt.seed, {kPolicyStream, static_cast<std::uint64_t>(opt.round),
                                      static_cast<std::uint64_t>(j)});
        std::vector<ClientId> shuffled = pool;
        shuffle(shuffled, rng);
        const int room = std::max(0, edge.max_clients - cur.load(j));
        const int take = std::min({unrepaired, room, static_cast<int>(shuffled.size())});
        std::vector<ClientId> backups(shuffled.begin(), shuffled.begin() + take);
        rep.backups.insert(rep.backups.end(), backups.begin(), backups.end());

        AssociationProblem p = AssociationProblem::per_round(s, costs, weights, th, opt.edge_rounds, xi,
                                                             ObjectiveMode::Cost, ConstraintMode::Deterministic);
        p.node_budget = opt.node_budget;
        for (auto& a : p.allowed) a.clear();
        for (ClientId c : pool) p.allowed[c] = {j};
        for (std::size_t i = 0; i < N; ++i) p.fixed[i] = cur.edge_of(static_cast<ClientId>(i));
        p.checked_edges.assign(s.n_edges(), false);
        p.checked_edges[j] = true;

        if (opt.log) opt.log->stage = "round " + std::to_string(opt.round) + " edge " + std::to_string(j);
        const SolverOutcome local = local_search(p, pool, backups, {opt.max_sweeps, opt.log});
        nodes += local.stats.backtrack_nodes;
        candidates += local.stats.candidates;
        for (ClientId c : pool)
            if (local.assoc(c, j)) cur.set(c, j);
    }

    const auto report = check_p0_constraints(cur, xi, s, th);
    SolverOutcome& out = res.outcome;
    out.assoc = cur;
    out.objective = objective_round(cur, xi, costs, s.edges, weights, opt.edge_rounds);
    out.feasible = report.all_ok();
    out.violation = 0.0;
    if (!out.feasible) {
        const double empty_kld = -std::log(*std::min_element(s.reference.begin(), s.reference.end()));
        for (std::size_t j = 0; j < s.n_edges(); ++j) {
            const double k = std::isfinite(report.kld[j]) ? report.kld[j] : empty_kld;
            out.violation += std::max(0.0, k - th.kld_max);
            out.violation += std::max(0.0, th.d_min - static_cast<double>(report.data[j])) / th.d_min;
        }
        if (!report.structural_ok()) out.violation += 1.0;
    }
    out.mode = ConstraintMode::Deterministic;
    out.checked_edges.assign(s.n_edges(), true);
    out.stats.backtrack_nodes = nodes;
    out.stats.candidates = candidates;
    out.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.feasible = out.feasible;
    return res;
}

}  // namespace shfl
