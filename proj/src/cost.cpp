#include "shfl/cost.hpp"

#include <algorithm>
#include <cmath>

namespace shfl {

ComputeCost local_compute_cost(const ClientProfile& c) {
    const double cycles = c.cycles_per_datapoint * c.batch_fraction * static_cast<double>(c.data_size);
    return {cycles / c.cpu_freq, c.capacitance * c.cpu_freq * c.cpu_freq * cycles};
}

UplinkCost uplink_cost(const ClientProfile& c, const EdgeProfile& e, const ChannelState& ch) {
    const double h = ch.gain(c.id, e.id);
    if (h < 0) throw DomainError("negative channel gain");
    const double snr = c.tx_power * h / (ch.noise_psd * e.bandwidth_per_client);
    const double rate = e.bandwidth_per_client * std::log2(1.0 + snr);
    if (!(rate > 0)) return {0.0, kInfiniteCost, kInfiniteCost};
    const double t = ch.model_bits / rate;
    return {rate, t, c.tx_power * t};
}

PairCost pair_cost(const ClientProfile& c, const EdgeProfile& e, const ChannelState& ch, int local_steps) {
    if (local_steps < 1) throw DomainError("local_steps must be >= 1");
    const UplinkCost up = uplink_cost(c, e, ch);
    if (is_infinite_cost(up.time)) return {kInfiniteCost, kInfiniteCost};
    const ComputeCost cmp = local_compute_cost(c);
    return {local_steps * cmp.time + up.time, local_steps * cmp.energy + up.energy};
}

Matrix<PairCost> pair_cost_table(const Scenario& s, int local_steps) {
    Matrix<PairCost> t(s.n_clients(), s.n_edges(), PairCost{kInfiniteCost, kInfiniteCost});
    for (const auto& c : s.clients)
        for (EdgeId j : c.reachable_edges) t(c.id, j) = pair_cost(c, s.edges[j], s.channel, local_steps);
    return t;
}

RoundCost round_cost(const AssociationMatrix& assoc, const std::vector<int>& xi, const Matrix<PairCost>& costs,
                     const std::vector<EdgeProfile>& edges, int edge_rounds) {
    RoundCost total;
    for (std::size_t j = 0; j < assoc.n_edges(); ++j) {
        double slowest = 0.0;
        double energy = 0.0;
        for (std::size_t i = 0; i < assoc.n_clients(); ++i) {
            if (!assoc(static_cast<ClientId>(i), static_cast<EdgeId>(j)) || !xi[i]) continue;
            const PairCost& pc = costs(i, j);
            if (!pc.admissible()) return {kInfiniteCost, kInfiniteCost};
            slowest = std::max(slowest, pc.delay);
            energy += pc.energy;
        }
        total.delay = std::max(total.delay, edge_rounds * slowest + edges[j].backhaul_delay);
        total.energy += edge_rounds * energy + edges[j].backhaul_energy;
    }
    return total;
}

double continuity(const AssociationMatrix& assoc, const std::vector<double>& probs) {
    double log_sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < assoc.n_clients(); ++i) {
        if (!assoc.selected(static_cast<ClientId>(i))) continue;
        log_sum += std::log(probs[i]);
        ++n;
    }
    return n == 0 ? 0.0 : std::exp(log_sum / n);
}

double continuity(const AssociationMatrix& assoc, const std::vector<ClientProfile>& clients) {
    std::vector<double> p;
    p.reserve(clients.size());
    for (const auto& c : clients) p.push_back(c.online_prob);
    return continuity(assoc, p);
}

double weighted_cost(const CostWeights& w, const RoundCost& c) {
    if (is_infinite_cost(c.delay) || is_infinite_cost(c.energy)) return kInfiniteCost;
    return w.lambda_t * c.delay + w.lambda_e * c.energy;
}

double objective_plan_a(const AssociationMatrix& assoc, const Matrix<PairCost>& costs, const std::vector<double>& probs,
                        const std::vector<EdgeProfile>& edges, const CostWeights& weights, int edge_rounds) {
    const std::vector<int> everyone(assoc.n_clients(), 1);
    const double base = weighted_cost(weights, round_cost(assoc, everyone, costs, edges, edge_rounds));
    if (is_infinite_cost(base)) return kInfiniteCost;
    return base - weights.lambda_c * continuity(assoc, probs);
}

double objective_plan_a(const AssociationMatrix& assoc, const Scenario& s, const CostWeights& weights,
                        int local_steps, int edge_rounds) {
    std::vector<double> p;
    for (const auto& c : s.clients) p.push_back(c.online_prob);
    return objective_plan_a(assoc, pair_cost_table(s, local_steps), p, s.edges, weights, edge_rounds);
}

double objective_round(const AssociationMatrix& assoc, const std::vector<int>& xi, const Matrix<PairCost>& costs,
                       const std::vector<EdgeProfile>& edges, const CostWeights& weights, int edge_rounds) {
    return weighted_cost(weights, round_cost(assoc, xi, costs, edges, edge_rounds));
}

FeatureVector feature_vector(const ClientProfile& c, const EdgeProfile& e, const ChannelState& ch, int local_steps) {
    if (!c.reaches(e.id)) throw DomainError("feature_vector: edge not reachable by client");
    const PairCost pc = pair_cost(c, e, ch, local_steps);
    return {static_cast<double>(c.data_size), pc.delay, pc.energy};
}

}  // namespace shfl
