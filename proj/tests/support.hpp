// Test-only reference code. Nothing here calls the library's constraint or
// cost routines: formulas are re-derived directly so the checks are
// independent of the implementation under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "shfl/association.hpp"
#include "shfl/rng.hpp"
#include "shfl/scenario.hpp"

namespace ref {

using shfl::ClientId;
using shfl::EdgeId;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- formulas

inline double u(double r, double q) { return r > 0 ? r * std::log(r / q) : 0.0; }

/// KLD of the pooled label counts against q; +inf for zero mass.
inline double kld_of_counts(const std::vector<double>& counts, const std::vector<double>& q) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0) return kInf;
    double k = 0.0;
    for (std::size_t h = 0; h < counts.size(); ++h) k += u(counts[h] / total, q[h]);
    return k;
}

/// The piecewise G(h), branch by branch.
inline double piecewise_g(const std::vector<double>& ratios, double q) {
    const double m = *std::min_element(ratios.begin(), ratios.end());
    const double M = *std::max_element(ratios.begin(), ratios.end());
    const double turn = q / std::exp(1.0);
    if (turn >= M) return u(m, q);
    if (turn <= m) return u(M, q);
    return std::max(u(m, q), u(M, q));
}

inline std::vector<double> label_ratios(const shfl::ClientProfile& c) {
    std::vector<double> r;
    for (long y : c.label_counts) r.push_back(static_cast<double>(y) / static_cast<double>(c.data_size));
    return r;
}

inline double markov_bound(const std::vector<ClientId>& members, const shfl::Scenario& s,
                           const std::vector<double>& probs, const shfl::ConstraintThresholds& th) {
    if (members.empty()) return 1.0;
    double off = 1.0;
    for (ClientId i : members) off *= 1.0 - probs[i];
    double g = 0.0;
    for (int h = 0; h < s.n_labels; ++h) {
        std::vector<double> r;
        for (ClientId i : members) r.push_back(label_ratios(s.clients[i])[h]);
        g += piecewise_g(r, s.reference[h]);
    }
    return off + (1.0 - off) * g / (th.kld_max - th.delta_k);
}

/// Enumerates the 2^k online patterns of `members`.
/// kind 0: Pr(KLD > kld_max - delta_k, empty counts); kind 1: Pr(D < d_min + delta_d).
inline double exact_violation(const std::vector<ClientId>& members, const shfl::Scenario& s,
                              const std::vector<double>& probs, const shfl::ConstraintThresholds& th, int kind) {
    const std::size_t k = members.size();
    double total = 0.0;
    for (unsigned long mask = 0; mask < (1UL << k); ++mask) {
        double w = 1.0;
        std::vector<double> counts(static_cast<std::size_t>(s.n_labels), 0.0);
        double data = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            const ClientId i = members[b];
            if (mask >> b & 1UL) {
                w *= probs[i];
                for (int h = 0; h < s.n_labels; ++h) counts[h] += static_cast<double>(s.clients[i].label_counts[h]);
                data += static_cast<double>(s.clients[i].data_size);
            } else {
                w *= 1.0 - probs[i];
            }
        }
        const bool bad = kind == 0 ? kld_of_counts(counts, s.reference) > th.kld_max - th.delta_k
                                   : data < th.d_min + th.delta_d;
        if (bad) total += w;
    }
    return total;
}

// ----------------------------------------------------------------- costs

struct Pair {
    double delay = kInf, energy = kInf;
};

inline Pair pair_cost(const shfl::Scenario& s, ClientId i, EdgeId j, int local_steps) {
    const auto& c = s.clients[i];
    const auto& e = s.edges[j];
    const double h = s.channel.gain(i, j);
    if (h <= 0) return {};
    const double work = c.cycles_per_datapoint * c.batch_fraction * static_cast<double>(c.data_size);
    const double t_cmp = work / c.cpu_freq;
    const double e_cmp = c.capacitance * c.cpu_freq * c.cpu_freq * work;
    const double B = e.bandwidth_per_client;
    const double rate = B * std::log2(1.0 + c.tx_power * h / (s.channel.noise_psd * B));
    const double t_com = s.channel.model_bits / rate;
    return {local_steps * t_cmp + t_com, local_steps * e_cmp + c.tx_power * t_com};
}

/// lambda_t * T + lambda_e * E of `edge_of` under participation xi.
inline double round_objective(const shfl::Scenario& s, const std::vector<EdgeId>& edge_of, const std::vector<int>& xi,
                              const shfl::CostWeights& w, int local_steps, int edge_rounds) {
    double T = 0.0, E = 0.0;
    for (const auto& e : s.edges) {
        double slow = 0.0, energy = 0.0;
        for (std::size_t i = 0; i < edge_of.size(); ++i) {
            if (edge_of[i] != e.id || !xi[i]) continue;
            const Pair p = pair_cost(s, static_cast<ClientId>(i), e.id, local_steps);
            slow = std::max(slow, p.delay);
            energy += p.energy;
        }
        T = std::max(T, edge_rounds * slow + e.backhaul_delay);
        E += edge_rounds * energy + e.backhaul_energy;
    }
    return w.lambda_t * T + w.lambda_e * E;
}

inline double geo_mean(const std::vector<EdgeId>& edge_of, const std::vector<double>& probs) {
    double log_sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < edge_of.size(); ++i)
        if (edge_of[i] != shfl::kNoEdge) {
            log_sum += std::log(probs[i]);
            ++n;
        }
    return n == 0 ? 0.0 : std::exp(log_sum / n);
}

// --------------------------------------------------------------- checker

enum class Mode { Chance, Deterministic, DataOnly };

struct Verdict {
    bool ok = true;
    std::string why;
    void fail(const std::string& w) {
        if (ok) why = w;
        ok = false;
    }
};

/// Re-checks a claimed-feasible association. `xi` lists who is online (all
/// ones for the pre-decision stage); `probs` is only read in Chance mode.
inline Verdict check(const shfl::AssociationMatrix& a, const shfl::Scenario& s, const std::vector<int>& xi,
                     const std::vector<double>& probs, const shfl::ConstraintThresholds& th, Mode mode,
                     const std::vector<bool>& checked, int local_steps) {
    Verdict v;
    const std::size_t N = s.n_clients(), S = s.n_edges();
    if (a.n_clients() != N || a.n_edges() != S) {
        v.fail("shape");
        return v;
    }
    std::vector<std::vector<ClientId>> members(S);
    for (std::size_t i = 0; i < N; ++i) {
        int count = 0;
        for (std::size_t j = 0; j < S; ++j) {
            if (!a(static_cast<ClientId>(i), static_cast<EdgeId>(j))) continue;
            ++count;
            members[j].push_back(static_cast<ClientId>(i));
            const auto& r = s.clients[i].reachable_edges;
            if (std::find(r.begin(), r.end(), static_cast<EdgeId>(j)) == r.end())
                v.fail("client " + std::to_string(i) + " on unreachable edge");
            if (!std::isfinite(pair_cost(s, static_cast<ClientId>(i), static_cast<EdgeId>(j), local_steps).delay))
                v.fail("client " + std::to_string(i) + " on zero-gain edge");
            if (!xi[i]) v.fail("offline client " + std::to_string(i) + " selected");
        }
        if (count > 1) v.fail("client " + std::to_string(i) + " on several edges");
    }
    for (std::size_t j = 0; j < S; ++j) {
        if (static_cast<int>(members[j].size()) > s.edges[j].max_clients)
            v.fail("edge " + std::to_string(j) + " over capacity");
        if (!checked[j]) continue;
        const std::string tag = "edge " + std::to_string(j) + ": ";
        std::vector<double> counts(static_cast<std::size_t>(s.n_labels), 0.0);
        double data = 0.0, expected = 0.0;
        for (ClientId i : members[j]) {
            for (int h = 0; h < s.n_labels; ++h) counts[h] += static_cast<double>(s.clients[i].label_counts[h]);
            data += static_cast<double>(s.clients[i].data_size);
            if (mode == Mode::Chance) expected += probs[i] * static_cast<double>(s.clients[i].data_size);
        }
        switch (mode) {
            case Mode::Chance:
                if (markov_bound(members[j], s, probs, th) > th.delta_risk) v.fail(tag + "KLD bound");
                if (expected < (th.d_min + th.delta_d) * (1.0 - th.epsilon_risk)) v.fail(tag + "expected data");
                break;
            case Mode::Deterministic:
                if (!(kld_of_counts(counts, s.reference) <= th.kld_max)) v.fail(tag + "KLD");
                if (data < th.d_min) v.fail(tag + "data");
                break;
            case Mode::DataOnly:
                if (data < th.d_min) v.fail(tag + "data");
                break;
        }
    }
    return v;
}

// ------------------------------------------------------------- instances

struct MicroSpec {
    int n_clients = 8;
    int n_edges = 2;
    int n_labels = 4;
    int labels_min = 1, labels_max = 2;
    long data_min = 100, data_max = 300;
    int cap_min = 2, cap_max = 5;
    double reach_prob = 0.7;  // chance of each extra reachable edge
    double p_min = 0.5, p_max = 1.0;
    bool balanced_labels = false;  // every client holds every label in similar amounts
};

/// Random small scenario built directly, independent of generate_scenario.
inline shfl::Scenario micro_scenario(shfl::Rng& rng, const MicroSpec& m) {
    shfl::Scenario s;
    s.n_labels = m.n_labels;
    s.reference.assign(static_cast<std::size_t>(m.n_labels), 1.0 / m.n_labels);
    for (int j = 0; j < m.n_edges; ++j) {
        shfl::EdgeProfile e;
        e.id = j;
        e.bandwidth_per_client = 1e6;
        e.max_clients = static_cast<int>(shfl::uniform_int(rng, m.cap_min, m.cap_max));
        e.backhaul_delay = shfl::uniform(rng, 0.16, 0.2);
        e.backhaul_energy = shfl::uniform(rng, 0.1, 0.5);
        s.edges.push_back(e);
    }
    s.channel.gain = shfl::Matrix<double>(static_cast<std::size_t>(m.n_clients), static_cast<std::size_t>(m.n_edges));
    for (int i = 0; i < m.n_clients; ++i) {
        shfl::ClientProfile c;
        c.id = i;
        c.label_counts.assign(static_cast<std::size_t>(m.n_labels), 0);
        if (m.balanced_labels) {
            for (auto& y : c.label_counts) y = shfl::uniform_int(rng, m.data_min, m.data_max) / m.n_labels + 1;
        } else {
            const int k = static_cast<int>(shfl::uniform_int(rng, m.labels_min, m.labels_max));
            std::vector<int> labels(static_cast<std::size_t>(m.n_labels));
            for (int h = 0; h < m.n_labels; ++h) labels[h] = h;
            shfl::shuffle(labels, rng);
            for (int t = 0; t < k; ++t)
                c.label_counts[labels[t]] = shfl::uniform_int(rng, m.data_min, m.data_max) / k + 1;
        }
        c.data_size = 0;
        for (long y : c.label_counts) c.data_size += y;
        c.cpu_freq = shfl::uniform(rng, 1e9, 1e10);
        c.cycles_per_datapoint = shfl::uniform(rng, 30, 100);
        c.capacitance = 1e-28;
        c.tx_power = shfl::uniform(rng, 0.2, 0.8);
        c.batch_fraction = 0.1;
        c.online_prob = shfl::uniform(rng, m.p_min, m.p_max);
        const auto home = static_cast<EdgeId>(shfl::uniform_int(rng, 0, m.n_edges - 1));
        for (int j = 0; j < m.n_edges; ++j)
            if (j == home || shfl::uniform01(rng) < m.reach_prob) c.reachable_edges.push_back(j);
        for (EdgeId j : c.reachable_edges) s.channel.gain(i, j) = shfl::uniform(rng, 1e-9, 1e-8);
        s.clients.push_back(std::move(c));
    }
    s.validate();
    return s;
}

/// Hand-specified scenario: identical hardware and channels, so clients only
/// differ by data, reachability and online probability.
inline shfl::Scenario tiny_scenario(const std::vector<std::vector<long>>& counts,
                                    const std::vector<std::vector<EdgeId>>& reach, const std::vector<int>& caps,
                                    const std::vector<double>& probs) {
    shfl::Scenario s;
    s.n_labels = static_cast<int>(counts.front().size());
    s.reference.assign(counts.front().size(), 1.0 / static_cast<double>(counts.front().size()));
    for (std::size_t j = 0; j < caps.size(); ++j) {
        shfl::EdgeProfile e;
        e.id = static_cast<EdgeId>(j);
        e.max_clients = caps[j];
        e.backhaul_delay = 0.1;
        e.backhaul_energy = 0.2;
        s.edges.push_back(e);
    }
    s.channel.gain = shfl::Matrix<double>(counts.size(), caps.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        shfl::ClientProfile c;
        c.id = static_cast<ClientId>(i);
        c.label_counts = counts[i];
        for (long y : counts[i]) c.data_size += y;
        c.cpu_freq = 5e9;
        c.cycles_per_datapoint = 50;
        c.tx_power = 0.5;
        c.online_prob = probs[i];
        c.reachable_edges = reach[i];
        for (EdgeId j : reach[i]) s.channel.gain(i, j) = 5e-9;
        s.clients.push_back(std::move(c));
    }
    s.validate();
    return s;
}

inline std::vector<int> sample_xi(shfl::Rng& rng, const shfl::Scenario& s) {
    std::vector<int> xi;
    for (const auto& c : s.clients) xi.push_back(shfl::uniform01(rng) < c.online_prob ? 1 : 0);
    return xi;
}

}  // namespace ref
