#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shfl/core.hpp"

namespace shfl {

struct ClientProfile {
    ClientId id = 0;
    std::vector<long> label_counts;  // datapoints per label
    long data_size = 0;              // sum of label_counts
    double cpu_freq = 1e9;           // cycles / s
    double cycles_per_datapoint = 50.0;
    double capacitance = 1e-28;
    double tx_power = 0.5;  // W
    double batch_fraction = 0.1;
    double online_prob = 1.0;
    std::vector<EdgeId> reachable_edges;

    /// Throws DomainError naming the first violated invariant.
    void validate(std::size_t n_edges) const;
    bool reaches(EdgeId j) const;
};

struct EdgeProfile {
    EdgeId id = 0;
    double bandwidth_per_client = 1e6;  // Hz
    int max_clients = 1;
    double backhaul_delay = 0.0;   // s
    double backhaul_energy = 0.0;  // J

    void validate() const;
};

struct ChannelState {
    Matrix<double> gain;  // clients x edges
    double noise_psd = 3.981071705534986e-21;  // W/Hz (-174 dBm/Hz)
    double model_bits = 1e6;

    void validate() const;
};

/// Weights of the per-round objective: lambda_t * delay + lambda_e * energy,
/// with lambda_c rewarding long-term continuity in the pre-decision stage.
struct CostWeights {
    double lambda_t = 0.5;
    double lambda_e = 0.5;
    double lambda_c = 0.1;
};

struct ConstraintThresholds {
    double kld_max = 0.2;
    double d_min = 2500.0;
    double delta_k = 0.05;
    double delta_d = 250.0;
    double delta_risk = 0.2;    // tolerated KLD violation probability
    double epsilon_risk = 0.2;  // tolerated data-size violation probability

    void validate() const;
};

/// Full experiment configuration. Defaults reproduce the MNIST-style
/// setting: 93 clients, 4 edge servers, 1-3 labels of 10 per client.
struct ScenarioConfig {
    // population
    int n_clients = 93;
    int n_edges = 4;
    int n_labels = 10;
    int labels_per_client_min = 1;
    int labels_per_client_max = 3;
    long data_size_min = 255;
    long data_size_max = 1013;

    // client hardware
    double cpu_freq_min = 1e9;
    double cpu_freq_max = 1e10;
    double cycles_min = 30.0;  // cycles per datapoint
    double cycles_max = 100.0;
    double capacitance = 1e-28;
    double tx_power_min = 0.2;
    double tx_power_max = 0.8;
    double batch_fraction = 0.1;
    double online_prob_min = 0.5;
    double online_prob_max = 1.0;

    // edge servers and radio
    double bandwidth_hz = 1e6;
    int max_clients_min = 8;
    int max_clients_max = 12;
    double backhaul_delay_min = 0.16;
    double backhaul_delay_max = 0.20;
    double backhaul_energy_min = 0.1;
    double backhaul_energy_max = 0.5;
    double noise_psd_w_per_hz = 3.981071705534986e-21;
    double model_bits = 1e6;
    double gain_min = 1e-9;
    double gain_max = 1e-8;
    bool dynamic_channels = false;

    // geometry
    double area_m = 500.0;
    double coverage_radius_m = 250.0;

    CostWeights weights;
    ConstraintThresholds thresholds;

    // training schedule
    int local_steps = 5;
    int edge_rounds = 3;
    int global_rounds = 30;

    // clustering for real-time repair
    double psi_min = 0.99;
    int p_min_points = 2;
    bool substitute_ascending = false;

    // solver knobs
    int max_sweeps = 50;
    long backtrack_budget = 1000000;
    int init_attempts = 20;

    // participation estimation and re-planning
    int window_len = 10;
    int window_count = 5;
    int replan_period = 0;  // 0: plan once before training

    // synthetic learning task
    int feature_dim = 8;
    double class_separation = 3.0;
    int test_per_label = 100;
    double learning_rate = 0.1;
    double target_accuracy = 0.8;

    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

struct Scenario {
    std::vector<ClientProfile> clients;
    std::vector<EdgeProfile> edges;
    ChannelState channel;
    int n_labels = 0;
    std::vector<double> reference;  // reference label distribution Q

    std::size_t n_clients() const noexcept { return clients.size(); }
    std::size_t n_edges() const noexcept { return edges.size(); }

    /// Clients that can reach edge j.
    std::vector<ClientId> covered_by(EdgeId j) const;
    void validate() const;
};

/// Pure function of the config (including its seed).
Scenario generate_scenario(const ScenarioConfig& config);

/// Draws fresh channel gains for reachable pairs in [gain_min, gain_max].
void resample_channels(Scenario& scenario, const ScenarioConfig& config, std::uint64_t seed);

/// Keyed-text configuration: one `key = value` per line, `#` starts a
/// comment. Omitted keys keep their defaults.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Renders every key, suitable for parse_config round trips and manifests.
std::string format_config(const ScenarioConfig& config);

/// Stable JSON rendering of a scenario (used for determinism checks and dumps).
std::string scenario_to_json(const Scenario& scenario);

}  // namespace shfl
