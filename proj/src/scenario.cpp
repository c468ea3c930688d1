#include "shfl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "shfl/rng.hpp"

namespace shfl {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace

void ClientProfile::validate(std::size_t n_edges) const {
    const std::string who = "client " + std::to_string(id) + ": ";
    long total = 0;
    for (long y : label_counts) {
        require(y >= 0, who + "negative label count");
        total += y;
    }
    require(total == data_size, who + "data_size differs from the label count sum");
    require(online_prob > 0.0 && online_prob <= 1.0, who + "online_prob outside (0,1]");
    require(batch_fraction > 0.0 && batch_fraction <= 1.0, who + "batch_fraction outside (0,1]");
    require(cpu_freq > 0 && cycles_per_datapoint > 0 && capacitance > 0 && tx_power > 0,
            who + "physical parameters must be positive");
    require(!reachable_edges.empty(), who + "no reachable edge");
    for (EdgeId j : reachable_edges)
        require(j >= 0 && static_cast<std::size_t>(j) < n_edges, who + "reachable edge out of range");
}

bool ClientProfile::reaches(EdgeId j) const {
    return std::find(reachable_edges.begin(), reachable_edges.end(), j) != reachable_edges.end();
}

void EdgeProfile::validate() const {
    const std::string who = "edge " + std::to_string(id) + ": ";
    require(max_clients >= 1, who + "max_clients must be >= 1");
    require(bandwidth_per_client > 0, who + "bandwidth must be positive");
    require(backhaul_delay >= 0 && backhaul_energy >= 0, who + "backhaul costs must be non-negative");
}

void ChannelState::validate() const {
    for (double g : gain.data()) require(g >= 0.0, "channel gain must be non-negative");
    require(noise_psd > 0, "noise_psd must be positive");
    require(model_bits > 0, "model_bits must be positive");
}

void ConstraintThresholds::validate() const {
    if (!(delta_k > 0)) throw ConfigError("delta_k", "must be positive");
    if (!(kld_max > delta_k)) throw ConfigError("kld_max", "must exceed delta_k");
    if (!(d_min > 0)) throw ConfigError("d_min", "must be positive");
    if (!(delta_d > 0)) throw ConfigError("delta_d", "must be positive");
    if (!(delta_risk > 0 && delta_risk < 1)) throw ConfigError("delta_risk", "must lie in (0,1)");
    if (!(epsilon_risk > 0 && epsilon_risk < 1)) throw ConfigError("epsilon_risk", "must lie in (0,1)");
}

void ScenarioConfig::validate() const {
    auto need = [](bool ok, const char* key, const char* msg) {
        if (!ok) throw ConfigError(key, msg);
    };
    need(n_clients >= 1, "n_clients", "must be >= 1");
    need(n_edges >= 1, "n_edges", "must be >= 1");
    need(n_labels >= 1, "n_labels", "must be >= 1");
    need(labels_per_client_min >= 1, "labels_per_client_min", "must be >= 1");
    need(labels_per_client_max >= labels_per_client_min, "labels_per_client_max", "empty range");
    need(labels_per_client_max <= n_labels, "labels_per_client_max", "exceeds n_labels");
    need(data_size_min >= labels_per_client_max, "data_size_min", "must cover one datapoint per label");
    need(data_size_max >= data_size_min, "data_size_max", "empty range");
    need(cpu_freq_min > 0, "cpu_freq_min", "must be positive");
    need(cpu_freq_max >= cpu_freq_min, "cpu_freq_max", "empty range");
    need(cycles_min > 0, "cycles_min", "must be positive");
    need(cycles_max >= cycles_min, "cycles_max", "empty range");
    need(capacitance > 0, "capacitance", "must be positive");
    need(tx_power_min > 0, "tx_power_min", "must be positive");
    need(tx_power_max >= tx_power_min, "tx_power_max", "empty range");
    need(batch_fraction > 0 && batch_fraction <= 1, "batch_fraction", "must lie in (0,1]");
    need(online_prob_min > 0 && online_prob_min <= 1, "online_prob_min", "must lie in (0,1]");
    need(online_prob_max >= online_prob_min && online_prob_max <= 1, "online_prob_max",
         "must lie in [online_prob_min, 1]");
    need(bandwidth_hz > 0, "bandwidth_hz", "must be positive");
    need(max_clients_min >= 1, "max_clients_min", "max_clients must be >= 1");
    need(max_clients_max >= max_clients_min, "max_clients_max", "empty range");
    need(backhaul_delay_min >= 0, "backhaul_delay_min", "must be non-negative");
    need(backhaul_delay_max >= backhaul_delay_min, "backhaul_delay_max", "empty range");
    need(backhaul_energy_min >= 0, "backhaul_energy_min", "must be non-negative");
    need(backhaul_energy_max >= backhaul_energy_min, "backhaul_energy_max", "empty range");
    need(noise_psd_w_per_hz > 0, "noise_psd_w_per_hz", "must be positive");
    need(model_bits > 0, "model_bits", "must be positive");
    need(gain_min >= 0, "gain_min", "must be non-negative");
    need(gain_max >= gain_min, "gain_max", "empty range");
    need(area_m > 0, "area_m", "must be positive");
    need(coverage_radius_m > 0, "coverage_radius_m", "must be positive");
    need(weights.lambda_t >= 0, "lambda_t", "must be non-negative");
    need(weights.lambda_e >= 0, "lambda_e", "must be non-negative");
    need(weights.lambda_c >= 0, "lambda_c", "must be non-negative");
    thresholds.validate();
    need(local_steps >= 1, "local_steps", "must be >= 1");
    need(edge_rounds >= 1, "edge_rounds", "must be >= 1");
    need(global_rounds >= 0, "global_rounds", "must be >= 0");
    need(psi_min >= -1 && psi_min <= 1, "psi_min", "must lie in [-1,1]");
    need(p_min_points >= 1, "p_min_points", "must be >= 1");
    need(max_sweeps >= 1, "max_sweeps", "must be >= 1");
    need(backtrack_budget >= 1, "backtrack_budget", "must be >= 1");
    need(init_attempts >= 1, "init_attempts", "must be >= 1");
    need(window_len >= 1, "window_len", "must be >= 1");
    need(window_count >= 1, "window_count", "must be >= 1");
    need(replan_period >= 0, "replan_period", "must be >= 0");
    need(feature_dim >= 1, "feature_dim", "must be >= 1");
    need(class_separation >= 0, "class_separation", "must be non-negative");
    need(test_per_label >= 1, "test_per_label", "must be >= 1");
    need(learning_rate >= 0, "learning_rate", "must be non-negative");
    need(target_accuracy > 0 && target_accuracy <= 1, "target_accuracy", "must lie in (0,1]");
}

std::vector<ClientId> Scenario::covered_by(EdgeId j) const {
    std::vector<ClientId> out;
    for (const auto& c : clients)
        if (c.reaches(j)) out.push_back(c.id);
    return out;
}

void Scenario::validate() const {
    require(n_labels >= 1, "scenario needs at least one label");
    require(reference.size() == static_cast<std::size_t>(n_labels), "reference size differs from n_labels");
    for (const auto& c : clients) {
        require(c.label_counts.size() == static_cast<std::size_t>(n_labels), "label_counts size mismatch");
        c.validate(edges.size());
    }
    for (const auto& e : edges) e.validate();
    require(channel.gain.rows() == clients.size() && channel.gain.cols() == edges.size(),
            "channel gain matrix has the wrong shape");
    channel.validate();
}

namespace {

struct Point {
    double x, y;
};

std::vector<long> split_into_parts(Rng& rng, long total, int parts) {
    // k-1 distinct cut points in [1, total-1] give a uniform composition
    // with every part >= 1.
    std::set<long> cuts;
    while (static_cast<int>(cuts.size()) < parts - 1) cuts.insert(uniform_int(rng, 1, total - 1));
    std::vector<long> out;
    long prev = 0;
    for (long c : cuts) {
        out.push_back(c - prev);
        prev = c;
    }
    out.push_back(total - prev);
    return out;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& config) {
    config.validate();
    Rng rng = make_rng(config.seed, {kScenarioStream});

    Scenario s;
    s.n_labels = config.n_labels;
    s.reference.assign(config.n_labels, 1.0 / config.n_labels);

    std::vector<Point> edge_pos(config.n_edges);
    for (int j = 0; j < config.n_edges; ++j) {
        EdgeProfile e;
        e.id = j;
        e.bandwidth_per_client = config.bandwidth_hz;
        e.max_clients = static_cast<int>(uniform_int(rng, config.max_clients_min, config.max_clients_max));
        e.backhaul_delay = uniform(rng, config.backhaul_delay_min, config.backhaul_delay_max);
        e.backhaul_energy = uniform(rng, config.backhaul_energy_min, config.backhaul_energy_max);
        edge_pos[j] = {uniform(rng, 0, config.area_m), uniform(rng, 0, config.area_m)};
        s.edges.push_back(e);
    }

    // Label coverage: the first min(N, Z) clients in a shuffled order each own
    // a distinct label, so the pooled data covers every label when N >= Z.
    std::vector<int> label_perm(config.n_labels);
    std::iota(label_perm.begin(), label_perm.end(), 0);
    shuffle(label_perm, rng);
    std::vector<int> client_perm(config.n_clients);
    std::iota(client_perm.begin(), client_perm.end(), 0);
    shuffle(client_perm, rng);
    std::vector<int> forced_label(config.n_clients, -1);
    for (int k = 0; k < std::min(config.n_clients, config.n_labels); ++k)
        forced_label[client_perm[k]] = label_perm[k];

    for (int i = 0; i < config.n_clients; ++i) {
        ClientProfile c;
        c.id = i;
        const int k = static_cast<int>(uniform_int(rng, config.labels_per_client_min, config.labels_per_client_max));
        std::set<int> labels;
        if (forced_label[i] >= 0) labels.insert(forced_label[i]);
        while (static_cast<int>(labels.size()) < k)
            labels.insert(static_cast<int>(uniform_int(rng, 0, config.n_labels - 1)));
        c.data_size = uniform_int(rng, config.data_size_min, config.data_size_max);
        const auto parts = split_into_parts(rng, c.data_size, k);
        c.label_counts.assign(config.n_labels, 0);
        std::size_t p = 0;
        for (int h : labels) c.label_counts[h] = parts[p++];

        c.cpu_freq = uniform(rng, config.cpu_freq_min, config.cpu_freq_max);
        c.cycles_per_datapoint = uniform(rng, config.cycles_min, config.cycles_max);
        c.capacitance = config.capacitance;
        c.tx_power = uniform(rng, config.tx_power_min, config.tx_power_max);
        c.batch_fraction = config.batch_fraction;
        c.online_prob = config.online_prob_max > config.online_prob_min
                            ? uniform(rng, config.online_prob_min, config.online_prob_max)
                            : config.online_prob_min;

        const Point pos{uniform(rng, 0, config.area_m), uniform(rng, 0, config.area_m)};
        int nearest = 0;
        double nearest_d = INFINITY;
        for (int j = 0; j < config.n_edges; ++j) {
            const double d = std::hypot(pos.x - edge_pos[j].x, pos.y - edge_pos[j].y);
            if (d <= config.coverage_radius_m) c.reachable_edges.push_back(j);
            if (d < nearest_d) {
                nearest_d = d;
                nearest = j;
            }
        }
        // out-of-coverage clients attach to their nearest edge
        if (c.reachable_edges.empty()) c.reachable_edges.push_back(nearest);
        s.clients.push_back(std::move(c));
    }

    s.channel.noise_psd = config.noise_psd_w_per_hz;
    s.channel.model_bits = config.model_bits;
    resample_channels(s, config, derive_seed(config.seed, {kChannelStream}));
    s.validate();
    return s;
}

void resample_channels(Scenario& scenario, const ScenarioConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    scenario.channel.gain = Matrix<double>(scenario.n_clients(), scenario.n_edges(), 0.0);
    for (const auto& c : scenario.clients)
        for (EdgeId j : c.reachable_edges)
            scenario.channel.gain(c.id, j) = uniform(rng, config.gain_min, config.gain_max);
}

// ---------------------------------------------------------------------------
// keyed-text configuration

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
        throw ConfigError(key, "expected a real number, got '" + v + "'");
    return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x != std::floor(x) || std::fabs(x) > 9.0e15) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return static_cast<long long>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::string render(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

struct Field {
    const char* key;
    void (*set)(ScenarioConfig&, const std::string& key, const std::string& value);
    std::string (*get)(const ScenarioConfig&);
};

// One accessor per key; the macro keeps the table readable.
#define SHFL_REAL(name, member)                                                                           \
    Field {                                                                                               \
        name, [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }, \
            [](const ScenarioConfig& c) { return render(c.member); }                                      \
    }
#define SHFL_INT(name, member)                                                                             \
    Field {                                                                                                \
        name,                                                                                              \
            [](ScenarioConfig& c, const std::string& k, const std::string& v) {                            \
                c.member = static_cast<decltype(c.member)>(parse_integer(k, v));                           \
            },                                                                                             \
            [](const ScenarioConfig& c) { return std::to_string(c.member); }                               \
    }
#define SHFL_BOOL(name, member)                                                                           \
    Field {                                                                                               \
        name, [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }, \
            [](const ScenarioConfig& c) { return std::string(c.member ? "true" : "false"); }              \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        SHFL_INT("n_clients", n_clients),
        SHFL_INT("n_edges", n_edges),
        SHFL_INT("n_labels", n_labels),
        SHFL_INT("labels_per_client_min", labels_per_client_min),
        SHFL_INT("labels_per_client_max", labels_per_client_max),
        SHFL_INT("data_size_min", data_size_min),
        SHFL_INT("data_size_max", data_size_max),
        SHFL_REAL("cpu_freq_min", cpu_freq_min),
        SHFL_REAL("cpu_freq_max", cpu_freq_max),
        SHFL_REAL("cycles_min", cycles_min),
        SHFL_REAL("cycles_max", cycles_max),
        SHFL_REAL("capacitance", capacitance),
        SHFL_REAL("tx_power_min", tx_power_min),
        SHFL_REAL("tx_power_max", tx_power_max),
        SHFL_REAL("batch_fraction", batch_fraction),
        SHFL_REAL("online_prob_min", online_prob_min),
        SHFL_REAL("online_prob_max", online_prob_max),
        SHFL_REAL("bandwidth_hz", bandwidth_hz),
        SHFL_INT("max_clients_min", max_clients_min),
        SHFL_INT("max_clients_max", max_clients_max),
        SHFL_REAL("backhaul_delay_min", backhaul_delay_min),
        SHFL_REAL("backhaul_delay_max", backhaul_delay_max),
        SHFL_REAL("backhaul_energy_min", backhaul_energy_min),
        SHFL_REAL("backhaul_energy_max", backhaul_energy_max),
        SHFL_REAL("noise_psd_w_per_hz", noise_psd_w_per_hz),
        SHFL_REAL("model_bits", model_bits),
        SHFL_REAL("gain_min", gain_min),
        SHFL_REAL("gain_max", gain_max),
        SHFL_BOOL("dynamic_channels", dynamic_channels),
        SHFL_REAL("area_m", area_m),
        SHFL_REAL("coverage_radius_m", coverage_radius_m),
        SHFL_REAL("lambda_t", weights.lambda_t),
        SHFL_REAL("lambda_e", weights.lambda_e),
        SHFL_REAL("lambda_c", weights.lambda_c),
        SHFL_REAL("kld_max", thresholds.kld_max),
        SHFL_REAL("d_min", thresholds.d_min),
        SHFL_REAL("delta_k", thresholds.delta_k),
        SHFL_REAL("delta_d", thresholds.delta_d),
        SHFL_REAL("delta_risk", thresholds.delta_risk),
        SHFL_REAL("epsilon_risk", thresholds.epsilon_risk),
        SHFL_INT("local_steps", local_steps),
        SHFL_INT("edge_rounds", edge_rounds),
        SHFL_INT("global_rounds", global_rounds),
        SHFL_REAL("psi_min", psi_min),
        SHFL_INT("p_min_points", p_min_points),
        SHFL_BOOL("substitute_ascending", substitute_ascending),
        SHFL_INT("max_sweeps", max_sweeps),
        SHFL_INT("backtrack_budget", backtrack_budget),
        SHFL_INT("init_attempts", init_attempts),
        SHFL_INT("window_len", window_len),
        SHFL_INT("window_count", window_count),
        SHFL_INT("replan_period", replan_period),
        SHFL_INT("feature_dim", feature_dim),
        SHFL_REAL("class_separation", class_separation),
        SHFL_INT("test_per_label", test_per_label),
        SHFL_REAL("learning_rate", learning_rate),
        SHFL_REAL("target_accuracy", target_accuracy),
        Field{"seed",
              [](ScenarioConfig& c, const std::string& k, const std::string& v) {
                  char* end = nullptr;
                  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
                  if (v.empty() || v[0] == '-' || end != v.c_str() + v.size())
                      throw ConfigError(k, "expected a non-negative integer, got '" + v + "'");
                  c.seed = x;
              },
              [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
    };
    return table;
}

#undef SHFL_REAL
#undef SHFL_INT
#undef SHFL_BOOL

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
        if (key == "max_clients") {
            // shorthand for a fixed capacity
            const auto m = static_cast<int>(parse_integer(key, value));
            if (m < 1) throw ConfigError("max_clients", "must be >= 1");
            config.max_clients_min = config.max_clients_max = m;
            continue;
        }
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
        if (it == table.end()) throw ConfigError(key, "unknown key");
        it->set(config, key, value);
    }
    config.validate();
    return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_config(const ScenarioConfig& config) {
    std::ostringstream os;
    for (const auto& f : fields()) os << f.key << " = " << f.get(config) << '\n';
    return os.str();
}

std::string scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["n_labels"] = s.n_labels;
    j["reference"] = s.reference;
    auto& clients = j["clients"] = nlohmann::ordered_json::array();
    for (const auto& c : s.clients) {
        clients.push_back({{"id", c.id},
                           {"label_counts", c.label_counts},
                           {"data_size", c.data_size},
                           {"cpu_freq", c.cpu_freq},
                           {"cycles_per_datapoint", c.cycles_per_datapoint},
                           {"capacitance", c.capacitance},
                           {"tx_power", c.tx_power},
                           {"batch_fraction", c.batch_fraction},
                           {"online_prob", c.online_prob},
                           {"reachable_edges", c.reachable_edges}});
    }
    auto& edges = j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : s.edges) {
        edges.push_back({{"id", e.id},
                         {"bandwidth_per_client", e.bandwidth_per_client},
                         {"max_clients", e.max_clients},
                         {"backhaul_delay", e.backhaul_delay},
                         {"backhaul_energy", e.backhaul_energy}});
    }
    j["noise_psd"] = s.channel.noise_psd;
    j["model_bits"] = s.channel.model_bits;
    j["gain"] = s.channel.gain.data();
    return j.dump();
}

}  // namespace shfl
