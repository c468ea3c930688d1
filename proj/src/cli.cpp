#include "shfl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "shfl/divergence.hpp"
#include "shfl/engine.hpp"
#include "shfl/plan_a.hpp"
#include "shfl/rng.hpp"

namespace shfl {

namespace fs = std::filesystem;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AssertionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    return f;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

ScenarioConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
    if (!fs::exists(path)) throw IoError("config file not found: " + path);
    ScenarioConfig c = load_config(path);
    if (seed) c.seed = *seed;
    return c;
}

std::string num(double x) {
    if (std::isinf(x)) return "\u221e";
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    // an infinite middle element stays infinite
    return n % 2 ? v[n / 2] : (std::isinf(v[n / 2]) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
}

// ---------------------------------------------------------------------------

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed, const std::string& policy,
            const std::string& out_dir, std::string run_id, std::ostream& out) {
    const ScenarioConfig config = load(config_path, seed);
    if (run_id.empty()) run_id = policy + "-seed" + std::to_string(config.seed);
    const ExperimentResult res = run_experiment(config, policy);
    const fs::path dir = fs::path(out_dir) / run_id;
    ensure_dir(dir);
    {
        auto f = open_out(dir / "metrics.csv");
        write_metrics_csv(res.rounds, f);
    }
    {
        auto f = open_out(dir / "manifest.json");
        f << manifest_json(config, policy, run_id) << '\n';
    }
    {
        auto f = open_out(dir / "decisions.jsonl");
        res.decisions.write_jsonl(f);
    }
    {
        auto f = open_out(dir / "repairs.jsonl");
        for (const auto& r : res.repairs) f << r.to_json() << '\n';
    }
    const double acc = res.rounds.empty() ? 0.0 : res.rounds.back().accuracy;
    out << "run " << run_id << ": " << res.rounds.size() << " rounds, final accuracy " << num(acc) << ", output "
        << dir.string() << '\n';
    return kExitOk;
}

int cmd_bench(const std::string& config_path, const std::optional<std::uint64_t>& seed,
              const std::vector<std::string>& policies, int seeds, std::optional<double> target,
              const std::string& out_dir, std::ostream& out) {
    ScenarioConfig config = load(config_path, seed);
    if (seeds < 1) throw ConfigError("seeds", "must be >= 1");
    const double goal = target.value_or(config.target_accuracy);
    if (!(goal > 0 && goal <= 1)) throw ConfigError("target-accuracy", "must lie in (0,1]");

    struct Row {
        std::string policy;
        double median_rounds, median_cost, mean_decision;
    };
    std::vector<Row> rows;
    const std::uint64_t base = config.seed;
    for (const auto& policy : policies) {
        std::vector<double> rounds, cost, decision;
        for (int k = 0; k < seeds; ++k) {
            config.seed = base + static_cast<std::uint64_t>(k);
            ExperimentOptions opt;
            opt.record_decisions = false;
            const auto res = run_experiment(config, policy, nullptr, opt);
            const double r = rounds_to_target(res.rounds, goal);
            double f = 0.0;
            for (const auto& m : res.rounds) {
                if (m.round > r) break;
                f += m.objective;
            }
            rounds.push_back(r);
            cost.push_back(std::isinf(r) ? r : f);
            double t = 0.0;
            for (const auto& m : res.rounds) t += m.decision_time_s;
            decision.push_back(res.rounds.empty() ? 0.0 : t / static_cast<double>(res.rounds.size()));
        }
        double mean_t = 0.0;
        for (double t : decision) mean_t += t;
        rows.push_back({policy, median(rounds), median(cost), mean_t / static_cast<double>(decision.size())});
    }

    std::ostringstream csv;
    csv << "policy,median_rounds_to_target,median_cost_to_target,mean_decision_time_s\n";
    for (const auto& r : rows)
        csv << r.policy << ',' << num(r.median_rounds) << ',' << num(r.median_cost) << ',' << num(r.mean_decision)
            << '\n';
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        auto f = open_out(fs::path(out_dir) / "bench.csv");
        f << csv.str();
    }

    out << std::left << std::setw(20) << "policy" << std::right << std::setw(14) << "rounds" << std::setw(16)
        << "cost" << std::setw(18) << "decision_s" << '\n';
    for (const auto& r : rows)
        out << std::left << std::setw(20) << r.policy << std::right << std::setw(14) << num(r.median_rounds)
            << std::setw(16) << num(r.median_cost) << std::setw(18) << num(r.mean_decision) << '\n';
    const auto sw = std::find_if(rows.begin(), rows.end(), [](const Row& r) { return r.policy == "stagewise"; });
    const auto op = std::find_if(rows.begin(), rows.end(), [](const Row& r) { return r.policy == "orig_prob_solver"; });
    if (sw != rows.end() && op != rows.end() && sw->mean_decision > 0)
        out << "decision-time ratio orig_prob_solver / stagewise: " << num(op->mean_decision / sw->mean_decision)
            << '\n';
    return kExitOk;
}

int cmd_validate_bounds(const std::string& config_path, const std::optional<std::uint64_t>& seed, long trials,
                        std::ostream& out) {
    const ScenarioConfig config = load(config_path, seed);
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    const Scenario s = generate_scenario(config);
    PlanAOptions opt;
    opt.local_steps = config.local_steps;
    opt.edge_rounds = config.edge_rounds;
    opt.max_sweeps = config.max_sweeps;
    opt.node_budget = config.backtrack_budget;
    opt.init_attempts = config.init_attempts;
    const SolverOutcome plan = li_long_client_d(s, config.weights, config.thresholds, config.seed, opt);
    std::vector<double> probs;
    for (const auto& c : s.clients) probs.push_back(c.online_prob);
    const LabelDistribution q(s.reference);
    const auto& th = config.thresholds;

    const ViolationRates mc = estimate_violation_rate(plan.assoc, s.clients, probs, q, th, trials,
                                                      derive_seed(config.seed, {kMonteCarloStream}));
    out << "plan_a feasible=" << plan.feasible << " objective=" << num(plan.objective) << '\n';
    out << "delta=" << num(th.delta_risk) << " delta_hat=" << num(mc.delta_hat) << '\n';
    out << "epsilon=" << num(th.epsilon_risk) << " epsilon_hat=" << num(mc.epsilon_hat) << '\n';

    // Dominance checks on each edge (when small enough) and on random
    // sub-instances of at most 10 members.
    int failures = 0, checks = 0;
    auto check = [&](const std::vector<ClientId>& members, const std::string& label) {
        if (members.empty() || members.size() > 20) return;
        const double bound = markov_kld_bound(members, s.clients, probs, q, th);
        const double exact_k = exact_violation_prob(members, s.clients, probs, q, ViolationKind::Kld, th);
        const double exact_d = exact_violation_prob(members, s.clients, probs, q, ViolationKind::Data, th);
        double expected = 0.0;
        for (ClientId i : members) expected += probs[i] * static_cast<double>(s.clients[i].data_size);
        const double lower = 1.0 - expected / (th.d_min + th.delta_d);
        const bool ok_k = exact_k <= bound + 1e-12;
        const bool ok_d = exact_d >= lower - 1e-12;
        ++checks;
        if (!ok_k || !ok_d) {
            ++failures;
            out << "DOMINANCE FAILURE " << label << ": exact_kld=" << num(exact_k) << " bound=" << num(bound)
                << " exact_data=" << num(exact_d) << " lower=" << num(lower) << '\n';
        }
    };
    Rng rng = make_rng(config.seed, {kMonteCarloStream, 1});
    for (const auto& e : s.edges) {
        const auto members = plan.assoc.members(e.id);
        check(members, "edge " + std::to_string(e.id));
        for (int k = 0; k < 20 && !members.empty(); ++k) {
            std::vector<ClientId> sub = members;
            shuffle(sub, rng);
            sub.resize(static_cast<std::size_t>(uniform_int(rng, 1, std::min<long>(10, static_cast<long>(sub.size())))));
            check(sub, "edge " + std::to_string(e.id) + " subset " + std::to_string(k));
        }
    }
    out << "dominance checks: " << checks << ", failures: " << failures << '\n';
    if (failures > 0) throw AssertionFailure("bound dominance violated");
    return kExitOk;
}

int cmd_generate(const std::string& config_path, const std::optional<std::uint64_t>& seed, const std::string& path,
                 std::ostream& out) {
    const ScenarioConfig config = load(config_path, seed);
    const std::string json = scenario_to_json(generate_scenario(config));
    if (path.empty()) {
        out << json << '\n';
    } else {
        auto f = open_out(path);
        f << json << '\n';
    }
    return kExitOk;
}

int cmd_plot_data(const std::string& input, const std::string& out_dir, std::ostream& out) {
    if (!fs::is_directory(input)) throw IoError("not a directory: " + input);
    std::vector<fs::path> runs;
    for (const auto& entry : fs::directory_iterator(input))
        if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv")) runs.push_back(entry.path());
    std::sort(runs.begin(), runs.end());
    ensure_dir(out_dir);
    auto acc = open_out(fs::path(out_dir) / "accuracy_vs_round.csv");
    auto cost = open_out(fs::path(out_dir) / "cost_vs_policy.csv");
    acc << "run_id,policy,round,accuracy\n";
    cost << "run_id,policy,rounds,total_delay_s,total_energy_j,total_objective,mean_decision_time_s\n";
    for (const auto& run : runs) {
        std::ifstream f(run / "metrics.csv");
        if (!f) throw IoError("cannot read " + (run / "metrics.csv").string());
        std::string line;
        std::getline(f, line);
        std::vector<std::string> header;
        {
            std::istringstream hs(line);
            std::string col;
            while (std::getline(hs, col, ',')) header.push_back(col);
        }
        auto col = [&](const std::string& name) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw IoError("metrics.csv lacks column " + name);
            return static_cast<std::size_t>(it - header.begin());
        };
        const std::size_t c_round = col("round"), c_policy = col("policy"), c_acc = col("accuracy"),
                          c_delay = col("delay_s"), c_energy = col("energy_j"), c_obj = col("objective"),
                          c_dec = col("decision_time_s");
        std::string policy;
        double d = 0, e = 0, fsum = 0, dec = 0;
        int n = 0;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cells;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            if (cells.size() != header.size()) throw IoError("malformed row in " + run.string());
            policy = cells[c_policy];
            acc << run.filename().string() << ',' << policy << ',' << cells[c_round] << ',' << cells[c_acc] << '\n';
            d += std::stod(cells[c_delay]);
            e += std::stod(cells[c_energy]);
            fsum += std::stod(cells[c_obj]);
            dec += std::stod(cells[c_dec]);
            ++n;
        }
        cost << run.filename().string() << ',' << policy << ',' << n << ',' << num(d) << ',' << num(e) << ','
             << num(fsum) << ',' << num(n ? dec / n : 0.0) << '\n';
    }
    out << "plot data for " << runs.size() << " runs written to " << out_dir << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stagewise hierarchical federated learning simulator", "shfl"};
    app.require_subcommand(1);

    std::string config_path, policy = "stagewise", out_dir = "out", run_id, input, file;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> policies = {"stagewise"};
    int seeds = 1;
    std::optional<double> target;
    long trials = 10000;

    auto* run = app.add_subcommand("run", "run one policy and write metrics and logs");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--policy", policy, "policy name")->check(CLI::IsMember(policy_names()));
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out_dir, "output root directory");
    run->add_option("--run-id", run_id, "run directory name (default <policy>-seed<seed>)");

    auto* bench = app.add_subcommand("bench", "compare policies over several seeds");
    bench->add_option("--config", config_path, "config file")->required();
    bench->add_option("--policies", policies, "policy names")->delimiter(',')->check(CLI::IsMember(policy_names()));
    bench->add_option("--seeds", seeds, "number of consecutive seeds");
    bench->add_option("--seed", seed, "first seed (default: config seed)");
    bench->add_option("--target-accuracy", target, "accuracy defining rounds-to-target");
    bench->add_option("--out", out_dir, "directory for bench.csv");

    auto* validate = app.add_subcommand("validate-bounds", "Monte-Carlo and exact checks of the chance bounds");
    validate->add_option("--config", config_path, "config file")->required();
    validate->add_option("--trials", trials, "Monte-Carlo trials per edge");
    validate->add_option("--seed", seed, "override the config seed");

    auto* generate = app.add_subcommand("generate", "print or save a generated scenario as JSON");
    generate->add_option("--config", config_path, "config file")->required();
    generate->add_option("--seed", seed, "override the config seed");
    generate->add_option("--out", file, "output file (default stdout)");

    auto* plot = app.add_subcommand("plot-data", "collect plot-ready CSV from run directories");
    plot->add_option("--input", input, "directory containing run directories")->required();
    plot->add_option("--out", out_dir, "output directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, eo;
        const int code = app.exit(e, o, eo);
        out << o.str();
        err << eo.str();
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, seed, policy, out_dir, run_id, out);
        if (*bench) return cmd_bench(config_path, seed, policies, seeds, target, out_dir, out);
        if (*validate) return cmd_validate_bounds(config_path, seed, trials, out);
        if (*generate) return cmd_generate(config_path, seed, file, out);
        if (*plot) return cmd_plot_data(input, out_dir, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const AssertionFailure& e) {
        err << "assertion failed: " << e.what() << '\n';
        return kExitAssertion;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace shfl
