#include "shfl/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "shfl/baselines.hpp"
#include "shfl/cost.hpp"
#include "shfl/divergence.hpp"
#include "shfl/participation.hpp"

#ifndef SHFL_VERSION
#define SHFL_VERSION "0.1.0"
#endif

namespace shfl {

namespace {

// Plan A needs log(p); an estimate of exactly zero is lifted to this floor.
constexpr double kProbFloor = 1e-3;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

const std::vector<std::string>& metrics_columns() {
    static const std::vector<std::string> cols = {
        "round",    "policy",          "delay_s",  "energy_j",     "objective",   "decision_time_s", "accuracy",
        "feasible", "constraints_ok", "selected", "participants", "dropouts",    "substitutions",   "fallback"};
    return cols;
}

void write_metrics_csv(const std::vector<RoundMetrics>& rounds, std::ostream& out) {
    const auto& cols = metrics_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << '\n';
    for (const auto& r : rounds) {
        out << r.round << ',' << r.policy << ',' << fmt(r.delay) << ',' << fmt(r.energy) << ',' << fmt(r.objective)
            << ',' << fmt(r.decision_time_s) << ',' << fmt(r.accuracy) << ',' << r.feasible << ','
            << r.constraints_ok << ',' << r.selected << ',' << r.participants << ',' << r.dropouts << ','
            << r.substitutions << ',' << r.fallback << '\n';
    }
}

std::vector<std::string> policy_names() {
    std::vector<std::string> names = {"stagewise"};
    const auto& b = baseline_names();
    names.insert(names.end(), b.begin(), b.end());
    return names;
}

double rounds_to_target(const std::vector<RoundMetrics>& rounds, double target) {
    for (const auto& r : rounds)
        if (r.accuracy >= target) return r.round;
    return std::numeric_limits<double>::infinity();
}

std::string version_string() { return SHFL_VERSION; }

std::string manifest_json(const ScenarioConfig& config, const std::string& policy, const std::string& run_id) {
    nlohmann::ordered_json j;
    j["run_id"] = run_id;
    j["policy"] = policy;
    j["version"] = version_string();
    j["seed"] = config.seed;
    j["seeds"] = {{"scenario", derive_seed(config.seed, {kScenarioStream})},
                  {"trace", derive_seed(config.seed, {kTraceStream})},
                  {"task", config.seed},
                  {"model_init", derive_seed(config.seed, {kModelInitStream})}};
    nlohmann::ordered_json cfg;
    std::istringstream in(format_config(config));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) cfg[line.substr(0, eq)] = line.substr(eq + 3);
    }
    j["config"] = cfg;
    return j.dump(2);
}

ExperimentResult run_experiment(const ScenarioConfig& config, const std::string& policy, const Learner* learner_in,
                                const ExperimentOptions& options) {
    using Clock = std::chrono::steady_clock;
    config.validate();
    const auto names = policy_names();
    if (std::find(names.begin(), names.end(), policy) == names.end())
        throw ConfigError("policy", "unknown policy '" + policy + "'");
    const bool stagewise = policy == "stagewise";

    Scenario scenario = generate_scenario(config);
    const SyntheticTask task = synthetic_task(config, scenario, config.seed);
    const SoftmaxLearner default_learner(config.feature_dim, config.n_labels);
    const Learner& learner = learner_in ? *learner_in : default_learner;

    const std::size_t warmup = static_cast<std::size_t>(config.window_len) * config.window_count;
    const std::size_t g_max = static_cast<std::size_t>(config.global_rounds);
    const ParticipationTrace trace =
        sample_trace(scenario.clients, warmup + std::max<std::size_t>(g_max, 1), derive_seed(config.seed, {kTraceStream}));

    Matrix<PairCost> costs = pair_cost_table(scenario, config.local_steps);
    const LearnerSpec spec{config.learning_rate, config.local_steps, config.batch_fraction};

    ExperimentResult res;
    res.decisions.stage = "plan_a";
    Rng init_rng = make_rng(config.seed, {kModelInitStream});
    ModelVector global = learner.init(init_rng);
    res.initial_model = global;

    AssociationMatrix long_term(scenario.n_clients(), scenario.n_edges(), AssocRole::PlanA);
    auto run_plan_a = [&](std::size_t observed, int round) {
        // estimate from the most recent K * tau observations
        std::vector<double> probs(scenario.n_clients());
        for (std::size_t i = 0; i < scenario.n_clients(); ++i) {
            const auto hist = trace.history(static_cast<ClientId>(i), 0, observed);
            probs[i] = std::clamp(estimate_online_prob(hist, config.window_len, config.window_count), kProbFloor, 1.0);
        }
        AssociationProblem p = AssociationProblem::plan_a(scenario, costs, config.weights, config.thresholds,
                                                          config.edge_rounds, probs);
        p.node_budget = config.backtrack_budget;
        res.decisions.stage = "plan_a round " + std::to_string(round);
        const auto t0 = Clock::now();
        SolverOutcome out = li_long_client_d(p, p.free_pool(), derive_seed(config.seed, {kPlanAStream, static_cast<std::uint64_t>(round)}),
                                             config.max_sweeps, config.init_attempts,
                                             options.record_decisions ? &res.decisions : nullptr);
        res.plan_a_time_s += std::chrono::duration<double>(Clock::now() - t0).count();
        out.assoc.set_role(AssocRole::PlanA);
        long_term = out.assoc;
        res.estimated_probs = probs;
        res.plan_a.push_back(std::move(out));
    };
    if (stagewise && g_max > 0) run_plan_a(warmup, 0);

    for (std::size_t g = 1; g <= g_max; ++g) {
        const std::size_t column = warmup + g - 1;
        if (config.dynamic_channels) {
            resample_channels(scenario, config, derive_seed(config.seed, {kChannelStream, g}));
            costs = pair_cost_table(scenario, config.local_steps);
        }
        if (stagewise && config.replan_period > 0 && g > 1 && (g - 1) % config.replan_period == 0)
            run_plan_a(column, static_cast<int>(g));

        const std::vector<int> xi = trace.column(column);
        RoundMetrics m;
        m.round = static_cast<int>(g);
        m.policy = policy;

        AssociationMatrix assoc;
        const auto t0 = Clock::now();
        if (stagewise) {
            CcuOptions opt;
            opt.local_steps = config.local_steps;
            opt.edge_rounds = config.edge_rounds;
            opt.psi_min = config.psi_min;
            opt.p_min = config.p_min_points;
            opt.ascending = config.substitute_ascending;
            opt.max_sweeps = config.max_sweeps;
            opt.node_budget = config.backtrack_budget;
            opt.seed = derive_seed(config.seed, {kPolicyStream, g});
            opt.round = static_cast<int>(g);
            opt.log = options.record_decisions ? &res.decisions : nullptr;
            CcuResult r = ccu(long_term, xi, scenario, costs, config.weights, config.thresholds, opt);
            m.decision_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
            assoc = std::move(r.outcome.assoc);
            m.feasible = r.outcome.feasible;
            m.dropouts = static_cast<int>(r.report.dropouts.size());
            m.substitutions = static_cast<int>(r.report.substitutions.size());
            m.fallback = r.report.fallback;
            res.repairs.push_back(std::move(r.report));
        } else {
            PolicyContext ctx;
            ctx.scenario = &scenario;
            ctx.costs = &costs;
            ctx.weights = config.weights;
            ctx.thresholds = config.thresholds;
            ctx.edge_rounds = config.edge_rounds;
            ctx.max_sweeps = config.max_sweeps;
            ctx.node_budget = config.backtrack_budget;
            ctx.init_attempts = config.init_attempts;
            ctx.seed = derive_seed(config.seed, {kPolicyStream, g});
            SolverOutcome out = run_baseline(policy, ctx, xi);
            m.decision_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
            assoc = std::move(out.assoc);
            m.feasible = out.feasible;
        }

        const RoundCost rc = round_cost(assoc, xi, costs, scenario.edges, config.edge_rounds);
        m.delay = rc.delay;
        m.energy = rc.energy;
        m.objective = weighted_cost(config.weights, rc);
        m.constraints_ok = check_p0_constraints(assoc, xi, scenario, config.thresholds).all_ok();

        // hierarchical training: L edge rounds of T local steps, then the cloud
        std::vector<ModelVector> edge_models;
        std::vector<double> edge_data;
        for (const auto& edge : scenario.edges) {
            std::vector<ClientId> part;
            for (ClientId i : assoc.members(edge.id))
                if (xi[i]) part.push_back(i);
            m.selected += assoc.load(edge.id);
            m.participants += static_cast<int>(part.size());
            if (part.empty()) continue;
            ModelVector w_edge = global;
            double d_edge = 0.0;
            for (ClientId i : part) d_edge += static_cast<double>(scenario.clients[i].data_size);
            for (int l = 0; l < config.edge_rounds; ++l) {
                std::vector<ModelVector> local;
                std::vector<double> sizes;
                for (ClientId i : part) {
                    Rng rng = make_rng(config.seed, {kTrainingStream, g, static_cast<std::uint64_t>(l),
                                                     static_cast<std::uint64_t>(i)});
                    local.push_back(learner.local_sgd(w_edge, task.shards[i], spec, rng));
                    sizes.push_back(static_cast<double>(scenario.clients[i].data_size));
                }
                std::vector<const ModelVector*> ptrs;
                for (const auto& w : local) ptrs.push_back(&w);
                w_edge = edge_aggregate(ptrs, sizes);
            }
            edge_models.push_back(std::move(w_edge));
            edge_data.push_back(d_edge);
        }
        if (!edge_models.empty()) {
            std::vector<const ModelVector*> ptrs;
            for (const auto& w : edge_models) ptrs.push_back(&w);
            global = global_aggregate(ptrs, edge_data);
        }
        m.accuracy = learner.evaluate(global, task.test);

        res.associations.push_back(std::move(assoc));
        res.participation.push_back(xi);
        res.rounds.push_back(std::move(m));
    }
    res.final_model = std::move(global);
    return res;
}

}  // namespace shfl
