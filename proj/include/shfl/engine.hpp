#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "shfl/association.hpp"
#include "shfl/learner.hpp"
#include "shfl/plan_a.hpp"
#include "shfl/plan_b.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

struct RoundMetrics {
    int round = 0;
    std::string policy;
    double delay = 0.0;            // s
    double energy = 0.0;           // J
    double objective = 0.0;        // lambda_t * delay + lambda_e * energy
    double decision_time_s = 0.0;  // policy call only
    double accuracy = 0.0;
    bool feasible = false;         // as declared by the policy
    bool constraints_ok = false;   // per-round KLD/data/structure re-check
    int selected = 0;
    int participants = 0;
    int dropouts = 0;
    int substitutions = 0;
    bool fallback = false;
};

/// CSV header order of write_metrics_csv.
const std::vector<std::string>& metrics_columns();
void write_metrics_csv(const std::vector<RoundMetrics>& rounds, std::ostream& out);

/// Names accepted by run_experiment: "stagewise" plus the benchmark policies.
std::vector<std::string> policy_names();

struct ExperimentResult {
    std::vector<RoundMetrics> rounds;
    ModelVector initial_model;
    ModelVector final_model;
    std::vector<AssociationMatrix> associations;     // per round
    std::vector<std::vector<int>> participation;     // per round xi
    std::vector<SolverOutcome> plan_a;               // every pre-decision run
    std::vector<double> estimated_probs;             // latest estimate fed to Plan A
    double plan_a_time_s = 0.0;
    DecisionLog decisions;
    std::vector<RepairReport> repairs;
};

struct ExperimentOptions {
    bool record_decisions = true;  // keep the local-search decision log
};

/// Full workflow: scenario, warm-up participation history, optional
/// pre-decision, then g_max rounds of decision + hierarchical training.
/// `learner` defaults to softmax regression sized for the config.
ExperimentResult run_experiment(const ScenarioConfig& config, const std::string& policy,
                                const Learner* learner = nullptr, const ExperimentOptions& options = {});

/// First round whose accuracy reaches `target`; +infinity when none does.
double rounds_to_target(const std::vector<RoundMetrics>& rounds, double target);

/// Run manifest: config echo, seeds, policy, version string.
std::string manifest_json(const ScenarioConfig& config, const std::string& policy, const std::string& run_id);

/// Version string of the build.
std::string version_string();

}  // namespace shfl
