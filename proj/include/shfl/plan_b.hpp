#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shfl/association.hpp"
#include "shfl/cost.hpp"
#include "shfl/plan_a.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

/// Cosine similarity; throws DomainError if either vector is zero.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

struct SimilarityMatrix {
    std::vector<ClientId> clients;  // row/column order
    Matrix<double> psi;

    /// Position of client i in `clients`, or -1.
    int index_of(ClientId i) const;
};

SimilarityMatrix similarity_matrix(const std::vector<ClientId>& clients, const std::vector<FeatureVector>& features);

/// Similarity over the clients covered by edge j (admissible pairs only).
SimilarityMatrix similarity_matrix(const Scenario& scenario, EdgeId j, int local_steps);

struct ClusterSet {
    std::vector<std::vector<ClientId>> clusters;
    std::vector<ClientId> noise;
    std::vector<int> label;  // per SimilarityMatrix row: cluster index or -1 (noise)

    /// Cluster index of the client at row `k`, -1 for noise.
    int cluster_at(int k) const { return label[k]; }
};

/// DBSCAN with the neighbourhood {k : psi >= psi_min}, which contains the
/// point itself; a point is core when its neighbourhood has >= p_min points.
ClusterSet dbscan_clusters(const SimilarityMatrix& similarity, double psi_min, int p_min);

struct CcuOptions {
    int local_steps = 5;
    int edge_rounds = 3;
    double psi_min = 0.99;
    int p_min = 2;
    bool ascending = false;  // substitute order; false = most similar first
    int max_sweeps = 50;
    long node_budget = 1000000;
    std::uint64_t seed = 0;
    int round = 0;  // only used to label reports and log entries
    DecisionLog* log = nullptr;
};

struct Substitution {
    EdgeId edge = kNoEdge;
    ClientId dropout = -1;
    ClientId substitute = -1;
    double psi = 0.0;
};

struct RepairReport {
    int round = 0;
    std::vector<ClientId> dropouts;
    std::vector<Substitution> substitutions;
    bool fallback = false;
    std::vector<EdgeId> fallback_edges;
    std::vector<ClientId> backups;
    bool feasible = false;

    std::string to_json() const;
};

struct CcuResult {
    SolverOutcome outcome;  // role plan_b, Deterministic constraints on every edge
    RepairReport report;
};

/// Per-round repair of the long-term association for participation `xi`.
CcuResult ccu(const AssociationMatrix& plan_a, const std::vector<int>& xi, const Scenario& scenario,
              const Matrix<PairCost>& costs, const CostWeights& weights, const ConstraintThresholds& thresholds,
              const CcuOptions& options);

}  // namespace shfl
