#pragma once

#include <string>
#include <vector>

#include "shfl/core.hpp"

namespace shfl {

enum class AssocRole { GroundTruth, PlanA, PlanB };

std::string to_string(AssocRole role);

/// Binary client-to-edge assignment a(i, j). The binary form can represent
/// invalid states (a client on two edges) so that checkers can report them.
class AssociationMatrix {
public:
    AssociationMatrix() = default;
    AssociationMatrix(std::size_t n_clients, std::size_t n_edges, AssocRole role = AssocRole::GroundTruth)
        : a_(n_clients, n_edges, 0), role_(role) {}

    /// Builds from a per-client edge vector (kNoEdge = unselected).
    static AssociationMatrix from_edges(const std::vector<EdgeId>& edge_of, std::size_t n_edges,
                                        AssocRole role = AssocRole::GroundTruth);

    std::size_t n_clients() const noexcept { return a_.rows(); }
    std::size_t n_edges() const noexcept { return a_.cols(); }

    bool operator()(ClientId i, EdgeId j) const { return a_(i, j) != 0; }
    void set(ClientId i, EdgeId j, bool on = true) { a_(i, j) = on ? 1 : 0; }
    /// Removes client i from every edge.
    void clear_client(ClientId i);

    /// First edge client i is assigned to, or kNoEdge.
    EdgeId edge_of(ClientId i) const;
    std::vector<EdgeId> edge_vector() const;
    bool selected(ClientId i) const { return edge_of(i) != kNoEdge; }
    std::vector<ClientId> members(EdgeId j) const;
    std::vector<ClientId> selected_clients() const;
    int load(EdgeId j) const;
    int assignments_of(ClientId i) const;

    AssocRole role() const noexcept { return role_; }
    void set_role(AssocRole role) noexcept { role_ = role; }

    /// Equality compares assignments only, not role tags.
    bool same_assignment(const AssociationMatrix& other) const { return a_ == other.a_; }

private:
    Matrix<unsigned char> a_;
    AssocRole role_ = AssocRole::GroundTruth;
};

/// Which constraint family an outcome claims to satisfy.
enum class ConstraintMode {
    Chance,         // capacity + Markov KLD bound + expected data size (pre-decision stage)
    Deterministic,  // capacity + per-edge KLD <= kld_max and D_j >= d_min
    DataOnly,       // capacity + D_j >= d_min (benchmarks that drop the KLD constraint)
};

std::string to_string(ConstraintMode mode);

struct SolverStats {
    long iterations = 0;       // local-search sweeps
    long candidates = 0;       // associator evaluations
    long backtrack_nodes = 0;  // DFS nodes expanded
    double wall_time_s = 0.0;
};

struct SolverOutcome {
    AssociationMatrix assoc;
    double objective = 0.0;
    bool feasible = false;
    double violation = 0.0;  // 0 when feasible; aggregate constraint excess otherwise
    ConstraintMode mode = ConstraintMode::Deterministic;
    /// Edges the constraints were declared on (empty edges still count).
    std::vector<bool> checked_edges;
    /// Participation probabilities used by Chance constraints; empty otherwise.
    std::vector<double> probabilities;
    SolverStats stats;
};

}  // namespace shfl
