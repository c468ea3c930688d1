#include "shfl/association.hpp"

namespace shfl {

std::string to_string(AssocRole role) {
    switch (role) {
        case AssocRole::GroundTruth: return "ground_truth";
        case AssocRole::PlanA: return "plan_a";
        case AssocRole::PlanB: return "plan_b";
    }
    return "unknown";
}

std::string to_string(ConstraintMode mode) {
    switch (mode) {
        case ConstraintMode::Chance: return "chance";
        case ConstraintMode::Deterministic: return "deterministic";
        case ConstraintMode::DataOnly: return "data_only";
    }
    return "unknown";
}

AssociationMatrix AssociationMatrix::from_edges(const std::vector<EdgeId>& edge_of, std::size_t n_edges,
                                                AssocRole role) {
    AssociationMatrix m(edge_of.size(), n_edges, role);
    for (std::size_t i = 0; i < edge_of.size(); ++i)
        if (edge_of[i] != kNoEdge) m.set(static_cast<ClientId>(i), edge_of[i]);
    return m;
}

void AssociationMatrix::clear_client(ClientId i) {
    for (std::size_t j = 0; j < n_edges(); ++j) a_(i, j) = 0;
}

EdgeId AssociationMatrix::edge_of(ClientId i) const {
    for (std::size_t j = 0; j < n_edges(); ++j)
        if (a_(i, j)) return static_cast<EdgeId>(j);
    return kNoEdge;
}

std::vector<EdgeId> AssociationMatrix::edge_vector() const {
    std::vector<EdgeId> out(n_clients());
    for (std::size_t i = 0; i < n_clients(); ++i) out[i] = edge_of(static_cast<ClientId>(i));
    return out;
}

std::vector<ClientId> AssociationMatrix::members(EdgeId j) const {
    std::vector<ClientId> out;
    for (std::size_t i = 0; i < n_clients(); ++i)
        if (a_(i, j)) out.push_back(static_cast<ClientId>(i));
    return out;
}

std::vector<ClientId> AssociationMatrix::selected_clients() const {
    std::vector<ClientId> out;
    for (std::size_t i = 0; i < n_clients(); ++i)
        if (selected(static_cast<ClientId>(i))) out.push_back(static_cast<ClientId>(i));
    return out;
}

int AssociationMatrix::load(EdgeId j) const {
    int n = 0;
    for (std::size_t i = 0; i < n_clients(); ++i) n += a_(i, j);
    return n;
}

int AssociationMatrix::assignments_of(ClientId i) const {
    int n = 0;
    for (std::size_t j = 0; j < n_edges(); ++j) n += a_(i, j);
    return n;
}

}  // namespace shfl
