#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "shfl/core.hpp"
#include "shfl/scenario.hpp"

namespace shfl {

/// xi(i, g) in {0, 1}: client i online in round g (0-based columns).
struct ParticipationTrace {
    Matrix<unsigned char> xi;  // clients x rounds
    std::uint64_t seed = 0;

    std::size_t n_clients() const noexcept { return xi.rows(); }
    std::size_t n_rounds() const noexcept { return xi.cols(); }
    std::vector<int> column(std::size_t g) const;
    /// Observations of client i in rounds [first, last).
    std::vector<int> history(ClientId i, std::size_t first, std::size_t last) const;
};

/// Each client row comes from its own stream, so rows are independent of
/// the client count and of each other.
ParticipationTrace sample_trace(const std::vector<ClientProfile>& clients, std::size_t rounds, std::uint64_t seed);

/// Window weights 2k/(K(K+1)), k = 1..K, freshest window last.
std::vector<double> estimator_weights(int window_count);

/// Weighted rolling-window estimate from the most recent K*tau entries of
/// `history` (oldest first). Throws DomainError on short history or bad sizes.
double estimate_online_prob(const std::vector<int>& history, int window_len, int window_count);

/// CSV with header `round,client_id,xi`, one row per (round, client).
void write_trace_csv(const ParticipationTrace& trace, const std::filesystem::path& path);
ParticipationTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace shfl
