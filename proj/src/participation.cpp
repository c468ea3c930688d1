#include "shfl/participation.hpp"

#include <fstream>
#include <sstream>

#include "shfl/rng.hpp"

namespace shfl {

std::vector<int> ParticipationTrace::column(std::size_t g) const {
    std::vector<int> out(n_clients());
    for (std::size_t i = 0; i < n_clients(); ++i) out[i] = xi(i, g);
    return out;
}

std::vector<int> ParticipationTrace::history(ClientId i, std::size_t first, std::size_t last) const {
    std::vector<int> out;
    for (std::size_t g = first; g < last; ++g) out.push_back(xi(i, g));
    return out;
}

ParticipationTrace sample_trace(const std::vector<ClientProfile>& clients, std::size_t rounds, std::uint64_t seed) {
    if (rounds < 1) throw DomainError("sample_trace: rounds must be >= 1");
    ParticipationTrace t;
    t.seed = seed;
    t.xi = Matrix<unsigned char>(clients.size(), rounds, 0);
    for (std::size_t i = 0; i < clients.size(); ++i) {
        Rng rng = make_rng(seed, {kTraceStream, static_cast<std::uint64_t>(clients[i].id)});
        for (std::size_t g = 0; g < rounds; ++g) t.xi(i, g) = uniform01(rng) < clients[i].online_prob ? 1 : 0;
    }
    return t;
}

std::vector<double> estimator_weights(int K) {
    if (K < 1) throw DomainError("window_count must be >= 1");
    std::vector<double> w(K);
    const double denom = static_cast<double>(K) * (K + 1);
    double head = 0.0;
    for (int k = 1; k < K; ++k) {
        w[k - 1] = 2.0 * k / denom;
        head += w[k - 1];
    }
    // the freshest weight absorbs the rounding residue so that a left-to-right
    // sum is exactly 1
    w[K - 1] = 1.0 - head;
    return w;
}

double estimate_online_prob(const std::vector<int>& history, int tau, int K) {
    if (tau < 1 || K < 1) throw DomainError("window_len and window_count must be >= 1");
    const std::size_t need = static_cast<std::size_t>(tau) * K;
    if (history.size() < need) throw DomainError("estimate_online_prob: history shorter than K * tau");
    const auto w = estimator_weights(K);
    const std::size_t start = history.size() - need;
    double p = 0.0;
    for (int k = 0; k < K; ++k) {
        long ones = 0;
        for (int t = 0; t < tau; ++t) ones += history[start + static_cast<std::size_t>(k) * tau + t];
        p += w[k] * static_cast<double>(ones) / tau;
    }
    return p;
}

void write_trace_csv(const ParticipationTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "round,client_id,xi\n";
    for (std::size_t g = 0; g < trace.n_rounds(); ++g)
        for (std::size_t i = 0; i < trace.n_clients(); ++i)
            out << g << ',' << i << ',' << static_cast<int>(trace.xi(i, g)) << '\n';
}

ParticipationTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "round,client_id,xi") throw DomainError("trace csv: unexpected header");
    struct Row {
        std::size_t g, i;
        int x;
    };
    std::vector<Row> rows;
    std::size_t max_g = 0, max_i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Row r{};
        char c1 = 0, c2 = 0;
        if (!(ls >> r.g >> c1 >> r.i >> c2 >> r.x) || c1 != ',' || c2 != ',' || (r.x != 0 && r.x != 1))
            throw DomainError("trace csv: malformed row '" + line + "'");
        max_g = std::max(max_g, r.g);
        max_i = std::max(max_i, r.i);
        rows.push_back(r);
    }
    ParticipationTrace t;
    if (rows.empty()) return t;
    t.xi = Matrix<unsigned char>(max_i + 1, max_g + 1, 0);
    for (const auto& r : rows) t.xi(r.i, r.g) = static_cast<unsigned char>(r.x);
    return t;
}

}  // namespace shfl
