#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace shfl {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tag path, e.g.
/// derive_seed(seed, {kTrainingStream, round, edge_round, client}).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    return Rng(derive_seed(base, tags));
}

/// Uniform double in [0, 1) with a fixed 53-bit construction, so traces do
/// not depend on the standard library's canonical generator.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [lo, hi] (inclusive).
inline long uniform_int(Rng& rng, long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return lo + static_cast<long>(v % span);
}

/// Standard normal draw (Box-Muller, one value per call).
inline double normal01(Rng& rng) {
    double u1;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 0.0);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Fisher-Yates shuffle driven by uniform_int.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t k = v.size(); k > 1; --k) {
        const auto r = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(k) - 1));
        std::swap(v[k - 1], v[r]);
    }
}

// Stream tags.
enum : std::uint64_t {
    kScenarioStream = 1,
    kTraceStream,
    kWarmupStream,
    kChannelStream,
    kTrainingStream,
    kTaskStream,
    kModelInitStream,
    kPolicyStream,
    kPlanAStream,
    kMonteCarloStream,
};

}  // namespace shfl
