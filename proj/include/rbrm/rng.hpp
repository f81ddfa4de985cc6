#pragma once

#include <cstdint>
#include <random>

namespace rbrm {

using Rng = std::mt19937_64;

/// One SplitMix64 step; mixes the state and returns the next output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic seed for sub-stream `stream` of a master seed. Used so that
/// Monte Carlo trial k draws the same numbers regardless of how trials are
/// batched or threaded.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// U[0, 1) draw.
inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// N(0, sigma^2) draw; sigma == 0 consumes no randomness and returns 0.
inline double gaussian(Rng& rng, double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

/// Bernoulli(p) draw as {0, 1}.
inline int bernoulli(Rng& rng, double p) { return uniform01(rng) < p ? 1 : 0; }

}  // namespace rbrm
