#pragma once

#include <cstdint>
#include <random>

namespace mfg {

// Seed derivation for parallel Monte Carlo.  Every path gets its own engine,
// seeded from (master_seed, path_index) through a splitmix64 scramble, so the
// stream a path sees is independent of how paths are distributed over worker
// threads.  Replaying the same master seed therefore reproduces every path
// bit-for-bit regardless of the worker count, which is also what common random
// number comparisons rely on.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_index) {
    // two rounds keep master and index from interacting linearly
    return splitmix64(splitmix64(master) ^ (0x9e3779b97f4a7c15ULL * (stream_index + 1)));
}

using Rng = std::mt19937_64;

inline Rng path_rng(std::uint64_t master, std::uint64_t stream_index) {
    return Rng(derive_seed(master, stream_index));
}

inline double uniform01(Rng& g) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

inline double exponential(Rng& g, double rate) {
    return std::exponential_distribution<double>(rate)(g);
}

inline double normal01(Rng& g) {
    return std::normal_distribution<double>(0.0, 1.0)(g);
}

}  // namespace mfg
