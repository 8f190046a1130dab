#pragma once

// Seed derivation and portable uniform draws. Every random stream in the
// library is keyed by (experiment seed, stream tag, index) so that results do
// not depend on evaluation order or thread count.

#include <cstdint>
#include <random>

namespace qres::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Named streams; values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    InitialCondition = 1,
    RandomUnitary = 2,
    Shots = 3,
    EsnWeights = 4,
    Test = 99,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                    std::uint64_t index = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(base) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

inline Engine make_engine(std::uint64_t seed) { return Engine{seed}; }

// Uniform on [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
inline double uniform01(Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& engine, double lo, double hi) {
    return lo + (hi - lo) * uniform01(engine);
}

}  // namespace qres::rng
