#pragma once

#include <cstdint>
#include <random>

namespace dde {

/// Derives independent child seeds from (seed, index) so that sample loops
/// stay deterministic no matter how they are scheduled.
[[nodiscard]] inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

[[nodiscard]] inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index = 0) {
    return std::mt19937_64(mix_seed(seed, index));
}

} // namespace dde
