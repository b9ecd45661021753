#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace framesift {

/// Permutation of [0, n) from a seeded mt19937_64. Unlike std::shuffle the
/// result is identical across standard library implementations.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace framesift
