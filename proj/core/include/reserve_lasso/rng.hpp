#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace reserve_lasso {

using Rng = std::mt19937_64;

// Deterministic seed for a named substream of a root seed, e.g.
// ("bootstrap", b) or ("cv", 0). Streams with different names or indices are
// decorrelated by splitmix64 mixing.
std::uint64_t stream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
    return Rng(stream_seed(root, name, index));
}

}  // namespace reserve_lasso
