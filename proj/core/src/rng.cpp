#include "reserve_lasso/rng.hpp"

namespace reserve_lasso {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t root, std::string_view name, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(root) ^ fnv1a(name)) ^ index);
}

}  // namespace reserve_lasso
