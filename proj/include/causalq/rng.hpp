#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace causalq {

using Rng = std::mt19937_64;

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministically derives an independent sub-stream seed from a master
/// seed and a stream tag. Used so that gen/train/sample and per-worker
/// streams never share state.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t h = detail::splitmix64(master);
    for (char c : tag) h = detail::splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
    return detail::splitmix64(derive_seed(master, tag) ^ detail::splitmix64(index));
}

}  // namespace causalq
