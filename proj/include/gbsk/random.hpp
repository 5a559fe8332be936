#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gbsk {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a path of stream ids,
/// so that the stream for (master, i) never depends on how many other streams exist
/// or in which order they are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (const auto id : path) h = mix64(h ^ mix64(id + 0x632be59bd9b4e019ULL));
    return h;
}

// Stream ids used by the pipeline.
namespace stream {
inline constexpr std::uint64_t sampling = 1;
inline constexpr std::uint64_t sample_balls = 2;
inline constexpr std::uint64_t key_balls = 3;
inline constexpr std::uint64_t full_balls = 4;
} // namespace stream

} // namespace gbsk
