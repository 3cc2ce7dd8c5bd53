#pragma once

#include <cstdint>
#include <string_view>

namespace scicorpus {

// Pinned seed for every stable hash in the pipeline. Changing it changes
// partition assignments, shingle hashes, and LSH bucket keys, so it is a
// source constant, not configuration.
inline constexpr std::uint64_t kStableHashSeed = 0x5c1ec0de2023ULL;

// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seeded FNV-1a over the bytes, finalized with splitmix64. Deterministic
// across runs and machines; never use std::hash for anything persisted.
inline constexpr std::uint64_t stable_hash64(std::string_view bytes,
                                             std::uint64_t seed = kStableHashSeed) {
    std::uint64_t h = 1469598103934665603ULL ^ mix64(seed);
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return mix64(h);
}

inline constexpr std::uint64_t stable_hash64(std::uint64_t value, std::uint64_t seed) {
    return mix64(value ^ mix64(seed));
}

}  // namespace scicorpus
