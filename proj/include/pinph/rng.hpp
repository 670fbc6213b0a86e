#pragma once

// Seed derivation and uniform draws that do not depend on the standard
// library's distribution implementations.

#include <cstdint>
#include <random>
#include <string_view>

namespace pinph {

using Engine = std::mt19937_64;

constexpr uint64_t splitmix64(uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr uint64_t derive_seed(uint64_t parent, uint64_t stream) noexcept {
    return splitmix64(parent ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(uint64_t seed) { return Engine(splitmix64(seed)); }

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace pinph
