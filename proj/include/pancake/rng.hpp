#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace pancake {

// All randomness in the project flows through mt19937_64 with manual
// float conversion. std::mt19937_64 output is pinned by the standard and
// the conversions below avoid the implementation-defined distributions,
// so a seed reproduces the same stream everywhere.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline double gaussian(Rng& rng, double mean, double stddev) {
    // Box-Muller; two fresh draws per sample keeps the stream position
    // independent of call history.
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + stddev * z;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable seed derivation so independent subsystems never share a stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (const char c : tag) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 1099511628211ULL;
    }
    return splitmix64(master ^ splitmix64(h ^ splitmix64(index)));
}

}  // namespace pancake
