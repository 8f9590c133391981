#pragma once

#include <cstdint>
#include <random>

namespace conformal {

// splitmix64 finalizer; the fixed mixing function behind every per-row and
// per-trial stream so work parallelizes without order dependence.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent substream from (seed, index).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(derive_stream(seed, index));
}

/// Uniform draw in [0,1) reproducible from (seed, row index).
inline double row_uniform(std::uint64_t seed, std::uint64_t row) {
    auto eng = make_engine(seed, row);
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

}  // namespace conformal
