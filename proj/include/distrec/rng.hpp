#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace distrec {

// SplitMix64 (Steele/Lea/Vigna). Fixed as the project-wide generator: one
// 64-bit word of state, trivially splittable, and the same seed produces the
// same stream on every platform (no libstdc++ distribution objects anywhere).
struct SplitMix64 {
    uint64_t state = 0;

    SplitMix64() = default;
    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // fast range reduction: high 64 bits of a 128-bit product
    uint64_t next_below(uint64_t bound) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next()) * bound) >> 64);
    }

    // uniform in [0,1) with 53 random bits
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Stateless finalizer of the same generator, used for counter-style draws
// (hash a counter, get an independent 64-bit value).
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Child-stream derivation: replayable from (base, a, b) alone, so a single
// experiment row can be reproduced without rerunning the whole sweep.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    return mix64(mix64(base ^ 0x5851f42d4c957f2dull * (a + 1)) ^
                 0x14057b7ef767814full * (b + 1));
}

// First k entries of a seeded uniform permutation of 0..n-1 (partial
// Fisher-Yates). Order of the returned entries is the sampling order.
inline std::vector<uint32_t> sample_distinct(uint32_t n, uint32_t k, uint64_t seed) {
    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    SplitMix64 rng(seed);
    if (k > n) k = n;
    for (uint32_t i = 0; i < k; ++i) {
        uint32_t j = i + static_cast<uint32_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace distrec
