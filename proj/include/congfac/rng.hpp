#pragma once

#include <cstdint>

namespace congfac {

// SplitMix64 (Steele, Lea, Flood 2014). One 64-bit state word, trivially
// splittable, and bit-exact across platforms -- unlike the standard-library
// distributions, whose output is implementation defined. All randomized
// solvers in this project draw from this generator so that seeded runs
// replay exactly.
//
// Stream version: 1. Bump if the update or the double conversion changes.
inline constexpr int kRngVersion = 1;

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53 mantissa bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_in(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n), n > 0. Rejection-free modulo is fine here:
    // n is always tiny compared to 2^64, the bias is < n/2^64.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

// Deterministic child seed for (seed, index), used to fan a master seed out
// to repetitions, per-k loops, and worker streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0x8e9c5f2a1d3b7c99ull + index * 0xd1342543de82ef95ull));
    mixer.next_u64();
    return mixer.next_u64();
}

}  // namespace congfac
