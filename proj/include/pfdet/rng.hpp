#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pfdet {

// SplitMix64 finalizer. Used both to expand a seed into generator state and
// to derive independent substream seeds from one master seed.
inline std::uint64_t split_mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic substream seed: distinct streams of one master seed are
// statistically independent. Channels, symbols, noise and optimizer
// initialization each draw from their own stream (see stream ids below).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return split_mix64(master + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

// Fixed stream ids so that the mapping seed -> data never changes.
inline constexpr std::uint64_t kStreamChannel = 1;
inline constexpr std::uint64_t kStreamSymbols = 2;
inline constexpr std::uint64_t kStreamNoise = 3;
inline constexpr std::uint64_t kStreamOptimizer = 4;
inline constexpr std::uint64_t kStreamTrialBase = 16; // trial i -> stream 16+i

// xoshiro256** (Blackman/Vigna), seeded through SplitMix64. Self-contained so
// that sequences are identical across platforms and standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x = split_mix64(x);
            word = x;
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Uniform on the open interval (-1/2, 1/2).
    double uniform_symmetric() {
        double u;
        do {
            u = uniform01() - 0.5;
        } while (u == -0.5);
        return u;
    }

    // Standard normal via Box-Muller; consumes two uniforms per draw so the
    // stream position is a fixed function of the draw count.
    double normal() {
        const double u1 = 1.0 - uniform01(); // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace pfdet
