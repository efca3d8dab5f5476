#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace tradelab {

/// Deterministic 64-bit generator (splitmix64, Steele et al.). Every random
/// choice in the library flows through this so that a (seed, stream) pair
/// produces bit-identical output on any platform; nothing reads the clock or
/// OS entropy.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n) via rejection sampling; unbiased for any n > 0.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Fisher-Yates, iterating from the back; consumes size()-1 draws.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    /// Substream generator for (seed, stream index) pairs: the child seed is
    /// one splitmix step of seed XOR the odd-constant-scaled stream index.
    static SplitMix64 derive(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 mixer(seed ^ (stream * 0xD2B74407B1CE6E93ULL + 0x8BB84B93962EACC9ULL));
        return SplitMix64(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

}  // namespace tradelab
