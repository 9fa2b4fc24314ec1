#pragma once

#include <cstdint>

namespace aloha {

/// Stateless counter-based generator: every variate is a hash of
/// (seed, slot, stream, index). Two runs that share a seed see the same
/// numbers for the same slot no matter what else they draw.
class CounterRng {
public:
    enum Stream : std::uint32_t { kAttempt = 1, kArrival = 2 };

    explicit CounterRng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x9E3779B97F4A7C15ULL)) {}

    std::uint64_t bits(std::uint64_t slot, std::uint32_t stream, std::uint32_t index) const noexcept {
        std::uint64_t h = mix(key_ ^ slot);
        h = mix(h ^ ((static_cast<std::uint64_t>(stream) << 32) | index));
        return mix(h + key_);
    }

    /// Uniform in [0,1) with 53 random bits.
    double uniform(std::uint64_t slot, std::uint32_t stream, std::uint32_t index) const noexcept {
        return static_cast<double>(bits(slot, stream, index) >> 11) * 0x1.0p-53;
    }

    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
};

}  // namespace aloha
