#pragma once

#include <cstdint>

#include "sawpull/errors.hpp"

namespace sawpull {

// splitmix64 finalizer (Steele, Lea & Flood; public-domain reference
// constants). Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based splitmix64 stream. The whole state is one word, so a stream
// is fully determined by its construction arguments; there is no global or
// thread-local state anywhere.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // uniform in [0, 1) with 53 random bits
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // exactly uniform in [0, bound): rejection on the short partial cycle
    std::uint32_t next_below(std::uint32_t bound) {
        if (bound == 0) throw DomainError("next_below needs bound >= 1");
        const std::uint64_t reject = (0 - std::uint64_t{bound}) % bound;  // 2^64 mod bound
        std::uint64_t z = next();
        while (z < reject) z = next();
        return static_cast<std::uint32_t>(z % bound);
    }

private:
    std::uint64_t state_;
};

// Independent reproducible stream for (seed, stream index). Derivation is
// counter-based: any stream can be constructed directly without sequencing
// through the others, which is what makes worker scheduling irrelevant.
inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t state =
        mix64(seed + 0x9E3779B97F4A7C15ULL) ^ mix64(stream ^ 0xD1B54A32D192ED03ULL);
    return SplitMix64(mix64(state));
}

}  // namespace sawpull
