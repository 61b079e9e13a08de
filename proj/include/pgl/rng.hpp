#pragma once

#include <cstdint>

#include "pgl/normal.hpp"

// Counter-based randomness: every draw is a pure function of (key, index),
// so parallel workers can fill disjoint index ranges in any order and still
// produce the exact bytes a serial run would. Keys for sub-streams come
// from derive_key, which hashes through a separate domain so a derived key
// never collides with a draw index of its parent.

namespace pgl {
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 sequence for a hashed per-key seed, evaluated at `index`.
inline std::uint64_t u64_at(std::uint64_t key, std::uint64_t index) {
    const std::uint64_t state = mix64(key ^ kGamma) + (index + 1) * kGamma;
    return mix64(state);
}

// Sub-stream keys live in their own domain (salted) to keep stream
// derivation and value draws from ever aliasing.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t stream) {
    return u64_at(key ^ 0xD1B54A32D192ED03ULL, stream);
}

// Uniform on the open interval (0,1); never returns 0 or 1, so the
// inverse CDF below always gets a finite argument.
inline double uniform_at(std::uint64_t key, std::uint64_t index) {
    return static_cast<double>(u64_at(key, index) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Standard normal by inverse CDF; bit-exact for a given (key, index).
inline double normal_at(std::uint64_t key, std::uint64_t index) {
    return inverse_normal_cdf(uniform_at(key, index));
}

}  // namespace rng

// Sequential façade over the counter-based core, for call sites that just
// want "the next draw" from a named stream.
class RngStream {
public:
    explicit RngStream(std::uint64_t key, std::uint64_t start = 0) : key_(key), next_(start) {}

    std::uint64_t next_u64() { return rng::u64_at(key_, next_++); }
    double next_uniform() { return rng::uniform_at(key_, next_++); }
    double next_normal() { return rng::normal_at(key_, next_++); }

    // uniform integer in [0, n) by rejection, unbiased
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = n * (~0ULL / n);
        for (;;) {
            const std::uint64_t v = next_u64();
            if (v < limit) return v % n;
        }
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t next_;
};

}  // namespace pgl
