#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace regkit {

// SplitMix64 generator (Steele, Lea, Flood 2014). Chosen over mt19937_64
// because the whole state is one word, which makes the per-module stream
// derivation below trivial to document and to reproduce in other languages.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Desk-scale n, so the modulo bias (< n / 2^64) is far below any
        // tolerance used in this project.
        return next_u64() % n;
    }

    bool next_bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stream discipline: every module draws from its own stream, derived from
// the experiment seed and the module's name. Derivation: run one SplitMix64
// step over (seed XOR fnv1a64(name)). Reordering work across modules then
// never perturbs another module's randomness.
inline Rng substream(std::uint64_t seed, std::string_view module_name) {
    Rng mix(seed ^ fnv1a64(module_name));
    return Rng(mix.next_u64());
}

}  // namespace regkit
