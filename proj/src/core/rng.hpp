#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>

namespace badbox {

// Deterministic generator used for every seeded decision in the toolkit.
// splitmix64 with hand-rolled distributions: the standard <random>
// distributions are implementation-defined, which would break the
// byte-identical-artifacts contract across toolchains. The constants below
// are frozen; changing them changes every seeded output file.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % bound;
        }
    }

    // Inclusive range.
    int next_int(int lo, int hi) {
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    double next_real_in(double lo, double hi) {
        return lo + (hi - lo) * next_real();
    }

    // Box-Muller. Consumes exactly two uniforms and yields two normals;
    // callers that need a fixed draw count per item must take the pair.
    std::pair<double, double> next_gaussian_pair() {
        const double u1 = 1.0 - next_real(); // (0, 1]
        const double u2 = next_real();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

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

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Per-item seed derivation: a pure function of (master_seed, key), so the
// schedule that visits items cannot influence their random streams.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view key) {
    return mix64(mix64(master_seed) ^ fnv1a64(key));
}

} // namespace badbox
