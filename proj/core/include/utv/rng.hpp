#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace utv {

// splitmix64 step, used to mix seeds for derived streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to two indices.
// Walk generation seeds per (seed, node, walk_index) so walks are
// reproducible regardless of generation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0,
                                 std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(base ^ 0x6a09e667f3bcc908ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    return s;
}

// mt19937_64 wrapper with distribution code pinned here. The standard
// distributions are implementation-defined, which would break bit-identical
// outputs across toolchains, so uniforms are drawn by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double next_in(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Uniform integer in [0, n), n >= 1, by rejection sampling.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    // Fisher-Yates shuffle driven by next_below.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace utv
