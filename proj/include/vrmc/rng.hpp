#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace vrmc {

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives the seed of child stream `stream` from `seed`. Pure function of its
/// inputs, so derived streams are reproducible in any order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

/**
 * Seeded random stream.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the
 * standard. Variates are produced here rather than through the standard
 * distributions (whose algorithms are implementation-defined) so that a seed
 * yields the same stream on every platform.
 *
 * Every draw consumes exactly one engine output:
 *   - uniform():      (x >> 11) * 2^-53, in [0, 1)
 *   - categorical():  one uniform(), inverse CDF scanned left to right
 *   - exponential():  one uniform(), -log(1 - u)
 *   - index(n):       one uniform(), floor(u * n)
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent child stream; does not advance this stream.
    Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

    std::uint64_t next_u64() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential() { return -std::log1p(-uniform()); }

    std::size_t index(std::size_t n) {
        const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    /// Samples an index from a probability row. Never returns an
    /// index whose probability is zero.
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform();
        double cumulative = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) continue;
            last_positive = i;
            cumulative += probs[i];
            if (u < cumulative) return i;
        }
        return last_positive;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace vrmc
