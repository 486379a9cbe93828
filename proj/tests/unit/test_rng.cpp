#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "support/oracles.hpp"
#include "vrmc/rng.hpp"

using namespace vrmc;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformMatchesDocumentedFormula) {
    Rng rng(123);
    oracle::ReplayRng replay(123);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        ASSERT_EQ(u, replay.uniform());
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, ExponentialAndIndexUseOneUniform) {
    Rng rng(9);
    oracle::ReplayRng replay(9);
    EXPECT_EQ(rng.exponential(), -std::log1p(-replay.uniform()));
    EXPECT_EQ(rng.index(7), static_cast<std::size_t>(replay.uniform() * 7.0));
}

TEST(Rng, CategoricalNeverReturnsZeroMass) {
    Rng rng(5);
    const std::vector<double> p{0.0, 0.5, 0.0, 0.5, 0.0};
    for (int i = 0; i < 10000; ++i) {
        const std::size_t k = rng.categorical(p);
        ASSERT_TRUE(k == 1 || k == 3);
    }
}

TEST(Rng, CategoricalRoundingFallsBackToLastPositive) {
    // Rows that sum to slightly less than one must still return a supported index.
    Rng rng(11);
    const std::vector<double> p{0.3, 0.3, 0.3999999999, 0.0};
    for (int i = 0; i < 100000; ++i) ASSERT_LT(rng.categorical(p), 3u);
}

TEST(Rng, CategoricalFrequencies) {
    Rng rng(77);
    const std::vector<double> p{0.1, 0.2, 0.7};
    std::vector<int> count(3, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) ++count[rng.categorical(p)];
    for (std::size_t k = 0; k < 3; ++k) {
        const double se = std::sqrt(p[k] * (1 - p[k]) / n);
        EXPECT_NEAR(count[k] / static_cast<double>(n), p[k], 4 * se);
    }
}

TEST(Rng, DerivedSeedsAreDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 50; ++s) {
        for (std::uint64_t k = 0; k < 50; ++k) seen.insert(derive_seed(s, k));
    }
    EXPECT_EQ(seen.size(), 2500u);
    EXPECT_EQ(Rng(3).split(4).seed(), derive_seed(3, 4));
}

TEST(Rng, SplitmixKnownValue) {
    // First output of the reference splitmix64 generator seeded with 0.
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFull);
}
