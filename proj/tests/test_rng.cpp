#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "bogolyubov/rng.hpp"

using namespace bogolyubov;

// =============================================================================
// Philox known-answer vectors (Random123 kat_vectors)
// =============================================================================

TEST(Philox, KnownAnswerZero) {
    const auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(r[0], 0x6627e8d5u);
    EXPECT_EQ(r[1], 0xe169c58du);
    EXPECT_EQ(r[2], 0xbc57ac4cu);
    EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
    const auto r = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(r[0], 0x408f276du);
    EXPECT_EQ(r[1], 0x41c83b0eu);
    EXPECT_EQ(r[2], 0xa20bc7c6u);
    EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    const auto r = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(r[0], 0xd16cfe09u);
    EXPECT_EQ(r[1], 0x94fdccebu);
    EXPECT_EQ(r[2], 0x5001e420u);
    EXPECT_EQ(r[3], 0x24126ea1u);
}

// =============================================================================
// Derived variates
// =============================================================================

TEST(StandardNormal, PureFunctionOfKey) {
    EXPECT_EQ(standard_normal(7, 3, 11), standard_normal(7, 3, 11));
    EXPECT_EQ(standard_normal(7, 3, -11), standard_normal(7, 3, -11));
    EXPECT_NE(standard_normal(7, 3, 11), standard_normal(7, 4, 11));
    EXPECT_NE(standard_normal(7, 3, 11), standard_normal(8, 3, 11));
    EXPECT_NE(standard_normal(7, 3, 11), standard_normal(7, 3, 12));
    EXPECT_NE(standard_normal(7, 3, 11, 0), standard_normal(7, 3, 11, 1));
}

TEST(StandardNormal, Moments) {
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0, lag = 0.0, prev = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = standard_normal(1234, 5, k - n / 2);
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
        lag += z * prev;
        prev = z;
    }
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(s1 / n, 0.0, 5 * sd);
    EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0) * sd);
    EXPECT_NEAR(s4 / n, 3.0, 5 * std::sqrt(96.0) * sd);
    EXPECT_NEAR(lag / n, 0.0, 5 * sd);
}

TEST(StandardNormal, TailFrequency) {
    const int n = 200000;
    int beyond = 0;
    for (int k = 0; k < n; ++k) beyond += std::abs(standard_normal(99, 0, k)) > 1.959963984540054;
    const double p = static_cast<double>(beyond) / n;
    EXPECT_NEAR(p, 0.05, 5 * std::sqrt(0.05 * 0.95 / n));
}

TEST(Uniform, RangeAndMean) {
    const int n = 100000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double u = uniform01(1, 2, static_cast<std::uint64_t>(k));
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12.0 / n));
}

TEST(MixSeed, DistinctAndDeterministic) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t salt = 0; salt < 1000; ++salt) seen.insert(mix_seed(42, salt));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(mix_seed(42, 7), mix_seed(42, 7));
    EXPECT_NE(mix_seed(42, 7), mix_seed(43, 7));
}
