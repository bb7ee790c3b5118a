#include <gtest/gtest.h>

#include <cmath>

#include "polystab/counter_rng.hpp"
#include "polystab/mc_harness.hpp"

using namespace polystab;

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswerZero) {
    const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
    const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
    const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterUniform, InOpenClosedUnitInterval) {
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = counter_uniform(5, 3, i);
        ASSERT_GT(u, 0.0);
        ASSERT_LE(u, 1.0);
    }
}

TEST(CounterNormal, MomentsMatchStandardNormal) {
    constexpr int n = 200000;
    double sum = 0.0, sum_sq = 0.0, sum_4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = counter_normal(17, static_cast<std::uint64_t>(i % 97), static_cast<std::uint64_t>(i));
        sum += z;
        sum_sq += z * z;
        sum_4 += z * z * z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(sum_4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(BrownianIncrement, PureFunctionOfKey) {
    EXPECT_EQ(brownian_increment(42, 7, 1000, 0.1), brownian_increment(42, 7, 1000, 0.1));
    EXPECT_NE(brownian_increment(42, 7, 1000, 0.1), brownian_increment(43, 7, 1000, 0.1));
    EXPECT_NE(brownian_increment(42, 7, 1000, 0.1), brownian_increment(42, 8, 1000, 0.1));
    EXPECT_NE(brownian_increment(42, 7, 1000, 0.1), brownian_increment(42, 7, 1001, 0.1));
}

TEST(BrownianIncrement, ScalesWithSqrtDt) {
    const double a = brownian_increment(1, 2, 3, 0.25);
    const double b = brownian_increment(1, 2, 3, 1.0);
    EXPECT_DOUBLE_EQ(a, 0.5 * b);
}
