#include <gtest/gtest.h>

#include "advisor/stats.hpp"

using namespace advisor;

TEST(Regression, FlatLine) {
    auto f = fit_regression({{1, 5}, {2, 5}, {3, 5}});
    EXPECT_DOUBLE_EQ(f.slope, 0.0);
    EXPECT_DOUBLE_EQ(f.intercept, 5.0);
}

TEST(Regression, ExactLine) {
    auto f = fit_regression({{0, 1}, {1, 3}, {2, 5}, {3, 7}});
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
}

TEST(Regression, NoisyPoints) {
    // x = 1..4, y = 1, 1, 2, 2: sxy = 2 and sxx = 5.
    auto f = fit_regression({{1, 1}, {2, 1}, {3, 2}, {4, 2}});
    EXPECT_NEAR(f.slope, 0.4, 1e-12);
    EXPECT_NEAR(f.intercept, 0.5, 1e-12);
}

TEST(Regression, HalfSlope) {
    auto f = fit_regression({{2, 1}, {4, 2}, {6, 3}});
    EXPECT_NEAR(f.slope, 0.5, 1e-12);
    EXPECT_NEAR(f.intercept, 0.0, 1e-12);
}

TEST(Regression, DegenerateInputsThrow) {
    EXPECT_THROW(fit_regression({{1, 1}}), std::invalid_argument);
    EXPECT_THROW(fit_regression({{1, 1}, {1, 2}}), std::invalid_argument);
}

// Reference values from scipy.stats.ttest_ind(a, b, equal_var=False, alternative="less").
TEST(Welch, MatchesReferenceImplementation) {
    auto c = compare_slopes({-0.12, -0.05, 0.01, -0.20, -0.08, 0.03}, {0.02, 0.10, -0.04, 0.07, 0.15});
    EXPECT_NEAR(c.t, -2.6879734136308087, 1e-12);
    EXPECT_NEAR(c.df, 8.97733393172951, 1e-10);
    EXPECT_NEAR(c.p_value, 0.012466371004687053, 1e-10);
    EXPECT_NEAR(c.difference, -0.41 / 6 - 0.06, 1e-12);
}

TEST(Welch, PositiveDifferenceGivesLargeP) {
    auto c = compare_slopes({1.0, 2.0, 3.0, 4.0}, {1.5, 2.5, 2.0});
    EXPECT_NEAR(c.t, 0.7071067811865476, 1e-12);
    EXPECT_NEAR(c.p_value, 0.741080869266932, 1e-10);
}

TEST(Welch, ZeroVarianceIsDecidedByTheMeans) {
    EXPECT_EQ(compare_slopes({1, 1}, {2, 2}).p_value, 0.0);
    EXPECT_EQ(compare_slopes({2, 2}, {1, 1}).p_value, 1.0);
    EXPECT_EQ(compare_slopes({1, 1}, {1, 1}).p_value, 0.5);
}

TEST(Welch, NeedsTwoPerGroup) { EXPECT_THROW(compare_slopes({1}, {1, 2}), std::invalid_argument); }
