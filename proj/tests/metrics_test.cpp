#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "prnet/error.hpp"
#include "prnet/metrics.hpp"

using namespace prnet;

namespace {

// Pairwise definition: fraction of (positive, negative) pairs ordered
// correctly, ties counting one half.
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y)
{
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            pairs += 1.0;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

} // namespace

TEST(Auc, HandExamples)
{
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.1, 0.2, 0.3, 0.4}, std::vector<int>{0, 0, 1, 1}), 1.0);
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0, 1}), 0.5);
    EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<int>{0, 1}), 0.0);
}

TEST(Auc, UndefinedForSingleClass)
{
    EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetricError);
    EXPECT_THROW(auc(std::vector<double>{}, std::vector<int>{}), UndefinedMetricError);
    EXPECT_THROW(auc(std::vector<double>{0.1, NAN}, std::vector<int>{0, 1}), ValidationError);
}

TEST(Auc, MatchesPairwiseOracleWithTies)
{
    std::mt19937_64 rng(17);
    for (int c = 0; c < 1000; ++c) {
        const std::size_t n = 2 + rng() % 40;
        std::vector<double> s(n);
        std::vector<int> y(n);
        const int levels = 1 + static_cast<int>(rng() % 6);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % static_cast<unsigned>(levels)) / levels;
            y[i] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        ASSERT_NEAR(auc(s, y), pairwise_auc(s, y), 1e-12) << "case " << c;
    }
}

TEST(ThresholdMetrics, HandConfusion)
{
    const auto m = threshold_metrics(std::vector<double>{0.9, 0.2, 0.6, 0.1}, std::vector<int>{1, 1, 0, 0});
    EXPECT_EQ(m.tp, 1u);
    EXPECT_EQ(m.fn, 1u);
    EXPECT_EQ(m.fp, 1u);
    EXPECT_EQ(m.tn, 1u);
    EXPECT_DOUBLE_EQ(m.recall, 0.5);
    EXPECT_DOUBLE_EQ(m.precision, 0.5);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
    EXPECT_DOUBLE_EQ(m.f1, 0.5);
    EXPECT_DOUBLE_EQ(m.auc, 0.75);
}

TEST(ThresholdMetrics, InclusiveThresholdAndMissingClass)
{
    const auto m = threshold_metrics(std::vector<double>{0.5, 0.4}, std::vector<int>{1, 1});
    EXPECT_EQ(m.tp, 1u);
    EXPECT_EQ(m.fn, 1u);
    EXPECT_TRUE(std::isnan(m.auc));
    const auto none = threshold_metrics(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 1});
    EXPECT_EQ(none.precision, 0.0);
    EXPECT_EQ(none.f1, 0.0);
}
