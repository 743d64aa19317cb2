#include <gtest/gtest.h>

#include <cmath>
#include <mutex>
#include <set>

#include "prnet/error.hpp"
#include "prnet/harness.hpp"
#include "test_util.hpp"

using namespace prnet;

namespace {

// Records the training sizes it sees and scores every row with column 0.
NamedModel recording_model(std::multiset<std::size_t>& sizes, std::mutex& mu)
{
    return {"probe", [&sizes, &mu](const Dataset& train, std::uint64_t) -> Predictor {
                {
                    std::lock_guard lock(mu);
                    sizes.insert(train.n());
                }
                return [](const Dataset& ds) -> Vector { return ds.x().col(0); };
            }};
}

} // namespace

TEST(Generalization, ExactSubsampleSizesAndFullGrid)
{
    const auto loci = loci_for_genes({"A", "B", "C"});
    const auto train = test::random_binary_dataset(1, 100, loci, 0.4);
    std::vector<Dataset> evals{test::random_binary_dataset(2, 30, loci), test::random_binary_dataset(3, 30, loci)};
    std::multiset<std::size_t> sizes;
    std::mutex mu;
    GeneralizationOptions opt;
    opt.g1 = {loci[0], loci[3]};
    opt.threads = 1;
    const auto grid = generalization_run({recording_model(sizes, mu), baseline_model(BaselineKind::logistic_l2, {})},
                                         train, {20, 50, 80}, evals, loci, 5, opt);
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{20, 20, 50, 50, 80, 80}));
    EXPECT_EQ(grid.cells.size(), 2u * 3u * 2u * 2u);
    EXPECT_TRUE(grid.complete(2, 3, 2));
    for (const auto& c : grid.cells) {
        ASSERT_TRUE(c.metrics.has_value()) << c.error;
        EXPECT_GE(c.metrics->auc, 0.0);
        EXPECT_LE(c.metrics->auc, 1.0);
    }
    const double m = grid.mean("logistic_l2", GeneralizationMode::universe, &MetricSet::recall);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
}

TEST(Generalization, UniverseZeroFillsAndRestrictedRecordsErrors)
{
    const auto loci = loci_for_genes({"A", "B"});
    const auto train = test::random_binary_dataset(1, 40, loci);
    const auto narrow = test::random_binary_dataset(2, 20, loci_for_genes({"A"}));
    std::multiset<std::size_t> sizes;
    std::mutex mu;
    GeneralizationOptions opt;
    opt.g1 = {loci[4]};
    const auto grid = generalization_run({recording_model(sizes, mu)}, train, {20}, {narrow}, loci, 1, opt);
    ASSERT_EQ(grid.cells.size(), 2u);
    for (const auto& c : grid.cells) {
        if (c.mode == GeneralizationMode::universe) {
            EXPECT_TRUE(c.metrics.has_value()) << c.error;
        } else {
            EXPECT_FALSE(c.metrics.has_value());
            EXPECT_NE(c.error.find("B(cnv_amp)"), std::string::npos) << c.error;
        }
    }
    EXPECT_FALSE(grid.complete(1, 1, 1));
}

TEST(Generalization, RejectsBadSizes)
{
    const auto loci = loci_for_genes({"A"});
    const auto train = test::random_binary_dataset(1, 40, loci);
    std::multiset<std::size_t> sizes;
    std::mutex mu;
    EXPECT_THROW(generalization_run({recording_model(sizes, mu)}, train, {41}, {train}, loci, 1), ValidationError);
    EXPECT_THROW(generalization_run({recording_model(sizes, mu)}, train, {2}, {train}, loci, 1), ValidationError);
}

TEST(Timing, StatsUseSampleVariance)
{
    const auto s = timing_stats({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.variance, 1.0);
    EXPECT_DOUBLE_EQ(s.std_dev, 1.0);
    EXPECT_EQ(s.raw.size(), 3u);
    EXPECT_EQ(timing_stats({4.0}).variance, 0.0);
}

TEST(Timing, BenchmarkShape)
{
    const auto ds = test::random_binary_dataset(1, 40, loci_for_genes({"A", "B"}));
    const auto r = timing_benchmark({baseline_model(BaselineKind::decision_tree, {})}, ds, 3, 1);
    EXPECT_EQ(r.repetitions, 3);
    const auto& t = r.at("decision_tree");
    EXPECT_EQ(t.train.raw.size(), 3u);
    EXPECT_EQ(t.inference.raw.size(), 3u);
    for (double v : t.train.raw) EXPECT_GE(v, 0.0);
    EXPECT_THROW((void)r.at("nope"), ValidationError);
    EXPECT_THROW(timing_benchmark({}, ds, 0, 1), ValidationError);
}
