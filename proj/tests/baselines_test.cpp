#include <gtest/gtest.h>

#include <numeric>

#include "prnet/baselines.hpp"
#include "prnet/error.hpp"
#include "prnet/metrics.hpp"
#include "test_util.hpp"

using namespace prnet;

namespace {

// Label equals the first column; the rest is noise.
Dataset separable(std::size_t n, std::uint64_t seed)
{
    auto ds = test::random_binary_dataset(seed, n, test::mutation_loci(6), 0.5);
    Matrix x = ds.x();
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = ds.y()[static_cast<std::size_t>(i)];
    return Dataset(ds.sample_ids(), ds.loci(), std::move(x), ds.y(), "separable");
}

double accuracy(const BaselineModel& m, const Dataset& ds)
{
    const Vector s = predict_baseline(m, ds);
    return threshold_metrics({s.data(), static_cast<std::size_t>(s.size())}, ds.y()).accuracy;
}

} // namespace

TEST(Baselines, NamesRoundTrip)
{
    for (auto k : kBaselineKinds) EXPECT_EQ(baseline_kind_from_string(to_string(k)), k);
    EXPECT_THROW(baseline_kind_from_string("knn"), ValidationError);
    BaselineParams p;
    p.forest_trees = 0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Baselines, SeparableDataFitPerfectly)
{
    const auto ds = separable(120, 3);
    BaselineParams p;
    p.forest_trees = 15;
    for (auto k : kBaselineKinds) {
        const auto m = train_baseline(k, ds, p, 7);
        EXPECT_EQ(accuracy(m, ds), 1.0) << to_string(k);
        const Vector s = predict_baseline(m, ds);
        EXPECT_TRUE((s.array() >= 0.0).all() && (s.array() <= 1.0).all()) << to_string(k);
    }
}

TEST(Baselines, StumpCannotFitXor)
{
    const auto ds = test::make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 0}, {0, 1}, {1, 0}, {1, 1}},
                                       {0, 1, 1, 0, 0, 1, 1, 0});
    std::vector<std::size_t> rows(8);
    std::iota(rows.begin(), rows.end(), 0);
    TreeOptions o;
    o.max_depth = 1;
    const auto stump = fit_tree(ds.x(), ds.y(), rows, o, 0);
    EXPECT_LE(stump.depth(), 1);
    int correct = 0;
    for (Eigen::Index i = 0; i < 8; ++i)
        correct += (stump.predict_row(ds.x(), i) >= 0.5) == (ds.y()[static_cast<std::size_t>(i)] == 1);
    EXPECT_LE(correct, 6);
}

TEST(Baselines, HeavyRegularizationShrinksWeights)
{
    const auto ds = separable(80, 4);
    BaselineParams p;
    p.l2_lambda = 1e6;
    const auto m = train_baseline(BaselineKind::logistic_l2, ds, p, 0);
    EXPECT_LT(m.weights.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Baselines, ZeroWeightsGiveHalf)
{
    const auto ds = separable(10, 1);
    BaselineModel m;
    m.kind = BaselineKind::logistic_l2;
    m.loci = ds.loci();
    m.weights = Vector::Zero(6);
    const Vector s = predict_baseline(m, ds);
    EXPECT_TRUE((s.array() == 0.5).all());
}

TEST(Baselines, SingleTreeForestMatchesItsTree)
{
    const auto ds = separable(60, 9);
    BaselineParams p;
    p.forest_trees = 1;
    const auto forest = train_baseline(BaselineKind::random_forest, ds, p, 5);
    ASSERT_EQ(forest.trees.size(), 1u);
    const Vector s = predict_baseline(forest, ds);
    for (Eigen::Index i = 0; i < ds.x().rows(); ++i) EXPECT_EQ(s(i), forest.trees[0].predict_row(ds.x(), i));
}

TEST(Baselines, DeterministicAndLocusChecked)
{
    const auto ds = separable(60, 2);
    BaselineParams p;
    p.forest_trees = 10;
    for (auto k : kBaselineKinds)
        EXPECT_EQ(predict_baseline(train_baseline(k, ds, p, 3), ds), predict_baseline(train_baseline(k, ds, p, 3), ds));
    const auto m = train_baseline(BaselineKind::linear_svm, ds, p, 0);
    const auto other = test::random_binary_dataset(1, 4, test::mutation_loci(5));
    EXPECT_THROW(predict_baseline(m, other), ConstraintViolation);
}
