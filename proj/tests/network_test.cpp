#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "prnet/error.hpp"
#include "prnet/metrics.hpp"
#include "prnet/network.hpp"
#include "test_util.hpp"

using namespace prnet;

namespace {

bool masked_entries_zero(const MaskedNetwork& net)
{
    for (const auto& l : net.layers) {
        const Eigen::MatrixXd off = l.dense_weights().array() * (1.0 - l.mask.to_dense().array());
        if (!(off.array() == 0.0).all()) return false;
    }
    return true;
}

PathwayHierarchy chain(std::size_t levels)
{
    PathwayHierarchy h;
    h.genes = {"A"};
    for (std::size_t k = 0; k < levels; ++k) h.levels.push_back({fmt::format("P{}", k)});
    h.gene_edges = {{"A", "P0"}};
    h.pathway_edges.resize(levels - 1);
    for (std::size_t k = 0; k + 1 < levels; ++k) h.pathway_edges[k] = {{fmt::format("P{}", k), fmt::format("P{}", k + 1)}};
    return validate_hierarchy(h);
}

double sigmoid(double a)
{
    return 1.0 / (1.0 + std::exp(-a));
}

} // namespace

TEST(InitNetwork, MaskedEntriesAreZero)
{
    const auto net = test::random_network(3, {12, 6, 3}, 0.3);
    EXPECT_TRUE(masked_entries_zero(net));
    EXPECT_EQ(net.layers.size(), 2u);
    EXPECT_EQ(net.heads.size(), net.layers.size());
    EXPECT_NEAR(std::accumulate(net.head_weights.begin(), net.head_weights.end(), 0.0), 1.0, 1e-12);
}

TEST(InitNetwork, SameSeedSameWeights)
{
    const auto masks = test::random_masks(5, {20, 8, 4}, 0.3);
    EXPECT_EQ(flatten_parameters(init_network(masks, 1)), flatten_parameters(init_network(masks, 1)));
    EXPECT_NE(flatten_parameters(init_network(masks, 1)), flatten_parameters(init_network(masks, 2)));
}

TEST(InitNetwork, FanInBound)
{
    // column 0 has fan-in 4, column 1 fan-in 1
    MaskStack s;
    s.loci = test::mutation_loci(4);
    s.nodes = {{"a", "b"}};
    s.masks.emplace_back(4, 2, std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {0, 1}});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto net = init_network(s, seed);
        const auto& w = net.layers[0].weights;
        for (std::size_t p = 0; p < 4; ++p) EXPECT_LE(std::abs(w[p]), 1.0 / std::sqrt(4.0));
        EXPECT_LE(std::abs(w[4]), 1.0);
    }
}

TEST(HeadWeights, Validated)
{
    auto net = test::random_network(1, {4, 2, 1}, 0.5);
    EXPECT_THROW(set_head_weights(net, {0.5}), ShapeError);
    EXPECT_THROW(set_head_weights(net, {-0.5, 1.5}), ValidationError);
    EXPECT_THROW(set_head_weights(net, {0.5, 0.6}), ValidationError);
    set_head_weights(net, {0.25, 0.75});
    EXPECT_EQ(net.head_weights[1], 0.75);
}

TEST(Forward, ZeroInputGivesHalf)
{
    const auto net = init_network(test::random_masks(2, {10, 5, 2}, 0.4), 3);
    const std::vector<double> x(10, 0.0);
    const auto r = forward(net, x);
    for (double h : r.head_outputs) EXPECT_EQ(h, 0.5);
    EXPECT_EQ(r.final, 0.5);
}

TEST(Forward, ScalarChainByHand)
{
    const auto h = chain(6);
    auto net = init_network(build_masks(h, {{"A", Channel::mutation}}), 0);
    for (auto& l : net.layers) l.weights = {1.0};
    for (auto& hd : net.heads) {
        hd.w = {1.0};
        hd.b = 0.0;
    }
    const std::vector<double> x{1.0};
    double v = 1.0, expected = 0.0;
    for (int k = 0; k < 7; ++k) {
        v = std::tanh(v);
        expected += sigmoid(v) / 7.0;
    }
    EXPECT_NEAR(forward(net, x).final, expected, 1e-12);
}

TEST(Forward, FinalIsConvexCombination)
{
    const auto net = test::random_network(7, {15, 6, 3, 2}, 0.3);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(15);
        for (auto& v : x) v = n(rng);
        const auto r = forward(net, x);
        const auto [lo, hi] = std::minmax_element(r.head_outputs.begin(), r.head_outputs.end());
        EXPECT_LE(*lo, r.final + 1e-15);
        EXPECT_GE(*hi, r.final - 1e-15);
    }
}

TEST(Forward, WrongWidthRejected)
{
    const auto net = test::random_network(7, {5, 2}, 0.5);
    EXPECT_THROW(forward(net, std::vector<double>(4)), ShapeError);
}

TEST(Gradient, MatchesCentralDifferences)
{
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto net = test::random_network(100 + seed, {10, 6, 3, 2}, 0.35);
        ASSERT_LE(flatten_parameters(net).size(), 200u);
        const auto ds = test::random_binary_dataset(seed, 12, net.input_loci, 0.5);
        std::vector<std::size_t> rows(ds.n());
        std::iota(rows.begin(), rows.end(), 0);
        const auto lg = loss_and_gradient(net, ds.x(), ds.y(), rows, 1.7);
        auto params = flatten_parameters(net);
        double worst = 0.0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto probe = net;
            auto p = params;
            p[i] += 1e-5;
            assign_parameters(probe, p);
            const double up = loss_and_gradient(probe, ds.x(), ds.y(), rows, 1.7).loss;
            p[i] -= 2e-5;
            assign_parameters(probe, p);
            const double down = loss_and_gradient(probe, ds.x(), ds.y(), rows, 1.7).loss;
            const double numeric = (up - down) / 2e-5;
            const double err = std::abs(lg.gradient[i] - numeric) /
                               std::max({std::abs(lg.gradient[i]), std::abs(numeric), 1e-6});
            worst = std::max(worst, err);
        }
        EXPECT_LE(worst, 1e-4) << "seed " << seed;
    }
}

TEST(Train, EpochsZeroForbiddenOneRunsOnce)
{
    const auto net = test::random_network(1, {8, 4, 2}, 0.4);
    const auto ds = test::random_binary_dataset(2, 40, net.input_loci);
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_THROW(train(net, ds, cfg), ValidationError);
    cfg.epochs = 1;
    const auto r = train(net, ds, cfg);
    EXPECT_EQ(r.report.epoch_losses.size(), 1u);
    EXPECT_EQ(r.report.stopped_epoch, 1);
}

TEST(Train, MaskInvariantAfterEveryEpoch)
{
    auto net = test::random_network(4, {16, 6, 3}, 0.25);
    const auto ds = test::random_binary_dataset(5, 60, net.input_loci);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 0.05;
    cfg.validation_fraction = 0.0;
    for (int e = 0; e < 8; ++e) {
        cfg.seed = static_cast<std::uint64_t>(e);
        net = train(net, ds, cfg).net;
        ASSERT_TRUE(masked_entries_zero(net)) << "epoch " << e;
    }
}

TEST(Train, SeparableDataLearned)
{
    const auto syn = generate_synthetic(400, 10, 10, 0.0, 12);
    const auto h = generate_toy_hierarchy(10, {4, 2}, 2, 1);
    const auto masks = build_masks(h, syn.dataset.loci());
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 300;
    cfg.early_stop_patience = 300;
    cfg.validation_fraction = 0.0;
    const auto r = train(init_network(masks, 3), syn.dataset, cfg);
    const Vector s = predict(r.net, syn.dataset);
    EXPECT_GE(auc({s.data(), static_cast<std::size_t>(s.size())}, syn.dataset.y()), 0.99);
    EXPECT_LT(r.report.epoch_losses.back(), r.report.epoch_losses.front());
}

TEST(Train, EarlyStoppingRecordsValidation)
{
    const auto syn = generate_synthetic(300, 20, 3, 0.5, 2);
    const auto h = generate_toy_hierarchy(20, {6, 2}, 2, 1);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.early_stop_patience = 3;
    const auto r = train(init_network(build_masks(h, syn.dataset.loci()), 1), syn.dataset, cfg);
    EXPECT_EQ(r.report.validation_auc.size(), r.report.epoch_losses.size());
    EXPECT_LE(r.report.best_epoch, r.report.stopped_epoch);
    EXPECT_GE(r.report.best_epoch, 1);
}

TEST(Predict, UntrainedZeroMatrix)
{
    const auto net = init_network(test::random_masks(3, {6, 3}, 0.5), 1);
    const Dataset ds({"a", "b", "c"}, net.input_loci, Matrix::Zero(3, 6), {0, 1, 0});
    const Vector p = predict(net, ds);
    EXPECT_TRUE((p.array() == 0.5).all());
}

TEST(Predict, PureAndMatchesRowByRow)
{
    const auto net = test::random_network(8, {12, 5, 2}, 0.3);
    const auto ds = test::random_binary_dataset(9, 50, net.input_loci);
    const Vector a = predict(net, ds), b = predict(net, ds);
    EXPECT_EQ(a, b);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < ds.x().rows(); ++i) {
        std::vector<double> row(ds.m());
        for (std::size_t j = 0; j < ds.m(); ++j) row[j] = ds.x()(i, static_cast<Eigen::Index>(j));
        worst = std::max(worst, std::abs(forward(net, row).final - a(i)));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Predict, LocusMismatchRejected)
{
    const auto net = test::random_network(8, {3, 2}, 0.5);
    const auto ds = test::random_binary_dataset(9, 4, test::mutation_loci(2));
    EXPECT_THROW(predict(net, ds), ConstraintViolation);
}

TEST(CountParams, FullCohortInputLayer)
{
    const auto h = generate_toy_hierarchy(9229, {1024, 512, 256, 128, 64, 32}, 3, 2);
    const auto full = init_network(build_masks(h, loci_for_genes(h.genes)), 1);
    const auto full_count = count_params(full);
    EXPECT_EQ(full_count.input_connections, 27687u);
    std::vector<std::string> keep(h.genes.begin(), h.genes.begin() + 46);
    const auto pruned = init_network(build_masks(h, loci_for_genes(keep)), 1);
    const auto pruned_count = count_params(pruned);
    EXPECT_EQ(pruned_count.input_connections, 138u);
    EXPECT_NEAR(1.0 - 138.0 / 27687.0, 0.995, 5e-5);
    EXPECT_GE(1.0 - static_cast<double>(pruned_count.total) / static_cast<double>(full_count.total), 0.8);
}

TEST(CountParams, ChainDepthSeven)
{
    const auto net = init_network(build_masks(chain(6), {{"A", Channel::mutation}}), 0);
    const auto c = count_params(net);
    EXPECT_EQ(c.total, 28u);
    EXPECT_EQ(c.heads, 14u);
    EXPECT_EQ(net.parameter_count(), 28u);
    EXPECT_EQ(flatten_parameters(net).size(), 28u);
}

TEST(Serialization, RoundTrip)
{
    test::TempDir dir;
    auto net = test::random_network(21, {9, 4, 2}, 0.4);
    net.hierarchy_hash = "abc";
    save_network(net, dir / "m.json", dir / "m.bin");
    EXPECT_EQ(std::filesystem::file_size(dir / "m.bin"), 8 * flatten_parameters(net).size());
    const auto back = load_network(dir / "m.json");
    EXPECT_TRUE(back.same_structure(net));
    EXPECT_EQ(flatten_parameters(back), flatten_parameters(net));
    EXPECT_EQ(back.head_weights, net.head_weights);
    EXPECT_EQ(back.hierarchy_hash, "abc");
    const auto ds = test::random_binary_dataset(1, 10, net.input_loci);
    EXPECT_EQ(predict(back, ds), predict(net, ds));
}

TEST(Serialization, TamperedBlobRejected)
{
    test::TempDir dir;
    const auto net = test::random_network(22, {5, 2}, 0.5);
    save_network(net, dir / "m.json", dir / "m.bin");
    auto bytes = test::slurp(dir / "m.bin");
    bytes[3] ^= 0x1;
    test::spit(dir / "m.bin", bytes);
    EXPECT_THROW(load_network(dir / "m.json"), ValidationError);
}
