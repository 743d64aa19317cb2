#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <memory>
#include <string>
#include <vector>

#include "prnet/dataset.hpp"

namespace prnet {

enum class BaselineKind { decision_tree, logistic_l2, random_forest, linear_svm, rbf_classifier };

inline constexpr std::array<BaselineKind, 5> kBaselineKinds{
    BaselineKind::decision_tree, BaselineKind::logistic_l2, BaselineKind::random_forest, BaselineKind::linear_svm,
    BaselineKind::rbf_classifier};

std::string to_string(BaselineKind k);
BaselineKind baseline_kind_from_string(const std::string& s);

struct BaselineParams {
    int tree_max_depth = 8;
    double l2_lambda = 1e-2;
    int forest_trees = 100;
    double svm_lambda = 1e-3;
    // <= 0 means 1 / m.
    double rbf_gamma = 0.0;
    double rbf_lambda = 1e-2;
    int max_iterations = 500;
    unsigned threads = 0;

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;     // x[feature] <= threshold
    int right = -1;
    double value = 0.0;  // positive fraction of the samples reaching the node
};

// CART with Gini impurity.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    [[nodiscard]] double predict_row(const Matrix& x, Eigen::Index row) const;
    [[nodiscard]] int depth() const;
};

struct TreeOptions {
    int max_depth = 8;
    // 0 = all features at every split.
    std::size_t features_per_split = 0;
    std::size_t min_samples_split = 2;
};

DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                      const TreeOptions& options, std::uint64_t seed);

struct BaselineModel {
    BaselineKind kind = BaselineKind::decision_tree;
    std::vector<LocusId> loci;
    BaselineParams params;

    std::vector<DecisionTree> trees;  // decision_tree (1) or random_forest
    Vector weights;                   // logistic_l2, linear_svm
    double intercept = 0.0;
    Vector dual;                      // rbf_classifier coefficients
    Matrix support;                   // rbf_classifier training rows
    double gamma = 0.0;

    int iterations = 0;
    double final_objective = 0.0;
};

BaselineModel train_baseline(BaselineKind kind, const Dataset& ds, const BaselineParams& params, std::uint64_t seed);

// Scores in [0, 1]. Throws ConstraintViolation on a locus mismatch.
Vector predict_baseline(const BaselineModel& model, const Dataset& ds);

} // namespace prnet
