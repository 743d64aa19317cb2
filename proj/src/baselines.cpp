#include "prnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "prnet/error.hpp"
#include "prnet/parallel.hpp"
#include "prnet/random.hpp"

namespace prnet {

std::string to_string(BaselineKind k)
{
    switch (k) {
    case BaselineKind::decision_tree: return "decision_tree";
    case BaselineKind::logistic_l2: return "logistic_l2";
    case BaselineKind::random_forest: return "random_forest";
    case BaselineKind::linear_svm: return "linear_svm";
    case BaselineKind::rbf_classifier: return "rbf_classifier";
    }
    return "unknown";
}

BaselineKind baseline_kind_from_string(const std::string& s)
{
    for (auto k : kBaselineKinds)
        if (to_string(k) == s) return k;
    throw ValidationError("unknown baseline '" + s + "'");
}

void BaselineParams::validate() const
{
    if (tree_max_depth < 1) throw ValidationError("tree_max_depth must be at least 1");
    if (!(l2_lambda >= 0.0)) throw ValidationError("l2_lambda must be non-negative");
    if (forest_trees < 1) throw ValidationError("forest_trees must be at least 1");
    if (!(svm_lambda > 0.0)) throw ValidationError("svm_lambda must be positive");
    if (!(rbf_lambda > 0.0)) throw ValidationError("rbf_lambda must be positive");
    if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
}

// ---------------------------------------------------------------------------
// CART

double DecisionTree::predict_row(const Matrix& x, Eigen::Index row) const
{
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x(row, n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

int DecisionTree::depth() const
{
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

namespace {

double gini_sum(double pos, double total)
{
    if (total <= 0.0) return 0.0;
    const double p = pos / total;
    return total * 2.0 * p * (1.0 - p);
}

struct TreeBuilder {
    const Matrix& x;
    std::span<const int> y;
    const TreeOptions& opt;
    std::vector<bool> binary;
    Rng rng;
    DecisionTree tree;

    int build(std::vector<std::size_t> rows, int depth)
    {
        double pos = 0.0;
        for (auto r : rows) pos += y[r];
        const double n = static_cast<double>(rows.size());
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, 0.0, -1, -1, n > 0 ? pos / n : 0.0});
        if (depth >= opt.max_depth || rows.size() < opt.min_samples_split || pos == 0.0 || pos == n) return id;

        std::vector<std::size_t> features(static_cast<std::size_t>(x.cols()));
        std::iota(features.begin(), features.end(), 0);
        if (opt.features_per_split > 0 && opt.features_per_split < features.size()) {
            std::shuffle(features.begin(), features.end(), rng);
            features.resize(opt.features_per_split);
            std::sort(features.begin(), features.end());
        }

        const double parent = gini_sum(pos, n);
        double best = parent - 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> vals;
        for (auto f : features) {
            const auto fi = static_cast<Eigen::Index>(f);
            if (binary[f]) {
                double ones = 0.0, ones_pos = 0.0;
                for (auto r : rows)
                    if (x(static_cast<Eigen::Index>(r), fi) != 0.0) {
                        ones += 1.0;
                        ones_pos += y[r];
                    }
                if (ones == 0.0 || ones == n) continue;
                const double g = gini_sum(pos - ones_pos, n - ones) + gini_sum(ones_pos, ones);
                if (g < best) {
                    best = g;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5;
                }
                continue;
            }
            vals.clear();
            for (auto r : rows) vals.emplace_back(x(static_cast<Eigen::Index>(r), fi), y[r]);
            std::sort(vals.begin(), vals.end());
            double left = 0.0, left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                left += 1.0;
                left_pos += vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                const double g = gini_sum(left_pos, left) + gini_sum(pos - left_pos, n - left);
                if (g < best) {
                    best = g;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> l, r;
        for (auto row : rows)
            (x(static_cast<Eigen::Index>(row), best_feature) <= best_threshold ? l : r).push_back(row);
        rows.clear();
        rows.shrink_to_fit();
        const int left_id = build(std::move(l), depth + 1);
        const int right_id = build(std::move(r), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left_id;
        node.right = right_id;
        return id;
    }
};

std::vector<bool> binary_columns(const Matrix& x)
{
    std::vector<bool> b(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        b[static_cast<std::size_t>(j)] = ((x.col(j).array() == 0.0) || (x.col(j).array() == 1.0)).all();
    return b;
}

double sigmoid(double z)
{
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double log1pexp(double z)
{
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

} // namespace

DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                      const TreeOptions& options, std::uint64_t seed)
{
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("tree inputs differ in length");
    if (rows.empty()) throw EmptyDatasetError("no rows to fit a tree on");
    TreeBuilder b{x, y, options, binary_columns(x), Rng(seed), {}};
    b.build(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
    return std::move(b.tree);
}

// ---------------------------------------------------------------------------
// Linear models

namespace {

// Largest squared norm of a sample with a constant 1 appended.
double max_augmented_norm2(const Matrix& x)
{
    return x.rowwise().squaredNorm().maxCoeff() + 1.0;
}

void fit_logistic(BaselineModel& m, const Matrix& x, const Vector& y)
{
    const double n = static_cast<double>(x.rows());
    const double lambda = m.params.l2_lambda;
    const double step = 1.0 / (0.25 * max_augmented_norm2(x) + lambda);
    const double prior = y.mean();
    m.weights = Vector::Zero(x.cols());
    m.intercept = std::log(prior / (1.0 - prior));
    for (m.iterations = 0; m.iterations < m.params.max_iterations; ++m.iterations) {
        const Vector z = (x * m.weights).array() + m.intercept;
        const Vector r = z.unaryExpr(&sigmoid) - y;
        const Vector gw = x.transpose() * r / n + lambda * m.weights;
        const double gb = r.mean();
        m.weights -= step * gw;
        m.intercept -= step * gb;
        if (std::sqrt(gw.squaredNorm() + gb * gb) < 1e-6) break;
    }
    const Vector z = (x * m.weights).array() + m.intercept;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += log1pexp(z(i)) - y(i) * z(i);
    m.final_objective = loss / n + 0.5 * lambda * m.weights.squaredNorm();
}

void fit_svm(BaselineModel& m, const Matrix& x, const Vector& y01)
{
    const double n = static_cast<double>(x.rows());
    const double lambda = m.params.svm_lambda;
    const Vector s = 2.0 * y01.array() - 1.0;
    const double eta0 = 1.0 / std::sqrt(max_augmented_norm2(x));
    Vector w = Vector::Zero(x.cols());
    double b = 0.0;
    auto objective = [&](const Vector& margin, const Vector& wv) {
        return 0.5 * lambda * wv.squaredNorm() + (1.0 - margin.array()).max(0.0).sum() / n;
    };
    double best = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= m.params.max_iterations; ++t) {
        const Vector margin = s.array() * ((x * w).array() + b);
        const double obj = objective(margin, w);
        if (obj < best) {
            best = obj;
            m.weights = w;
            m.intercept = b;
        }
        Vector coef = Vector::Zero(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            if (margin(i) < 1.0) coef(i) = -s(i) / n;
        const Vector gw = x.transpose() * coef + lambda * w;
        const double gb = coef.sum();
        const double eta = eta0 / std::sqrt(static_cast<double>(t));
        w -= eta * gw;
        b -= eta * gb;
        m.iterations = t;
    }
    const Vector margin = s.array() * ((x * w).array() + b);
    if (objective(margin, w) < best) {
        best = objective(margin, w);
        m.weights = w;
        m.intercept = b;
    }
    m.final_objective = best;
}

Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma)
{
    const Vector na = a.rowwise().squaredNorm();
    const Vector nb = b.rowwise().squaredNorm();
    Matrix k = -2.0 * (a * b.transpose());
    k.colwise() += na;
    k.rowwise() += nb.transpose();
    return (-gamma * k.array().max(0.0)).exp().matrix();
}

double top_eigenvalue(const Matrix& k)
{
    Vector v = Vector::Ones(k.rows()).normalized();
    double lambda = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Vector w = k * v;
        const double next = w.norm();
        if (next == 0.0) return 0.0;
        v = w / next;
        if (std::abs(next - lambda) <= 1e-9 * next) return next;
        lambda = next;
    }
    return lambda;
}

void fit_rbf(BaselineModel& m, const Matrix& x, const Vector& y)
{
    const double n = static_cast<double>(x.rows());
    m.gamma = m.params.rbf_gamma > 0.0 ? m.params.rbf_gamma : 1.0 / static_cast<double>(x.cols());
    const double lambda = m.params.rbf_lambda;
    const Matrix k = rbf_gram(x, x, m.gamma);
    const double step = 1.0 / (0.25 * top_eigenvalue(k) / n + lambda);
    const double prior = y.mean();
    m.support = x;
    m.dual = Vector::Zero(x.rows());
    m.intercept = std::log(prior / (1.0 - prior));
    Vector f = Vector::Constant(x.rows(), m.intercept);
    for (m.iterations = 0; m.iterations < m.params.max_iterations; ++m.iterations) {
        const Vector r = (f.unaryExpr(&sigmoid) - y) / n;
        const Vector g = r + lambda * m.dual;
        m.dual -= step * g;
        // unregularized intercept, curvature <= 1/4; halved since dual moves too
        m.intercept -= 2.0 * r.sum();
        f = (k * m.dual).array() + m.intercept;
        if (g.norm() < 1e-8) break;
    }
    double loss = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) loss += log1pexp(f(i)) - y(i) * f(i);
    m.final_objective = loss / n + 0.5 * lambda * m.dual.dot(k * m.dual);
}

} // namespace

BaselineModel train_baseline(BaselineKind kind, const Dataset& ds, const BaselineParams& params, std::uint64_t seed)
{
    params.validate();
    if (ds.n() == 0) throw EmptyDatasetError("no training samples");
    if (!ds.has_both_classes()) throw ValidationError("baseline training data must contain both classes");
    BaselineModel m;
    m.kind = kind;
    m.loci = ds.loci();
    m.params = params;
    const Matrix& x = ds.x();
    Vector y(static_cast<Eigen::Index>(ds.n()));
    for (std::size_t i = 0; i < ds.n(); ++i) y(static_cast<Eigen::Index>(i)) = ds.y()[i];

    switch (kind) {
    case BaselineKind::decision_tree: {
        std::vector<std::size_t> rows(ds.n());
        std::iota(rows.begin(), rows.end(), 0);
        m.trees.push_back(fit_tree(x, ds.y(), rows, {params.tree_max_depth, 0, 2}, seed));
        break;
    }
    case BaselineKind::random_forest: {
        const auto per_split = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(ds.m()))));
        m.trees.resize(static_cast<std::size_t>(params.forest_trees));
        parallel_for(m.trees.size(), params.threads, [&](std::size_t t) {
            Rng rng(derive_seed(seed, {0xf0e57, t}));
            std::uniform_int_distribution<std::size_t> pick(0, ds.n() - 1);
            std::vector<std::size_t> rows(ds.n());
            for (auto& r : rows) r = pick(rng);
            m.trees[t] = fit_tree(x, ds.y(), rows, {params.tree_max_depth, per_split, 2}, rng());
        });
        break;
    }
    case BaselineKind::logistic_l2: fit_logistic(m, x, y); break;
    case BaselineKind::linear_svm: fit_svm(m, x, y); break;
    case BaselineKind::rbf_classifier: fit_rbf(m, x, y); break;
    }
    return m;
}

Vector predict_baseline(const BaselineModel& model, const Dataset& ds)
{
    if (ds.loci() != model.loci)
        throw ConstraintViolation(fmt::format("dataset '{}' loci do not match the {} model inputs", ds.name(),
                                              to_string(model.kind)),
                                  {});
    const Matrix& x = ds.x();
    Vector out(static_cast<Eigen::Index>(ds.n()));
    switch (model.kind) {
    case BaselineKind::decision_tree:
    case BaselineKind::random_forest:
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double s = 0.0;
            for (const auto& t : model.trees) s += t.predict_row(x, i);
            out(i) = s / static_cast<double>(model.trees.size());
        }
        break;
    case BaselineKind::logistic_l2:
    case BaselineKind::linear_svm:
        out = ((x * model.weights).array() + model.intercept).matrix().unaryExpr(&sigmoid);
        break;
    case BaselineKind::rbf_classifier:
        out = ((rbf_gram(x, model.support, model.gamma) * model.dual).array() + model.intercept)
                  .matrix()
                  .unaryExpr(&sigmoid);
        break;
    }
    return out;
}

} // namespace prnet
