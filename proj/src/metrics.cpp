#include "prnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "prnet/error.hpp"

namespace prnet {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> y)
{
    if (scores.size() != y.size())
        throw ShapeError(fmt::format("{} scores for {} labels", scores.size(), y.size()));
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw ValidationError(fmt::format("score {} is not finite", i));
        if (y[i] != 0 && y[i] != 1) throw ValidationError(fmt::format("label {} is not binary", i));
    }
}

} // namespace

double auc(std::span<const double> scores, std::span<const int> y)
{
    check_inputs(scores, y);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    // Twice the Mann-Whitney U, counted exactly over tie groups.
    std::uint64_t twice_u = 0, neg_below = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t gp = 0, gn = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (y[order[j]] == 1 ? gp : gn) += 1;
            ++j;
        }
        twice_u += 2 * gp * neg_below + gp * gn;
        neg_below += gn;
        pos += gp;
        neg += gn;
        i = j;
    }
    if (pos == 0 || neg == 0) throw UndefinedMetricError("AUC is undefined: only one class present");
    return static_cast<double>(twice_u) / static_cast<double>(2 * pos * neg);
}

MetricSet threshold_metrics(std::span<const double> scores, std::span<const int> y, double threshold)
{
    check_inputs(scores, y);
    if (scores.empty()) throw EmptyDatasetError("no scores to evaluate");
    MetricSet m;
    m.threshold = threshold;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (y[i] == 1)
            (predicted ? m.tp : m.fn) += 1;
        else
            (predicted ? m.fp : m.tn) += 1;
    }
    auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
    m.recall = ratio(m.tp, m.tp + m.fn);
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.accuracy = ratio(m.tp + m.tn, scores.size());
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.auc = (m.tp + m.fn > 0 && m.tn + m.fp > 0) ? auc(scores, y) : std::numeric_limits<double>::quiet_NaN();
    return m;
}

} // namespace prnet
