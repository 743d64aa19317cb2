#pragma once

#include <cstddef>
#include <span>

namespace prnet {

inline constexpr double kDefaultThreshold = 0.5;

// Mann-Whitney AUC; ties count one half. Throws UndefinedMetricError when a
// class is absent.
double auc(std::span<const double> scores, std::span<const int> y);

struct MetricSet {
    double auc = 0.0;  // NaN when undefined
    double recall = 0.0;
    double precision = 0.0;
    double accuracy = 0.0;
    double f1 = 0.0;
    double threshold = kDefaultThreshold;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Confusion counts at score >= threshold. AUC is filled when both classes
// are present.
MetricSet threshold_metrics(std::span<const double> scores, std::span<const int> y,
                            double threshold = kDefaultThreshold);

} // namespace prnet
