#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prnet/baselines.hpp"
#include "prnet/dataset.hpp"
#include "prnet/metrics.hpp"
#include "prnet/network.hpp"
#include "prnet/pathway.hpp"
#include "prnet/pruning.hpp"

namespace prnet {

using Predictor = std::function<Vector(const Dataset&)>;
using ModelFactory = std::function<Predictor(const Dataset& train, std::uint64_t seed)>;

struct NamedModel {
    std::string name;
    ModelFactory fit;
};

// Full P-NET: masks built from the training data's loci.
NamedModel pnet_model(const PathwayHierarchy& hierarchy, const TrainConfig& cfg, std::string name = "P-NET");
// PR-NET: training and prediction data are passed through the g1 recipe.
NamedModel prnet_model(const PathwayHierarchy& hierarchy, const std::vector<LocusId>& g1, const TrainConfig& cfg,
                       std::string name = "PR-NET");
NamedModel baseline_model(BaselineKind kind, const BaselineParams& params);

// P-NET, PR-NET and the five baselines, in that order.
std::vector<NamedModel> standard_models(const PathwayHierarchy& hierarchy, const std::vector<LocusId>& g1,
                                        const TrainConfig& cfg, const BaselineParams& params);

enum class GeneralizationMode { universe, restricted };

std::string to_string(GeneralizationMode m);

struct GridCell {
    std::string model;
    GeneralizationMode mode = GeneralizationMode::universe;
    std::size_t train_size = 0;
    std::string eval_dataset;
    std::optional<MetricSet> metrics;
    std::string error;
};

struct GeneralizationGrid {
    std::vector<GridCell> cells;

    // Mean of a metric over the successful cells of one model and mode.
    [[nodiscard]] double mean(const std::string& model, GeneralizationMode mode,
                              double MetricSet::*field) const;
    [[nodiscard]] bool complete(std::size_t models, std::size_t sizes, std::size_t evals) const;
};

struct GeneralizationOptions {
    std::vector<GeneralizationMode> modes{GeneralizationMode::universe, GeneralizationMode::restricted};
    std::vector<LocusId> g1;  // required for restricted mode
    unsigned threads = 0;
};

// Trains every model on a stratified subsample of train_ds per size and
// scores each eval dataset. Universe mode zero-fills eval sets to
// `universe`; restricted mode restricts every set to g1 first. Failures are
// recorded in their cell.
GeneralizationGrid generalization_run(const std::vector<NamedModel>& models, const Dataset& train_ds,
                                      const std::vector<std::size_t>& train_sizes,
                                      const std::vector<Dataset>& eval_datasets, const std::vector<LocusId>& universe,
                                      std::uint64_t seed, const GeneralizationOptions& options = {});

struct TimingStats {
    double mean = 0.0;
    double variance = 0.0;  // sample variance (R - 1 denominator)
    double std_dev = 0.0;
    std::vector<double> raw;
};

TimingStats timing_stats(std::vector<double> raw);

struct ModelTiming {
    std::string model;
    TimingStats train;
    TimingStats inference;
};

struct TimingReport {
    std::vector<ModelTiming> models;
    int repetitions = 0;

    [[nodiscard]] const ModelTiming& at(const std::string& model) const;
};

// Serial wall-clock benchmark on a monotonic clock. Train time covers
// weight initialisation and fitting; inference time covers predicting ds.
TimingReport timing_benchmark(const std::vector<NamedModel>& models, const Dataset& ds, int repetitions,
                              std::uint64_t seed);

} // namespace prnet
