#include "prnet/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "prnet/error.hpp"
#include "prnet/parallel.hpp"
#include "prnet/random.hpp"

namespace prnet {

NamedModel pnet_model(const PathwayHierarchy& hierarchy, const TrainConfig& cfg, std::string name)
{
    return {std::move(name), [&hierarchy, cfg](const Dataset& train_ds, std::uint64_t seed) -> Predictor {
                auto masks = build_masks(hierarchy, train_ds.loci());
                auto ds = restrict_to_loci(train_ds, masks.loci);
                auto net = init_network(masks, seed);
                net.hierarchy_hash = hierarchy.hash();
                auto c = cfg;
                c.seed = seed;
                auto trained = train(std::move(net), ds, c);
                return [net = std::move(trained.net)](const Dataset& d) {
                    return predict(net, restrict_to_loci(d, net.input_loci));
                };
            }};
}

NamedModel prnet_model(const PathwayHierarchy& hierarchy, const std::vector<LocusId>& g1, const TrainConfig& cfg,
                       std::string name)
{
    return {std::move(name), [&hierarchy, g1, cfg](const Dataset& train_ds, std::uint64_t seed) -> Predictor {
                auto c = cfg;
                c.seed = seed;
                auto model = std::make_shared<PrNet>(assemble_prnet(train_ds, g1, hierarchy, c));
                return [model](const Dataset& d) { return model->predict(d); };
            }};
}

NamedModel baseline_model(BaselineKind kind, const BaselineParams& params)
{
    return {to_string(kind), [kind, params](const Dataset& train_ds, std::uint64_t seed) -> Predictor {
                auto model = std::make_shared<BaselineModel>(train_baseline(kind, train_ds, params, seed));
                return [model](const Dataset& d) { return predict_baseline(*model, d); };
            }};
}

std::vector<NamedModel> standard_models(const PathwayHierarchy& hierarchy, const std::vector<LocusId>& g1,
                                        const TrainConfig& cfg, const BaselineParams& params)
{
    std::vector<NamedModel> models{pnet_model(hierarchy, cfg), prnet_model(hierarchy, g1, cfg)};
    for (auto k : kBaselineKinds) models.push_back(baseline_model(k, params));
    return models;
}

std::string to_string(GeneralizationMode m)
{
    return m == GeneralizationMode::universe ? "universe" : "restricted";
}

double GeneralizationGrid::mean(const std::string& model, GeneralizationMode mode, double MetricSet::*field) const
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells) {
        if (c.model != model || c.mode != mode || !c.metrics) continue;
        const double v = (*c.metrics).*field;
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

bool GeneralizationGrid::complete(std::size_t models, std::size_t sizes, std::size_t evals) const
{
    std::set<GeneralizationMode> modes;
    std::size_t ok = 0;
    for (const auto& c : cells) {
        modes.insert(c.mode);
        if (c.metrics) ++ok;
    }
    return !modes.empty() && ok == cells.size() && ok == modes.size() * models * sizes * evals;
}

namespace {

// Drop loci outside the universe, zero-fill the ones the set lacks.
Dataset onto_universe(const Dataset& ds, const std::vector<LocusId>& universe)
{
    std::unordered_set<LocusId, LocusIdHash> keep(universe.begin(), universe.end());
    std::vector<LocusId> shared;
    for (const auto& l : ds.loci())
        if (keep.contains(l)) shared.push_back(l);
    if (shared.size() == ds.m()) return expand_to_universe(ds, universe);
    return expand_to_universe(restrict_to_loci(ds, shared), universe);
}

} // namespace

GeneralizationGrid generalization_run(const std::vector<NamedModel>& models, const Dataset& train_ds,
                                      const std::vector<std::size_t>& train_sizes,
                                      const std::vector<Dataset>& eval_datasets, const std::vector<LocusId>& universe,
                                      std::uint64_t seed, const GeneralizationOptions& options)
{
    if (models.empty()) throw ValidationError("no models to evaluate");
    if (train_sizes.empty()) throw ValidationError("no training sizes");
    if (eval_datasets.empty()) throw ValidationError("no evaluation datasets");
    for (auto s : train_sizes)
        if (s < 4 || s > train_ds.n())
            throw ValidationError(fmt::format("training size {} is outside [4, {}]", s, train_ds.n()));
    for (auto mode : options.modes)
        if (mode == GeneralizationMode::restricted && options.g1.empty())
            throw ValidationError("restricted mode needs a G1 locus list");

    // Views of the eval sets per mode; a failure is kept as a message.
    struct View {
        std::optional<Dataset> ds;
        std::string error;
    };
    std::vector<std::vector<View>> views(options.modes.size());
    std::vector<std::vector<Dataset>> subsamples(options.modes.size());
    for (std::size_t mi = 0; mi < options.modes.size(); ++mi) {
        const auto mode = options.modes[mi];
        for (const auto& e : eval_datasets) {
            View v;
            try {
                v.ds = mode == GeneralizationMode::universe ? onto_universe(e, universe)
                                                            : restrict_to_loci(e, options.g1);
            } catch (const Error& err) {
                v.error = err.what();
            }
            views[mi].push_back(std::move(v));
        }
        for (auto size : train_sizes) {
            auto sub = stratified_subsample(train_ds, size, derive_seed(seed, {0x5b5a, size}));
            subsamples[mi].push_back(mode == GeneralizationMode::universe ? onto_universe(sub, universe)
                                                                          : restrict_to_loci(sub, options.g1));
        }
    }

    const std::size_t per_mode = train_sizes.size() * models.size();
    std::vector<std::vector<GridCell>> slots(options.modes.size() * per_mode);
    parallel_for(slots.size(), options.threads, [&](std::size_t task) {
        const std::size_t mi = task / per_mode;
        const std::size_t si = (task % per_mode) / models.size();
        const std::size_t model = task % models.size();
        auto& out = slots[task];
        GridCell base;
        base.model = models[model].name;
        base.mode = options.modes[mi];
        base.train_size = train_sizes[si];
        Predictor predictor;
        std::string fit_error;
        try {
            predictor = models[model].fit(subsamples[mi][si], derive_seed(seed, {0x6e7a, mi, train_sizes[si], model}));
        } catch (const Error& e) {
            fit_error = fmt::format("training failed: {}", e.what());
        }
        for (std::size_t ei = 0; ei < eval_datasets.size(); ++ei) {
            GridCell cell = base;
            cell.eval_dataset = eval_datasets[ei].name();
            const auto& view = views[mi][ei];
            if (!fit_error.empty()) {
                cell.error = fit_error;
            } else if (!view.ds) {
                cell.error = view.error;
            } else {
                try {
                    const Vector s = predictor(*view.ds);
                    cell.metrics = threshold_metrics({s.data(), static_cast<std::size_t>(s.size())}, view.ds->y());
                } catch (const Error& e) {
                    cell.error = e.what();
                }
            }
            out.push_back(std::move(cell));
        }
    });
    GeneralizationGrid grid;
    for (auto& s : slots)
        for (auto& c : s) grid.cells.push_back(std::move(c));
    return grid;
}

TimingStats timing_stats(std::vector<double> raw)
{
    if (raw.empty()) throw ValidationError("no timings");
    TimingStats s;
    const double r = static_cast<double>(raw.size());
    for (double v : raw) s.mean += v;
    s.mean /= r;
    if (raw.size() > 1) {
        for (double v : raw) s.variance += (v - s.mean) * (v - s.mean);
        s.variance /= r - 1.0;
    }
    s.std_dev = std::sqrt(s.variance);
    s.raw = std::move(raw);
    return s;
}

const ModelTiming& TimingReport::at(const std::string& model) const
{
    for (const auto& m : models)
        if (m.model == model) return m;
    throw ValidationError("no timing recorded for model '" + model + "'");
}

TimingReport timing_benchmark(const std::vector<NamedModel>& models, const Dataset& ds, int repetitions,
                              std::uint64_t seed)
{
    if (repetitions < 1) throw ValidationError("repetitions must be at least 1");
    using clock = std::chrono::steady_clock;
    TimingReport report;
    report.repetitions = repetitions;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        std::vector<double> fit, infer;
        for (int r = 0; r < repetitions; ++r) {
            const auto t0 = clock::now();
            auto predictor = models[mi].fit(ds, derive_seed(seed, {0xb3, mi, static_cast<std::uint64_t>(r)}));
            const auto t1 = clock::now();
            const Vector s = predictor(ds);
            const auto t2 = clock::now();
            if (s.size() != static_cast<Eigen::Index>(ds.n())) throw ShapeError("predictor returned the wrong length");
            fit.push_back(std::chrono::duration<double>(t1 - t0).count());
            infer.push_back(std::chrono::duration<double>(t2 - t1).count());
        }
        report.models.push_back({models[mi].name, timing_stats(std::move(fit)), timing_stats(std::move(infer))});
    }
    return report;
}

} // namespace prnet
