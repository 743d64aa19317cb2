#include "prnet/pruning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prnet/error.hpp"
#include "prnet/metrics.hpp"
#include "prnet/parallel.hpp"
#include "prnet/random.hpp"

namespace prnet {

using nlohmann::json;

ImportanceRanking filter_nonzero(const ImportanceRanking& r)
{
    ImportanceRanking out;
    out.source_model = r.source_model;
    for (const auto& e : r.entries)
        if (e.score != 0.0) out.entries.push_back(e);
    if (out.entries.empty()) throw NoSignalError("every locus has zero importance; nothing to prune to");
    return out;
}

std::vector<RankedGene> gene_rollup(const ImportanceRanking& r)
{
    struct Acc {
        double score = 0.0;
        std::size_t first = std::numeric_limits<std::size_t>::max();
    };
    std::unordered_map<std::string, Acc> acc;
    for (const auto& e : r.entries) {
        auto& a = acc[e.locus.gene];
        a.score += e.score;
        a.first = std::min(a.first, e.index);
    }
    std::vector<std::pair<RankedGene, std::size_t>> genes;
    genes.reserve(acc.size());
    for (auto& [g, a] : acc) genes.push_back({{g, a.score}, a.first});
    std::sort(genes.begin(), genes.end(), [](const auto& a, const auto& b) {
        if (a.first.score != b.first.score) return a.first.score > b.first.score;
        return a.second < b.second;
    });
    std::vector<RankedGene> out;
    out.reserve(genes.size());
    for (auto& [g, _] : genes) out.push_back(std::move(g));
    return out;
}

std::vector<LocusId> loci_for_top_genes(const std::vector<RankedGene>& ranked, std::size_t k,
                                        const std::vector<LocusId>& universe)
{
    if (k == 0 || k > ranked.size())
        throw ValidationError(fmt::format("cannot take the top {} of {} ranked genes", k, ranked.size()));
    std::unordered_set<LocusId, LocusIdHash> have(universe.begin(), universe.end());
    std::vector<LocusId> out;
    for (std::size_t i = 0; i < k; ++i)
        for (auto c : kChannels) {
            LocusId l{ranked[i].gene, c};
            if (have.contains(l)) out.push_back(std::move(l));
        }
    return out;
}

SelectionMetric selection_metric_from_string(const std::string& s)
{
    if (s == "recall") return SelectionMetric::recall;
    if (s == "auc") return SelectionMetric::auc;
    throw ValidationError("unknown selection metric '" + s + "' (expected recall or auc)");
}

std::string to_string(SelectionMetric m)
{
    return m == SelectionMetric::recall ? "recall" : "auc";
}

void SelectionConfig::validate(std::size_t ranked_gene_count) const
{
    if (candidate_sizes.empty()) throw ValidationError("candidate_sizes is empty");
    for (auto s : candidate_sizes) {
        if (s == 0) throw ValidationError("candidate sizes must be positive");
        if (s > ranked_gene_count)
            throw ValidationError(
                fmt::format("candidate size {} exceeds the {} genes with nonzero importance", s, ranked_gene_count));
    }
    if (trials_per_size < 1) throw ValidationError("trials_per_size must be at least 1");
    train.validate();
}

SelectionResult select_optimal(const Dataset& train_ds, const Dataset& test_ds, const MasksBuilder& masks_builder,
                               const std::vector<RankedGene>& ranked_genes, const SelectionConfig& cfg,
                               const std::string& source_ranking)
{
    cfg.validate(ranked_genes.size());
    if (!test_ds.has_both_classes()) throw ValidationError("selection test split must contain both classes");
    std::vector<std::size_t> sizes = cfg.candidate_sizes;
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    struct Prepared {
        MaskStack masks;
        Dataset train, test;
    };
    std::vector<Prepared> prepared;
    for (auto k : sizes) {
        auto loci = loci_for_top_genes(ranked_genes, k, train_ds.loci());
        auto masks = masks_builder(loci);
        auto tr = restrict_to_loci(train_ds, masks.loci);
        auto te = restrict_to_loci(test_ds, masks.loci);
        prepared.push_back({std::move(masks), std::move(tr), std::move(te)});
    }

    const auto trials = static_cast<std::size_t>(cfg.trials_per_size);
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> value(sizes.size() * trials, nan), seconds(sizes.size() * trials, 0.0);
    parallel_for(value.size(), cfg.threads, [&](std::size_t task) {
        const std::size_t s = task / trials, t = task % trials;
        const auto start = std::chrono::steady_clock::now();
        const auto seed = derive_seed(cfg.seed, {0x5e1ec7, sizes[s], t});
        auto train_cfg = cfg.train;
        train_cfg.seed = seed;
        try {
            auto trained = train(init_network(prepared[s].masks, seed), prepared[s].train, train_cfg);
            const Vector scores = predict(trained.net, prepared[s].test);
            const auto m = threshold_metrics({scores.data(), static_cast<std::size_t>(scores.size())},
                                             prepared[s].test.y());
            value[task] = cfg.metric == SelectionMetric::recall ? m.recall : m.auc;
        } catch (const DivergenceError& e) {
            std::clog << fmt::format("[warn] size {} trial {}: {}\n", sizes[s], t, e.what());
        }
        seconds[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    SelectionResult result;
    result.g0_size = train_ds.m();
    result.source_ranking = source_ranking;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        CurvePoint p;
        p.size = sizes[s];
        std::vector<double> ok;
        for (std::size_t t = 0; t < trials; ++t) {
            p.wall_time += seconds[s * trials + t];
            if (std::isfinite(value[s * trials + t])) ok.push_back(value[s * trials + t]);
        }
        p.trials_ok = static_cast<int>(ok.size());
        if (ok.empty()) {
            p.mean_metric = p.std_metric = nan;
        } else {
            double sum = 0.0;
            for (double v : ok) sum += v;
            p.mean_metric = sum / static_cast<double>(ok.size());
            double ss = 0.0;
            for (double v : ok) ss += (v - p.mean_metric) * (v - p.mean_metric);
            p.std_metric = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
            if (p.mean_metric > best) {
                best = p.mean_metric;
                result.chosen_size = p.size;
            }
        }
        result.curve.push_back(p);
    }
    if (result.chosen_size == 0) throw DivergenceError("every selection trial diverged");
    result.g1 = loci_for_top_genes(ranked_genes, result.chosen_size, train_ds.loci());
    return result;
}

std::string ConstraintReport::describe() const
{
    std::string s = fmt::format("|G0| >= |G1|: {}; G1 subset of G0: {}", cardinality_ok ? "yes" : "no",
                                subset_ok ? "yes" : "no");
    if (!missing.empty()) {
        s += fmt::format("; {} missing ({:.1f}%):", missing.size(), 100.0 * missing_fraction);
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) s += " " + missing[i].label();
        if (missing.size() > 20) s += " ...";
    }
    if (soft_applied) s += "; missing loci zero-filled under the tolerance";
    return s;
}

ConstraintReport check_constraints(const std::vector<LocusId>& g0, const std::vector<LocusId>& g1, double tolerance)
{
    if (!(tolerance >= 0.0 && tolerance < 1.0)) throw ValidationError("tolerance must lie in [0, 1)");
    ConstraintReport r;
    r.cardinality_ok = g0.size() >= g1.size();
    std::unordered_set<LocusId, LocusIdHash> have(g0.begin(), g0.end());
    for (const auto& l : g1)
        if (!have.contains(l)) r.missing.push_back(l);
    r.subset_ok = r.missing.empty();
    r.missing_fraction = g1.empty() ? 0.0 : static_cast<double>(r.missing.size()) / static_cast<double>(g1.size());
    if (r.subset_ok)
        r.passed = r.cardinality_ok;
    else
        r.passed = tolerance > 0.0 && r.missing_fraction <= tolerance;
    r.soft_applied = r.passed && !r.subset_ok;
    return r;
}

Dataset RestrictionRecipe::apply(const Dataset& ds) const
{
    const auto report = check_constraints(ds.loci(), g1, tolerance);
    if (!report.passed) {
        std::vector<std::string> labels;
        for (const auto& l : report.missing) labels.push_back(l.label());
        throw ConstraintViolation(fmt::format("dataset '{}' cannot feed the pruned model: {}", ds.name(),
                                              report.describe()),
                                  std::move(labels));
    }
    if (!report.soft_applied) return restrict_to_loci(ds, g1);
    std::clog << fmt::format("[warn] dataset '{}': {}\n", ds.name(), report.describe());
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(g1.size()));
    for (std::size_t j = 0; j < g1.size(); ++j) {
        const auto idx = ds.locus_index(g1[j]);
        if (idx >= 0) x.col(static_cast<Eigen::Index>(j)) = ds.x().col(idx);
    }
    return Dataset(ds.sample_ids(), g1, std::move(x), ds.y(), ds.name());
}

Vector PrNet::predict(const Dataset& ds) const
{
    return prnet::predict(net, restrict_to_loci(recipe.apply(ds), net.input_loci));
}

PrNet assemble_prnet(const Dataset& full_train_ds, const std::vector<LocusId>& g1, const PathwayHierarchy& hierarchy,
                     const TrainConfig& train_cfg)
{
    auto masks = build_masks(hierarchy, g1);
    auto ds = restrict_to_loci(full_train_ds, masks.loci);
    auto net = init_network(masks, train_cfg.seed);
    net.hierarchy_hash = hierarchy.hash();
    auto trained = train(std::move(net), ds, train_cfg);
    return {std::move(trained.net), RestrictionRecipe{g1, 0.0}, std::move(trained.report)};
}

void write_selection_curve_csv(const SelectionResult& r, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "size,mean_metric,std,trials_ok\n";
    for (const auto& p : r.curve)
        out << fmt::format("{},{:.17g},{:.17g},{}\n", p.size, p.mean_metric, p.std_metric, p.trials_ok);
    if (!out) throw IoError("failed writing " + path.string());
}

void write_selection_timing_json(const SelectionResult& r, const std::filesystem::path& path)
{
    json sizes = json::array();
    for (const auto& p : r.curve) sizes.push_back({{"size", p.size}, {"wall_time_s", p.wall_time}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << json{{"clock", "steady_clock"}, {"sizes", std::move(sizes)}}.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void write_g1_manifest(const SelectionResult& r, const std::filesystem::path& path)
{
    json j;
    j["chosen_size"] = r.chosen_size;
    j["g0_size"] = r.g0_size;
    j["source_ranking"] = r.source_ranking;
    json loci = json::array();
    for (const auto& l : r.g1) loci.push_back({{"gene", l.gene}, {"channel", std::string(to_string(l.channel))}});
    j["loci"] = std::move(loci);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(1) << '\n';
}

std::vector<LocusId> read_g1_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        const auto j = json::parse(in);
        std::vector<LocusId> out;
        for (const auto& l : j.at("loci"))
            out.push_back({l.at("gene").get<std::string>(), channel_from_string(l.at("channel").get<std::string>())});
        validate_loci(out);
        if (out.empty()) throw ValidationError("G1 manifest lists no loci");
        return out;
    } catch (const json::exception& e) {
        throw ValidationError("G1 manifest " + path.string() + ": " + e.what());
    }
}

} // namespace prnet
