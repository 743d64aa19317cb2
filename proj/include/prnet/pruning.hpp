#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "prnet/attribution.hpp"
#include "prnet/dataset.hpp"
#include "prnet/network.hpp"
#include "prnet/pathway.hpp"

namespace prnet {

// Drops loci scored exactly zero. Throws NoSignalError if nothing is left.
ImportanceRanking filter_nonzero(const ImportanceRanking& r);

struct RankedGene {
    std::string gene;
    double score = 0.0;
};

// Genes ranked by the sum of their channel scores; ties keep the order in
// which genes first appear in the ranking's column indices.
std::vector<RankedGene> gene_rollup(const ImportanceRanking& r);

// All loci of `universe` belonging to the top-k genes, gene by gene in rank
// order, channels in (mutation, cnv_amp, cnv_del) order.
std::vector<LocusId> loci_for_top_genes(const std::vector<RankedGene>& ranked, std::size_t k,
                                        const std::vector<LocusId>& universe);

enum class SelectionMetric { recall, auc };

SelectionMetric selection_metric_from_string(const std::string& s);
std::string to_string(SelectionMetric m);

// Default sweep sizes, in genes, for a ~9k-gene cohort.
inline const std::vector<std::size_t> kDefaultCandidateSizes{37, 45, 46, 47, 56, 89, 3751};

struct SelectionConfig {
    std::vector<std::size_t> candidate_sizes = kDefaultCandidateSizes;
    int trials_per_size = 5;
    SelectionMetric metric = SelectionMetric::recall;
    std::uint64_t seed = 0;
    TrainConfig train;
    // 0 = hardware concurrency.
    unsigned threads = 0;

    void validate(std::size_t ranked_gene_count) const;
};

struct CurvePoint {
    std::size_t size = 0;
    double mean_metric = 0.0;
    double std_metric = 0.0;
    int trials_ok = 0;
    double wall_time = 0.0;
};

struct SelectionResult {
    std::vector<CurvePoint> curve;
    std::size_t chosen_size = 0;
    std::vector<LocusId> g1;
    std::size_t g0_size = 0;
    std::string source_ranking;
};

using MasksBuilder = std::function<MaskStack(const std::vector<LocusId>&)>;

// Retrain-and-sweep: for every candidate size restrict both splits to the
// top genes, rebuild masks, retrain trials_per_size times and score on
// test_ds. The chosen size maximizes the mean metric (ties -> smaller size).
SelectionResult select_optimal(const Dataset& train_ds, const Dataset& test_ds, const MasksBuilder& masks_builder,
                               const std::vector<RankedGene>& ranked_genes, const SelectionConfig& cfg,
                               const std::string& source_ranking = {});

struct ConstraintReport {
    bool cardinality_ok = false;  // |G0| >= |G1|
    bool subset_ok = false;       // G1 subset of G0
    std::vector<LocusId> missing;
    double missing_fraction = 0.0;
    bool passed = false;
    bool soft_applied = false;    // passed only thanks to the tolerance

    [[nodiscard]] std::string describe() const;
};

// tolerance: fraction of G1 allowed to be missing (zero-filled with a
// warning). 0 means strict.
ConstraintReport check_constraints(const std::vector<LocusId>& g0, const std::vector<LocusId>& g1,
                                   double tolerance = 0.0);

// How raw incoming data is reduced to the pruned model's input.
struct RestrictionRecipe {
    std::vector<LocusId> g1;
    double tolerance = 0.0;

    // Throws ConstraintViolation naming missing loci when the guard fails.
    [[nodiscard]] Dataset apply(const Dataset& ds) const;
};

struct PrNet {
    MaskedNetwork net;
    RestrictionRecipe recipe;
    TrainReport report;

    [[nodiscard]] Vector predict(const Dataset& ds) const;
};

PrNet assemble_prnet(const Dataset& full_train_ds, const std::vector<LocusId>& g1, const PathwayHierarchy& hierarchy,
                     const TrainConfig& train_cfg);

// CSV: size,mean_metric,std,trials_ok
void write_selection_curve_csv(const SelectionResult& r, const std::filesystem::path& path);
// Wall-clock seconds per size. Kept out of the CSV outputs, which are
// byte-reproducible.
void write_selection_timing_json(const SelectionResult& r, const std::filesystem::path& path);
// {"chosen_size", "g0_size", "source_ranking", "loci": [{gene, channel}]}
void write_g1_manifest(const SelectionResult& r, const std::filesystem::path& path);
std::vector<LocusId> read_g1_manifest(const std::filesystem::path& path);

} // namespace prnet
