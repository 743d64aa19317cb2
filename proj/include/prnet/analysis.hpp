#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prnet/attribution.hpp"
#include "prnet/dataset.hpp"

namespace prnet {

// Pearson correlation of x with binary y. Throws UndefinedMetricError for a
// constant x or a single-class y.
double point_biserial(std::span<const double> x, std::span<const int> y);

// Plug-in mutual information in nats from the empirical joint distribution.
double mutual_information(std::span<const int> x, std::span<const int> y);

// Real-valued x: binary columns are used as is, anything else is split into
// two equal-frequency bins first.
double mutual_information(std::span<const double> x, std::span<const int> y);

// Plug-in entropy in nats.
double entropy(std::span<const int> x);

struct RankDelta {
    LocusId locus;
    std::size_t rank_before = 0;  // 0 = absent
    std::size_t rank_after = 0;
    std::optional<double> score_before;
    std::optional<double> score_after;
    std::optional<double> delta;
};

struct RankingComparison {
    std::vector<RankDelta> rows;
    std::size_t intersection = 0;
    std::optional<double> spearman;
};

// Rows for every locus in either top-k, ordered by first appearance in
// (before top-k, then after top-k). Spearman is computed over the loci the
// two top-k lists share.
RankingComparison compare_rankings(const ImportanceRanking& before, const ImportanceRanking& after,
                                   std::size_t top_k);

// Spearman rank correlation of two rank vectors without ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct LocusAssociation {
    LocusId locus;
    std::optional<double> correlation;
    double mutual_info = 0.0;
    std::size_t rank_by_corr = 0;  // by |correlation|, undefined last
    std::size_t rank_by_mi = 0;
};

struct AssociationReport {
    std::string dataset_id;
    std::vector<LocusAssociation> rows;
};

AssociationReport association_report(const Dataset& ds, const std::vector<LocusId>& loci_subset);

// CSV: dataset_id,gene,channel,correlation,mi_nats,rank_corr,rank_mi
void write_association_csv(const std::vector<AssociationReport>& reports, const std::filesystem::path& path);
// CSV: gene,channel,rank_before,rank_after,score_before,score_after,delta
void write_comparison_csv(const RankingComparison& c, const std::filesystem::path& path);

} // namespace prnet
