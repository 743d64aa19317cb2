#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prnet/dataset.hpp"
#include "prnet/network.hpp"

namespace prnet {

// Per-sample, per-locus DeepLIFT contributions to the final output.
struct ContributionMatrix {
    Matrix values;      // n x m
    Vector reference;   // m
};

// Contributions of one sample, per head and for the weighted final output.
struct SampleContributions {
    Matrix per_head;              // heads x m
    std::vector<double> final;    // m
    std::vector<double> head_delta;
    double final_delta = 0.0;
};

// Below this |z - z0| the Rescale multiplier falls back to the derivative.
inline constexpr double kRescaleGuard = 1e-7;

SampleContributions deeplift_sample(const MaskedNetwork& net, std::span<const double> x,
                                    std::span<const double> reference);

// Rescale-rule contributions for every row of ds against `reference`
// (zero vector when empty).
ContributionMatrix deeplift(const MaskedNetwork& net, const Dataset& ds, const Vector& reference = {});

enum class Aggregation { sum, mean };

struct RankedLocus {
    LocusId locus;
    std::size_t index = 0;  // column in the scored dataset
    double score = 0.0;
};

// Loci sorted by descending score, ties by ascending column index.
struct ImportanceRanking {
    std::vector<RankedLocus> entries;
    std::string source_model;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
    [[nodiscard]] std::vector<LocusId> loci() const;
    // 1-based rank of a locus, 0 if absent.
    [[nodiscard]] std::size_t rank_of(const LocusId& locus) const;
    [[nodiscard]] std::string hash() const;
};

ImportanceRanking aggregate_importance(const ContributionMatrix& cm, const std::vector<LocusId>& loci,
                                       Aggregation aggregation = Aggregation::sum);

// Sorts raw per-locus scores into a ranking (shared by aggregate_importance).
ImportanceRanking rank_scores(const std::vector<LocusId>& loci, std::span<const double> scores);

struct ScoreDistribution {
    std::size_t zero_count = 0;          // [0, 0]
    std::size_t unit_interval_count = 0; // (0, 1]
    std::size_t above_one_count = 0;     // (1, inf)
    double zero_fraction = 0.0;
    double unit_interval_fraction = 0.0;
    double above_one_fraction = 0.0;
};

ScoreDistribution score_distribution(const ImportanceRanking& r);

// CSV: rank,gene,channel,score
void write_ranking_csv(const ImportanceRanking& r, const std::filesystem::path& path);

} // namespace prnet
