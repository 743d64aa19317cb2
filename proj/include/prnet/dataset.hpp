#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "prnet/locus.hpp"

namespace prnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n samples x m loci alteration matrix with binary response labels
// (1 = CRPC, 0 = primary). Immutable once constructed.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> sample_ids, std::vector<LocusId> loci, Matrix x, std::vector<int> y,
            std::string name = {});

    [[nodiscard]] std::size_t n() const noexcept { return sample_ids_.size(); }
    [[nodiscard]] std::size_t m() const noexcept { return loci_.size(); }

    [[nodiscard]] const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
    [[nodiscard]] const std::vector<LocusId>& loci() const noexcept { return loci_; }
    [[nodiscard]] const Matrix& x() const noexcept { return x_; }
    [[nodiscard]] const std::vector<int>& y() const noexcept { return y_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    [[nodiscard]] std::size_t positives() const noexcept;
    [[nodiscard]] std::size_t negatives() const noexcept { return n() - positives(); }
    [[nodiscard]] bool has_both_classes() const noexcept { return positives() > 0 && negatives() > 0; }

    // Column index of a locus, or -1.
    [[nodiscard]] std::ptrdiff_t locus_index(const LocusId& locus) const;

    [[nodiscard]] Dataset with_name(std::string name) const;

    // Rows in the given order (used by split/subsample).
    [[nodiscard]] Dataset select_rows(const std::vector<std::size_t>& rows) const;

    bool operator==(const Dataset& other) const;

private:
    std::vector<std::string> sample_ids_;
    std::vector<LocusId> loci_;
    Matrix x_;
    std::vector<int> y_;
    std::string name_;
};

struct LoadStats {
    std::size_t dropped_unlabeled = 0;
    std::size_t labels_without_data = 0;
};

// Reads the mutation / CNA / label CSV trio. CNA values >= 2 set cnv_amp,
// values <= -2 set cnv_del; blanks are imputed as 0.
Dataset load_dataset(const std::filesystem::path& mutation_file, const std::filesystem::path& cna_file,
                     const std::filesystem::path& labels_file, LoadStats* stats = nullptr);

// Writes a binary dataset back into the CSV trio understood by load_dataset.
void write_dataset(const Dataset& ds, const std::filesystem::path& mutation_file,
                   const std::filesystem::path& cna_file, const std::filesystem::path& labels_file);

struct Split {
    Dataset train;
    Dataset test;
};

// Stratified split: each class contributes round(count * test_fraction)
// samples to the test side. Both sides keep the original row order.
Split split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// Stratified random subsample of exactly `size` rows.
Dataset stratified_subsample(const Dataset& ds, std::size_t size, std::uint64_t seed);

// Re-index onto `universe`, zero-filling loci the dataset does not carry.
Dataset expand_to_universe(const Dataset& ds, const std::vector<LocusId>& universe);

// Keep exactly the `g1` columns in `g1` order. Throws ConstraintViolation
// naming every locus of g1 absent from ds.
Dataset restrict_to_loci(const Dataset& ds, const std::vector<LocusId>& g1);

struct SyntheticTruth {
    std::set<std::string> planted_genes;
    std::map<std::string, double> effect_sizes;
    std::map<std::string, Channel> driver_channel;
    double intercept = 0.0;
};

struct SyntheticOptions {
    // Scale of planted effects; each planted gene draws U[effect, 2*effect].
    double effect = 2.0;
    // Probability of flipping a generated label.
    double flip_rate = 0.0;
    // Per-gene alteration frequencies are drawn from [min_freq, max_freq].
    double min_freq = 0.02;
    double max_freq = 0.20;
    // Planted genes are altered more often so the signal is learnable.
    double planted_freq = 0.30;
};

struct SyntheticData {
    Dataset dataset;
    SyntheticTruth truth;
};

// Planted-signal generator. Each planted gene drives the label through one
// channel (mutation, cnv_amp, cnv_del cyclically by planted rank); the label
// is 1 iff sigmoid(intercept + sum effect*x + noise*N(0,1)) >= 0.5.
SyntheticData generate_synthetic(std::size_t n, std::size_t gene_count, std::size_t planted, double noise,
                                 std::uint64_t seed, const SyntheticOptions& options = {});

struct ShiftFamilyOptions {
    std::size_t datasets = 5;
    std::size_t source_n = 1013;
    std::size_t shifted_n = 600;
    // Relative jitter of per-gene alteration frequencies between cohorts.
    double frequency_shift = 0.5;
    // Standard deviation of the per-cohort intercept offset.
    double prior_shift = 0.5;
};

// Cohorts that share planted genes and effects but differ in alteration
// frequencies and class prior. Element 0 is the source cohort.
std::vector<SyntheticData> generate_shift_family(std::size_t gene_count, std::size_t planted, double noise,
                                                 std::uint64_t seed, const ShiftFamilyOptions& family = {},
                                                 const SyntheticOptions& options = {});

// Zero-padded synthetic gene symbol shared by the data and toy hierarchy
// generators ("G00042").
std::string synthetic_gene_name(std::size_t index);

} // namespace prnet
