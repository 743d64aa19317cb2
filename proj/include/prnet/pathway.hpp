#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "prnet/locus.hpp"

namespace prnet {

// Layered gene -> pathway -> ... -> pathway membership graph.
//
// levels[0] holds the pathways genes attach to; an edge of level k >= 1
// connects a node of levels[k-1] (child) to a node of levels[k] (parent).
struct PathwayHierarchy {
    std::vector<std::string> genes;
    std::vector<std::vector<std::string>> levels;
    std::vector<std::pair<std::string, std::string>> gene_edges;                  // (gene, level-0 pathway)
    std::vector<std::vector<std::pair<std::string, std::string>>> pathway_edges;  // [k] = edges level k -> k+1

    // Nodes the validator attached to a residual pathway.
    std::size_t residual_attachments = 0;

    [[nodiscard]] std::size_t edge_count() const;
    [[nodiscard]] std::size_t depth() const noexcept { return levels.size() + 1; }

    // SHA-256 of the canonical JSON form.
    [[nodiscard]] std::string hash() const;
};

inline constexpr std::string_view kResidualPathway = "residual";

// Checks endpoints, self-loops, duplicates and empty levels, then attaches
// every node without a parent (genes included) to a residual pathway on
// the next level. Returns the validated hierarchy.
PathwayHierarchy validate_hierarchy(PathwayHierarchy h);

PathwayHierarchy load_hierarchy(const std::filesystem::path& path);
void save_hierarchy(const PathwayHierarchy& h, const std::filesystem::path& path);

// Every child picks min(fanin, parent count) distinct parents, the first one
// round-robin so each parent is covered whenever children >= parents.
PathwayHierarchy generate_toy_hierarchy(std::size_t gene_count, const std::vector<std::size_t>& pathways_per_level,
                                        std::size_t fanin, std::uint64_t seed);

// Binary connectivity matrix in compressed-column form; column j lists the
// input rows feeding output unit j.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t rows, std::size_t cols, std::vector<std::pair<std::size_t, std::size_t>> entries);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return row_idx_.size(); }

    [[nodiscard]] const std::vector<std::size_t>& col_ptr() const noexcept { return col_ptr_; }
    [[nodiscard]] const std::vector<std::size_t>& row_idx() const noexcept { return row_idx_; }

    [[nodiscard]] std::span<const std::size_t> column(std::size_t j) const
    {
        return {row_idx_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
    }
    [[nodiscard]] bool contains(std::size_t i, std::size_t j) const;
    [[nodiscard]] Eigen::MatrixXd to_dense() const;

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<std::size_t> row_idx_;
};

// The masks M0..ML compiled from a hierarchy for one input locus list.
// nodes[k] names the output units of masks[k] (genes for k = 0).
struct MaskStack {
    std::vector<LocusId> loci;
    std::vector<std::vector<std::string>> nodes;
    std::vector<BinaryMask> masks;

    [[nodiscard]] std::size_t depth() const noexcept { return masks.size(); }
    [[nodiscard]] std::size_t total_nnz() const;

    bool operator==(const MaskStack&) const = default;
};

// Genes without loci in `locus_list` are dropped and pathways left without
// children are removed level by level.
MaskStack build_masks(const PathwayHierarchy& h, const std::vector<LocusId>& locus_list);

} // namespace prnet
