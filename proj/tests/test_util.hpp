#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prnet/dataset.hpp"
#include "prnet/network.hpp"
#include "prnet/pathway.hpp"

namespace prnet::test {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p);
void spit(const std::filesystem::path& p, const std::string& content);

// G0..G{n-1}, mutation channel only.
std::vector<LocusId> mutation_loci(std::size_t n);

Dataset make_dataset(const std::vector<std::vector<double>>& rows, std::vector<int> y,
                     std::vector<LocusId> loci = {}, std::string name = "fixture");

// Random masks with the given widths (widths[0] = inputs); every row and
// column gets at least one entry.
MaskStack random_masks(std::uint64_t seed, const std::vector<std::size_t>& widths, double density);

// Random masks plus random (nonzero) biases and head weights.
MaskedNetwork random_network(std::uint64_t seed, const std::vector<std::size_t>& widths, double density);

// Balanced random binary dataset over the given loci.
Dataset random_binary_dataset(std::uint64_t seed, std::size_t n, const std::vector<LocusId>& loci, double p = 0.3);

} // namespace prnet::test
