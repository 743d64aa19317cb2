#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prnet/baselines.hpp"
#include "prnet/dataset.hpp"
#include "prnet/network.hpp"
#include "prnet/pruning.hpp"

namespace prnet {

struct DataFiles {
    std::filesystem::path mutation;
    std::filesystem::path cna;
    std::filesystem::path labels;
    std::string name;
};

struct SyntheticSpec {
    std::size_t n = 1200;
    std::size_t genes = 600;
    std::size_t planted = 15;
    double noise = 0.5;
    SyntheticOptions options;
};

struct ToyHierarchySpec {
    std::vector<std::size_t> levels{128, 64, 32, 16, 8};
    std::size_t fanin = 3;
};

struct ShiftSpec {
    ShiftFamilyOptions family;
};

struct EvalSpec {
    std::vector<std::size_t> train_sizes{202, 404, 606, 808};
    std::vector<DataFiles> datasets;
    std::optional<ShiftSpec> synthetic_shift;
    std::vector<std::string> modes{"universe", "restricted"};
};

// Parsed experiment configuration. Paths are resolved relative to the
// config file's directory.
struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    std::optional<DataFiles> data;
    std::optional<SyntheticSpec> synthetic;
    std::optional<std::filesystem::path> hierarchy;
    std::optional<ToyHierarchySpec> toy_hierarchy;
    std::optional<std::filesystem::path> g1_path;
    std::optional<std::filesystem::path> model_path;
    double test_fraction = 0.2;
    TrainConfig network;
    SelectionConfig selection;
    BaselineParams baselines;
    EvalSpec eval;
    int bench_repetitions = 5;
    std::size_t analysis_top_k = 20;
    unsigned threads = 0;

    nlohmann::json raw;  // parsed file with overrides applied

    // Throws ValidationError. Checks that referenced paths exist.
    void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override,
                          std::optional<std::filesystem::path> out_override);

// Entry point of the `prnet` executable. Exit codes: 0 success,
// 1 validation error (bad flag, config or subcommand), 2 runtime error.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

std::string version_string();

} // namespace prnet
