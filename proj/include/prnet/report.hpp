#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "prnet/harness.hpp"
#include "prnet/metrics.hpp"
#include "prnet/pruning.hpp"

namespace prnet {

// Fixed-precision formatting used by every emitted file.
std::string format_number(double v);

void write_metrics_csv(const std::vector<std::pair<std::string, MetricSet>>& rows, const std::filesystem::path& path);
void write_grid_csv(const GeneralizationGrid& grid, const std::filesystem::path& path);
// Table layout: phase,model,mean_s,variance,std
void write_timing_csv(const TimingReport& timing, const std::filesystem::path& path);
nlohmann::json timing_json(const TimingReport& timing);

struct BarGroup {
    std::string label;
    std::vector<double> values;  // one per series
};

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<std::pair<double, double>>& points, std::size_t marked_index);
std::string svg_grouped_bar_chart(const std::string& title, const std::vector<std::string>& series,
                                  const std::vector<BarGroup>& groups);

std::string selection_curve_svg(const SelectionResult& r);
std::string grid_svg(const GeneralizationGrid& grid, GeneralizationMode mode);

void write_text(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Writes whichever artifacts are present under out_dir using the fixed
// names metrics.csv, grid.csv, timing.csv, selection_curve.csv and
// plots/*.svg. Empty inputs raise instead of producing empty files.
struct ReportBundle {
    std::vector<std::pair<std::string, MetricSet>> metrics;
    const GeneralizationGrid* grid = nullptr;
    const TimingReport* timing = nullptr;
    const SelectionResult* selection = nullptr;
};

std::vector<std::filesystem::path> emit_reports(const ReportBundle& bundle, const std::filesystem::path& out_dir);

} // namespace prnet
