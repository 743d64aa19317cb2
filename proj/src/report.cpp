#include "prnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "prnet/error.hpp"

namespace prnet {

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.10g}", v);
}

void write_text(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    write_text(path, j.dump(2) + "\n");
}

namespace {

std::string metric_columns(const MetricSet& m)
{
    return fmt::format("{},{},{},{},{},{},{},{},{}", format_number(m.auc), format_number(m.recall),
                       format_number(m.precision), format_number(m.accuracy), format_number(m.f1), m.tp, m.fp, m.tn,
                       m.fn);
}

constexpr const char* kMetricHeader = "auc,recall,precision,accuracy,f1,tp,fp,tn,fn";

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf",
                                    "#7f7f7f"};

} // namespace

void write_metrics_csv(const std::vector<std::pair<std::string, MetricSet>>& rows, const std::filesystem::path& path)
{
    if (rows.empty()) throw ValidationError("no metrics to write");
    std::string s = fmt::format("model,{}\n", kMetricHeader);
    for (const auto& [name, m] : rows) s += fmt::format("{},{}\n", name, metric_columns(m));
    write_text(path, s);
}

void write_grid_csv(const GeneralizationGrid& grid, const std::filesystem::path& path)
{
    if (grid.cells.empty()) throw ValidationError("generalization grid is empty");
    std::string s = fmt::format("model,mode,train_size,eval_dataset,{},error\n", kMetricHeader);
    for (const auto& c : grid.cells) {
        s += fmt::format("{},{},{},{},", c.model, to_string(c.mode), c.train_size, c.eval_dataset);
        s += c.metrics ? metric_columns(*c.metrics) : std::string(",,,,,,,,");
        std::string err = c.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        s += err.empty() ? ",\n" : fmt::format(",\"{}\"\n", err);
    }
    write_text(path, s);
}

void write_timing_csv(const TimingReport& timing, const std::filesystem::path& path)
{
    if (timing.models.empty()) throw ValidationError("timing report is empty");
    std::string s = "phase,model,mean_s,variance,std\n";
    for (const char* phase : {"train", "inference"})
        for (const auto& m : timing.models) {
            const auto& t = std::string(phase) == "train" ? m.train : m.inference;
            s += fmt::format("{},{},{:.6e},{:.6e},{:.6e}\n", phase, m.model, t.mean, t.variance, t.std_dev);
        }
    write_text(path, s);
}

nlohmann::json timing_json(const TimingReport& timing)
{
    auto stats = [](const TimingStats& t) {
        return nlohmann::json{{"mean_s", t.mean}, {"variance", t.variance}, {"std", t.std_dev}, {"raw_s", t.raw}};
    };
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : timing.models)
        models.push_back({{"model", m.model}, {"train", stats(m.train)}, {"inference", stats(m.inference)}});
    return {{"repetitions", timing.repetitions}, {"clock", "steady_clock"}, {"models", std::move(models)}};
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<std::pair<double, double>>& points, std::size_t marked_index)
{
    if (points.empty()) throw ValidationError("line chart needs at least one point");
    constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 60;
    double x0 = points.front().first, x1 = x0, y0 = 0.0, y1 = 1.0;
    for (const auto& [x, y] : points) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        if (std::isfinite(y)) {
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 == x0) x1 = x0 + 1.0;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{3}</text>\n",
        W, H, W / 2, xml_escape(title));
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", L, H - B, W - R);
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", L, T, H - B);
    for (int i = 0; i <= 4; ++i) {
        const double y = y0 + (y1 - y0) * i / 4.0;
        s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\" font-family=\"sans-serif\" "
                         "font-size=\"11\">{:.2f}</text>\n",
                         L - 6, py(y) + 4, y);
    }
    for (const auto& [x, _] : points)
        s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                         "font-size=\"11\">{}</text>\n",
                         px(x), H - B + 16, format_number(x));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"13\">{}</text>\n",
                     (L + W - R) / 2, H - 18, xml_escape(x_label));
    s += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
                     "transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                     (T + H - B) / 2, xml_escape(y_label));
    std::string poly;
    for (const auto& [x, y] : points)
        if (std::isfinite(y)) poly += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
    s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", kPalette[0], poly);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].second)) continue;
        const bool mark = i == marked_index;
        s += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"{}\" fill=\"{}\"/>\n", px(points[i].first),
                         py(points[i].second), mark ? 6 : 3.5, mark ? kPalette[1] : kPalette[0]);
    }
    s += "</svg>\n";
    return s;
}

std::string svg_grouped_bar_chart(const std::string& title, const std::vector<std::string>& series,
                                  const std::vector<BarGroup>& groups)
{
    if (series.empty() || groups.empty()) throw ValidationError("bar chart needs series and groups");
    constexpr double H = 420, L = 60, R = 170, T = 40, B = 50;
    const double group_w = std::max(80.0, 18.0 * static_cast<double>(series.size()) + 20.0);
    const double W = L + R + group_w * static_cast<double>(groups.size());
    double y1 = 1.0;
    for (const auto& g : groups)
        for (double v : g.values)
            if (std::isfinite(v)) y1 = std::max(y1, v);
    auto py = [&](double y) { return H - B - y / y1 * (H - T - B); };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{3}</text>\n",
        W, H, (W - R) / 2, xml_escape(title));
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", L, H - B, W - R);
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", L, T, H - B);
    for (int i = 0; i <= 4; ++i)
        s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\" font-family=\"sans-serif\" "
                         "font-size=\"11\">{:.2f}</text>\n",
                         L - 6, py(y1 * i / 4.0) + 4, y1 * i / 4.0);
    const double bar_w = (group_w - 20.0) / static_cast<double>(series.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double gx = L + group_w * static_cast<double>(g) + 10.0;
        for (std::size_t k = 0; k < series.size() && k < groups[g].values.size(); ++k) {
            const double v = groups[g].values[k];
            if (!std::isfinite(v)) continue;
            s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n",
                             gx + bar_w * static_cast<double>(k), py(v), bar_w - 1.0, H - B - py(v),
                             kPalette[k % std::size(kPalette)]);
        }
        s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                         "font-size=\"12\">{}</text>\n",
                         gx + (group_w - 20.0) / 2, H - B + 18, xml_escape(groups[g].label));
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double ly = T + 18.0 * static_cast<double>(k);
        s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", W - R + 12, ly,
                         kPalette[k % std::size(kPalette)]);
        s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                         W - R + 30, ly + 10, xml_escape(series[k]));
    }
    s += "</svg>\n";
    return s;
}

std::string selection_curve_svg(const SelectionResult& r)
{
    std::vector<std::pair<double, double>> pts;
    std::size_t marked = r.curve.size();
    for (std::size_t i = 0; i < r.curve.size(); ++i) {
        pts.emplace_back(static_cast<double>(r.curve[i].size), r.curve[i].mean_metric);
        if (r.curve[i].size == r.chosen_size) marked = i;
    }
    return svg_line_chart("Pruned-model performance by gene count", "genes kept", "mean test metric", pts, marked);
}

std::string grid_svg(const GeneralizationGrid& grid, GeneralizationMode mode)
{
    std::vector<std::string> models;
    std::map<std::size_t, std::map<std::string, std::pair<double, int>>> acc;
    for (const auto& c : grid.cells) {
        if (c.mode != mode) continue;
        if (std::find(models.begin(), models.end(), c.model) == models.end()) models.push_back(c.model);
        auto& a = acc[c.train_size][c.model];
        if (c.metrics && std::isfinite(c.metrics->recall)) {
            a.first += c.metrics->recall;
            ++a.second;
        }
    }
    std::vector<BarGroup> groups;
    for (const auto& [size, per_model] : acc) {
        BarGroup g{fmt::format("n={}", size), {}};
        for (const auto& m : models) {
            auto it = per_model.find(m);
            g.values.push_back(it != per_model.end() && it->second.second > 0
                                   ? it->second.first / it->second.second
                                   : std::nan(""));
        }
        groups.push_back(std::move(g));
    }
    return svg_grouped_bar_chart(fmt::format("Mean recall on evaluation cohorts ({})", to_string(mode)), models,
                                 groups);
}

std::vector<std::filesystem::path> emit_reports(const ReportBundle& bundle, const std::filesystem::path& out_dir)
{
    if (bundle.metrics.empty() && !bundle.grid && !bundle.timing && !bundle.selection)
        throw ValidationError("nothing to report");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::filesystem::path& rel, const std::string& content) {
        write_text(out_dir / rel, content);
        written.push_back(out_dir / rel);
    };
    if (!bundle.metrics.empty()) {
        write_metrics_csv(bundle.metrics, out_dir / "metrics.csv");
        written.push_back(out_dir / "metrics.csv");
    }
    if (bundle.grid) {
        write_grid_csv(*bundle.grid, out_dir / "grid.csv");
        written.push_back(out_dir / "grid.csv");
        for (auto mode : {GeneralizationMode::universe, GeneralizationMode::restricted})
            if (std::any_of(bundle.grid->cells.begin(), bundle.grid->cells.end(),
                            [&](const GridCell& c) { return c.mode == mode; }))
                put(std::filesystem::path("plots") / fmt::format("grid_{}.svg", to_string(mode)),
                    grid_svg(*bundle.grid, mode));
    }
    if (bundle.timing) {
        write_timing_csv(*bundle.timing, out_dir / "timing.csv");
        written.push_back(out_dir / "timing.csv");
        write_json(out_dir / "timing.json", timing_json(*bundle.timing));
        written.push_back(out_dir / "timing.json");
    }
    if (bundle.selection) {
        if (bundle.selection->curve.empty()) throw ValidationError("selection curve is empty");
        write_selection_curve_csv(*bundle.selection, out_dir / "selection_curve.csv");
        written.push_back(out_dir / "selection_curve.csv");
        write_selection_timing_json(*bundle.selection, out_dir / "selection_timing.json");
        written.push_back(out_dir / "selection_timing.json");
        put("plots/selection_curve.svg", selection_curve_svg(*bundle.selection));
    }
    return written;
}

} // namespace prnet
