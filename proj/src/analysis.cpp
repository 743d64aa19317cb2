#include "prnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "prnet/error.hpp"

namespace prnet {

namespace {

void check_lengths(std::size_t a, std::size_t b)
{
    if (a != b) throw ShapeError(fmt::format("vectors differ in length ({} vs {})", a, b));
    if (a == 0) throw EmptyDatasetError("no samples");
}

std::vector<double> ranks_of(std::span<const double> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j - 1) + 1.0;
        for (std::size_t t = i; t < j; ++t) r[order[t]] = mid;
        i = j;
    }
    return r;
}

double pearson(std::span<const double> a, std::span<const double> b)
{
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw UndefinedMetricError("correlation is undefined for a constant vector");
    return sab / std::sqrt(saa * sbb);
}

} // namespace

double point_biserial(std::span<const double> x, std::span<const int> y)
{
    check_lengths(x.size(), y.size());
    std::vector<double> yd(y.begin(), y.end());
    return pearson(x, yd);
}

double entropy(std::span<const int> x)
{
    if (x.empty()) throw EmptyDatasetError("no samples");
    std::map<int, std::size_t> counts;
    for (int v : x) ++counts[v];
    const double n = static_cast<double>(x.size());
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(std::span<const int> x, std::span<const int> y)
{
    check_lengths(x.size(), y.size());
    std::map<std::pair<int, int>, std::size_t> joint;
    std::map<int, std::size_t> px, py;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++joint[{x[i], y[i]}];
        ++px[x[i]];
        ++py[y[i]];
    }
    const double n = static_cast<double>(x.size());
    double mi = 0.0;
    for (const auto& [key, c] : joint) {
        const double pxy = static_cast<double>(c) / n;
        const double ind = static_cast<double>(px[key.first]) * static_cast<double>(py[key.second]) / (n * n);
        mi += pxy * std::log(pxy / ind);
    }
    return std::max(0.0, mi);
}

double mutual_information(std::span<const double> x, std::span<const int> y)
{
    check_lengths(x.size(), y.size());
    const bool binary = std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0 || v == 1.0; });
    std::vector<int> bins(x.size());
    if (binary) {
        for (std::size_t i = 0; i < x.size(); ++i) bins[i] = static_cast<int>(x[i]);
    } else {
        std::vector<double> sorted(x.begin(), x.end());
        std::sort(sorted.begin(), sorted.end());
        const double cut = sorted[sorted.size() / 2];
        for (std::size_t i = 0; i < x.size(); ++i) bins[i] = x[i] >= cut ? 1 : 0;
    }
    return mutual_information(std::span<const int>(bins), y);
}

double spearman(std::span<const double> a, std::span<const double> b)
{
    check_lengths(a.size(), b.size());
    if (a.size() < 2) throw UndefinedMetricError("Spearman correlation needs at least two items");
    const auto ra = ranks_of(a);
    const auto rb = ranks_of(b);
    return pearson(ra, rb);
}

RankingComparison compare_rankings(const ImportanceRanking& before, const ImportanceRanking& after,
                                   std::size_t top_k)
{
    if (top_k == 0) throw ValidationError("top_k must be positive");
    RankingComparison c;
    std::vector<LocusId> order;
    std::unordered_set<LocusId, LocusIdHash> seen, top_before, top_after;
    for (std::size_t i = 0; i < std::min(top_k, before.size()); ++i) {
        top_before.insert(before.entries[i].locus);
        if (seen.insert(before.entries[i].locus).second) order.push_back(before.entries[i].locus);
    }
    for (std::size_t i = 0; i < std::min(top_k, after.size()); ++i) {
        top_after.insert(after.entries[i].locus);
        if (seen.insert(after.entries[i].locus).second) order.push_back(after.entries[i].locus);
    }
    std::vector<double> ra, rb;
    for (const auto& l : order) {
        RankDelta d;
        d.locus = l;
        d.rank_before = before.rank_of(l);
        d.rank_after = after.rank_of(l);
        if (d.rank_before) d.score_before = before.entries[d.rank_before - 1].score;
        if (d.rank_after) d.score_after = after.entries[d.rank_after - 1].score;
        if (d.score_before && d.score_after) d.delta = *d.score_after - *d.score_before;
        if (top_before.contains(l) && top_after.contains(l)) {
            ++c.intersection;
            ra.push_back(static_cast<double>(d.rank_before));
            rb.push_back(static_cast<double>(d.rank_after));
        }
        c.rows.push_back(std::move(d));
    }
    if (ra.size() >= 2) c.spearman = spearman(ra, rb);
    return c;
}

AssociationReport association_report(const Dataset& ds, const std::vector<LocusId>& loci_subset)
{
    const Dataset sub = restrict_to_loci(ds, loci_subset);
    if (sub.n() == 0) throw EmptyDatasetError("dataset '" + ds.name() + "' has no samples");
    AssociationReport report;
    report.dataset_id = ds.name();
    for (std::size_t j = 0; j < sub.m(); ++j) {
        const Vector col = sub.x().col(static_cast<Eigen::Index>(j));
        std::span<const double> xs(col.data(), static_cast<std::size_t>(col.size()));
        LocusAssociation a;
        a.locus = sub.loci()[j];
        try {
            a.correlation = point_biserial(xs, sub.y());
        } catch (const UndefinedMetricError&) {
        }
        a.mutual_info = mutual_information(xs, sub.y());
        report.rows.push_back(std::move(a));
    }
    std::vector<std::size_t> idx(report.rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto by_corr = idx;
    std::stable_sort(by_corr.begin(), by_corr.end(), [&](auto a, auto b) {
        const auto& ca = report.rows[a].correlation;
        const auto& cb = report.rows[b].correlation;
        if (ca.has_value() != cb.has_value()) return ca.has_value();
        return ca && std::abs(*ca) > std::abs(*cb);
    });
    for (std::size_t r = 0; r < by_corr.size(); ++r) report.rows[by_corr[r]].rank_by_corr = r + 1;
    auto by_mi = idx;
    std::stable_sort(by_mi.begin(), by_mi.end(),
                     [&](auto a, auto b) { return report.rows[a].mutual_info > report.rows[b].mutual_info; });
    for (std::size_t r = 0; r < by_mi.size(); ++r) report.rows[by_mi[r]].rank_by_mi = r + 1;
    return report;
}

namespace {

std::string opt(const std::optional<double>& v)
{
    return v ? fmt::format("{:.17g}", *v) : std::string();
}

} // namespace

void write_association_csv(const std::vector<AssociationReport>& reports, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "dataset_id,gene,channel,correlation,mi_nats,rank_corr,rank_mi\n";
    for (const auto& r : reports)
        for (const auto& a : r.rows)
            out << fmt::format("{},{},{},{},{:.17g},{},{}\n", r.dataset_id, a.locus.gene, to_string(a.locus.channel),
                               opt(a.correlation), a.mutual_info, a.rank_by_corr, a.rank_by_mi);
    if (!out) throw IoError("failed writing " + path.string());
}

void write_comparison_csv(const RankingComparison& c, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "gene,channel,rank_before,rank_after,score_before,score_after,delta\n";
    for (const auto& d : c.rows)
        out << fmt::format("{},{},{},{},{},{},{}\n", d.locus.gene, to_string(d.locus.channel), d.rank_before,
                           d.rank_after, opt(d.score_before), opt(d.score_after), opt(d.delta));
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace prnet
