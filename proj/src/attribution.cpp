#include "prnet/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "prnet/error.hpp"
#include "prnet/hash.hpp"
#include "prnet/parallel.hpp"

namespace prnet {

namespace {

double rescale(double dy, double dz, double z, double y, double (*deriv)(double, double))
{
    if (std::abs(dz) < kRescaleGuard) return deriv(z, y);
    return dy / dz;
}

struct Multipliers {
    std::vector<std::vector<double>> layer;  // per hidden unit
    std::vector<double> head;
    HiddenActivation hidden;
};

// Pushes multipliers seeded at the head logits (seed[k] scales head k) back
// to the input; returns d(output)/d(x) multipliers per input.
std::vector<double> backpropagate(const MaskedNetwork& net, const Multipliers& mult, std::span<const double> seed)
{
    const std::size_t depth = net.layers.size();
    std::vector<double> grad_h, grad_prev;
    for (std::size_t k = depth; k-- > 0;) {
        const auto& layer = net.layers[k];
        grad_h.resize(layer.out_width(), 0.0);
        if (seed[k] != 0.0)
            for (std::size_t j = 0; j < layer.out_width(); ++j) grad_h[j] += seed[k] * net.heads[k].w[j];
        grad_prev.assign(layer.in_width(), 0.0);
        const auto& cp = layer.mask.col_ptr();
        const auto& ri = layer.mask.row_idx();
        for (std::size_t j = 0; j < layer.out_width(); ++j) {
            const double dz = grad_h[j] * mult.layer[k][j];
            if (dz == 0.0) continue;
            for (std::size_t p = cp[j]; p < cp[j + 1]; ++p) grad_prev[ri[p]] += dz * layer.weights[p];
        }
        grad_h.swap(grad_prev);
    }
    return grad_h;
}

} // namespace

SampleContributions deeplift_sample(const MaskedNetwork& net, std::span<const double> x,
                                    std::span<const double> reference)
{
    if (reference.size() != x.size()) throw ShapeError("reference and input differ in width");
    const auto t = forward_trace(net, x);
    const auto t0 = forward_trace(net, reference);
    const std::size_t depth = net.layers.size();

    Multipliers mult;
    mult.hidden = net.hidden;
    mult.layer.resize(depth);
    const auto hidden_d = net.hidden == HiddenActivation::tanh
                              ? +[](double, double h) { return 1.0 - h * h; }
                              : +[](double, double) { return 1.0; };
    const auto head_d = net.head == HeadActivation::sigmoid ? +[](double, double o) { return o * (1.0 - o); }
                                                            : +[](double, double) { return 1.0; };
    for (std::size_t k = 0; k < depth; ++k) {
        auto& m = mult.layer[k];
        m.resize(t.pre[k].size());
        for (std::size_t j = 0; j < m.size(); ++j)
            m[j] = rescale(t.post[k][j] - t0.post[k][j], t.pre[k][j] - t0.pre[k][j], t.pre[k][j], t.post[k][j],
                           hidden_d);
    }
    mult.head.resize(depth);
    for (std::size_t k = 0; k < depth; ++k)
        mult.head[k] = rescale(t.head_outputs[k] - t0.head_outputs[k], t.head_logits[k] - t0.head_logits[k],
                               t.head_logits[k], t.head_outputs[k], head_d);

    SampleContributions out;
    const auto m = x.size();
    out.per_head = Matrix::Zero(static_cast<Eigen::Index>(depth), static_cast<Eigen::Index>(m));
    std::vector<double> seed(depth, 0.0);
    for (std::size_t k = 0; k < depth; ++k) {
        std::fill(seed.begin(), seed.end(), 0.0);
        seed[k] = mult.head[k];
        const auto g = backpropagate(net, mult, seed);
        for (std::size_t i = 0; i < m; ++i)
            out.per_head(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = g[i] * (x[i] - reference[i]);
        out.head_delta.push_back(t.head_outputs[k] - t0.head_outputs[k]);
    }
    for (std::size_t k = 0; k < depth; ++k) seed[k] = net.head_weights[k] * mult.head[k];
    const auto g = backpropagate(net, mult, seed);
    out.final.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.final[i] = g[i] * (x[i] - reference[i]);
    out.final_delta = t.final - t0.final;
    return out;
}

ContributionMatrix deeplift(const MaskedNetwork& net, const Dataset& ds, const Vector& reference)
{
    if (ds.loci() != net.input_loci)
        throw ConstraintViolation("dataset loci do not match the network input ordering", {});
    ContributionMatrix cm;
    cm.reference = reference.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(ds.m())) : reference;
    if (static_cast<std::size_t>(cm.reference.size()) != ds.m()) throw ShapeError("reference width mismatch");
    cm.values.resize(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(ds.m()));
    const std::vector<double> ref(cm.reference.data(), cm.reference.data() + cm.reference.size());
    parallel_for(ds.n(), 0, [&](std::size_t i) {
        std::vector<double> row(ds.m());
        for (std::size_t j = 0; j < ds.m(); ++j)
            row[j] = ds.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const auto s = deeplift_sample(net, row, ref);
        for (std::size_t j = 0; j < ds.m(); ++j)
            cm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.final[j];
    });
    return cm;
}

std::vector<LocusId> ImportanceRanking::loci() const
{
    std::vector<LocusId> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.locus);
    return out;
}

std::size_t ImportanceRanking::rank_of(const LocusId& locus) const
{
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].locus == locus) return i + 1;
    return 0;
}

std::string ImportanceRanking::hash() const
{
    std::string canon;
    for (const auto& e : entries) canon += fmt::format("{}\t{}\t{:.17g}\n", e.locus.gene, to_string(e.locus.channel), e.score);
    return sha256_hex(canon);
}

ImportanceRanking rank_scores(const std::vector<LocusId>& loci, std::span<const double> scores)
{
    if (loci.size() != scores.size()) throw ShapeError("scores and loci differ in length");
    ImportanceRanking r;
    r.entries.reserve(loci.size());
    for (std::size_t i = 0; i < loci.size(); ++i) {
        if (!std::isfinite(scores[i])) throw ValidationError("importance score for " + loci[i].label() + " is not finite");
        r.entries.push_back({loci[i], i, scores[i]});
    }
    std::stable_sort(r.entries.begin(), r.entries.end(),
                     [](const RankedLocus& a, const RankedLocus& b) { return a.score > b.score; });
    return r;
}

ImportanceRanking aggregate_importance(const ContributionMatrix& cm, const std::vector<LocusId>& loci,
                                       Aggregation aggregation)
{
    if (static_cast<std::size_t>(cm.values.cols()) != loci.size()) throw ShapeError("contribution width mismatch");
    if (cm.values.rows() == 0) throw EmptyDatasetError("no contributions to aggregate");
    std::vector<double> scores(loci.size());
    for (std::size_t j = 0; j < loci.size(); ++j) {
        double s = cm.values.col(static_cast<Eigen::Index>(j)).cwiseAbs().sum();
        if (aggregation == Aggregation::mean) s /= static_cast<double>(cm.values.rows());
        scores[j] = s;
    }
    return rank_scores(loci, scores);
}

ScoreDistribution score_distribution(const ImportanceRanking& r)
{
    ScoreDistribution d;
    for (const auto& e : r.entries) {
        if (e.score < 0.0) throw ValidationError("importance scores must be non-negative");
        if (e.score == 0.0)
            ++d.zero_count;
        else if (e.score <= 1.0)
            ++d.unit_interval_count;
        else
            ++d.above_one_count;
    }
    if (!r.entries.empty()) {
        const double n = static_cast<double>(r.entries.size());
        d.zero_fraction = static_cast<double>(d.zero_count) / n;
        d.unit_interval_fraction = static_cast<double>(d.unit_interval_count) / n;
        d.above_one_fraction = static_cast<double>(d.above_one_count) / n;
    }
    return d;
}

void write_ranking_csv(const ImportanceRanking& r, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "rank,gene,channel,score\n";
    for (std::size_t i = 0; i < r.entries.size(); ++i)
        out << fmt::format("{},{},{},{:.17g}\n", i + 1, r.entries[i].locus.gene, to_string(r.entries[i].locus.channel),
                           r.entries[i].score);
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace prnet
