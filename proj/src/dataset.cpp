#include "prnet/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "csv.hpp"
#include "prnet/error.hpp"
#include "prnet/random.hpp"

namespace prnet {

Dataset::Dataset(std::vector<std::string> sample_ids, std::vector<LocusId> loci, Matrix x, std::vector<int> y,
                 std::string name)
    : sample_ids_(std::move(sample_ids))
    , loci_(std::move(loci))
    , x_(std::move(x))
    , y_(std::move(y))
    , name_(std::move(name))
{
    if (static_cast<std::size_t>(x_.rows()) != sample_ids_.size() || y_.size() != sample_ids_.size())
        throw ShapeError(fmt::format("dataset shape mismatch: {} sample ids, {} matrix rows, {} labels",
                                     sample_ids_.size(), x_.rows(), y_.size()));
    if (static_cast<std::size_t>(x_.cols()) != loci_.size())
        throw ShapeError(fmt::format("dataset shape mismatch: {} loci, {} matrix columns", loci_.size(), x_.cols()));
    validate_loci(loci_);
    for (int label : y_)
        if (label != 0 && label != 1) throw ValidationError(fmt::format("label {} is not binary", label));
    if (!x_.allFinite()) throw ValidationError("dataset matrix contains non-finite values");
    std::unordered_set<std::string> seen;
    for (const auto& s : sample_ids_)
        if (!seen.insert(s).second) throw DuplicateError("duplicate sample id '" + s + "'");
}

std::size_t Dataset::positives() const noexcept
{
    return static_cast<std::size_t>(std::count(y_.begin(), y_.end(), 1));
}

std::ptrdiff_t Dataset::locus_index(const LocusId& locus) const
{
    auto it = std::find(loci_.begin(), loci_.end(), locus);
    return it == loci_.end() ? -1 : std::distance(loci_.begin(), it);
}

Dataset Dataset::with_name(std::string name) const
{
    Dataset copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const
{
    std::vector<std::string> ids;
    std::vector<int> y;
    Matrix x(static_cast<Eigen::Index>(rows.size()), x_.cols());
    ids.reserve(rows.size());
    y.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ids.push_back(sample_ids_.at(rows[r]));
        y.push_back(y_[rows[r]]);
        x.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(rows[r]));
    }
    return Dataset(std::move(ids), loci_, std::move(x), std::move(y), name_);
}

bool Dataset::operator==(const Dataset& other) const
{
    return sample_ids_ == other.sample_ids_ && loci_ == other.loci_ && y_ == other.y_ &&
           x_.rows() == other.x_.rows() && x_.cols() == other.x_.cols() && x_ == other.x_;
}

// ---------------------------------------------------------------------------
// CSV loading

namespace {

struct RawMatrix {
    std::vector<std::string> genes;
    std::vector<std::string> samples;
    std::vector<std::vector<double>> values;  // samples x genes
};

double parse_cell(const std::string& raw, const std::string& path, std::size_t line)
{
    const std::string cell = csv::trim(raw);
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") return 0.0;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw ParseError(path, line, "non-numeric cell '" + cell + "'");
    return v;
}

RawMatrix read_matrix(const std::filesystem::path& path, bool cna)
{
    const std::string p = path.string();
    auto rows = csv::read(path);
    if (rows.empty()) throw ParseError(p, 1, "missing header row");
    RawMatrix m;
    const auto& header = rows.front();
    std::unordered_set<std::string> seen_genes;
    for (std::size_t c = 1; c < header.fields.size(); ++c) {
        std::string g = csv::trim(header.fields[c]);
        if (g.empty()) throw ParseError(p, header.line, fmt::format("empty gene name in column {}", c + 1));
        if (!seen_genes.insert(g).second) throw ParseError(p, header.line, "duplicate gene column '" + g + "'");
        m.genes.push_back(std::move(g));
    }
    std::unordered_set<std::string> seen_samples;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.fields.size())
            throw ParseError(p, row.line,
                             fmt::format("expected {} fields, found {}", header.fields.size(), row.fields.size()));
        std::string sample = csv::trim(row.fields[0]);
        if (sample.empty()) throw ParseError(p, row.line, "empty sample id");
        if (!seen_samples.insert(sample).second)
            throw DuplicateError(fmt::format("{}:{}: duplicate sample id '{}'", p, row.line, sample));
        std::vector<double> vals(m.genes.size());
        for (std::size_t c = 1; c < row.fields.size(); ++c) {
            double v = parse_cell(row.fields[c], p, row.line);
            if (cna) {
                if (v != std::round(v) || v < -2 || v > 2)
                    throw ParseError(p, row.line, fmt::format("copy-number value {} outside {{-2..2}}", v));
            } else if (v != 0.0 && v != 1.0) {
                throw ParseError(p, row.line, fmt::format("mutation value {} is not 0/1", v));
            }
            vals[c - 1] = v;
        }
        m.samples.push_back(std::move(sample));
        m.values.push_back(std::move(vals));
    }
    return m;
}

std::unordered_map<std::string, int> read_labels(const std::filesystem::path& path)
{
    const std::string p = path.string();
    auto rows = csv::read(path);
    if (rows.empty()) throw ParseError(p, 1, "missing header row");
    std::unordered_map<std::string, int> labels;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() < 2) throw ParseError(p, row.line, "expected sample_id,response");
        std::string sample = csv::trim(row.fields[0]);
        std::string value = csv::trim(row.fields[1]);
        std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return std::tolower(c); });
        int label;
        if (value == "crpc" || value == "1") label = 1;
        else if (value == "primary" || value == "0") label = 0;
        else throw ParseError(p, row.line, "unknown response '" + row.fields[1] + "'");
        if (sample.empty()) throw ParseError(p, row.line, "empty sample id");
        if (!labels.emplace(sample, label).second)
            throw DuplicateError(fmt::format("{}:{}: duplicate sample id '{}'", p, row.line, sample));
    }
    return labels;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& mutation_file, const std::filesystem::path& cna_file,
                     const std::filesystem::path& labels_file, LoadStats* stats)
{
    RawMatrix mut = read_matrix(mutation_file, false);
    RawMatrix cna = read_matrix(cna_file, true);
    auto labels = read_labels(labels_file);

    std::vector<std::string> genes = mut.genes;
    std::unordered_map<std::string, std::size_t> gene_index;
    for (std::size_t g = 0; g < genes.size(); ++g) gene_index[genes[g]] = g;
    for (const auto& g : cna.genes)
        if (gene_index.emplace(g, genes.size()).second) genes.push_back(g);

    std::vector<std::string> samples = mut.samples;
    std::unordered_map<std::string, std::size_t> mut_row, cna_row;
    for (std::size_t i = 0; i < mut.samples.size(); ++i) mut_row[mut.samples[i]] = i;
    for (std::size_t i = 0; i < cna.samples.size(); ++i) {
        cna_row[cna.samples[i]] = i;
        if (!mut_row.contains(cna.samples[i])) samples.push_back(cna.samples[i]);
    }

    LoadStats local;
    std::vector<std::string> kept;
    std::vector<int> y;
    for (const auto& s : samples) {
        auto it = labels.find(s);
        if (it == labels.end()) {
            ++local.dropped_unlabeled;
            continue;
        }
        kept.push_back(s);
        y.push_back(it->second);
    }
    for (const auto& [s, _] : labels)
        if (!mut_row.contains(s) && !cna_row.contains(s)) ++local.labels_without_data;
    if (kept.empty()) throw EmptyDatasetError("no labelled samples after joining " + mutation_file.string() + ", " +
                                              cna_file.string() + " and " + labels_file.string());
    if (local.dropped_unlabeled > 0)
        std::clog << "[warn] dropped " << local.dropped_unlabeled << " sample(s) without a response label\n";

    auto loci = loci_for_genes(genes);
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(loci.size()));
    std::vector<std::size_t> mut_col(mut.genes.size()), cna_col(cna.genes.size());
    for (std::size_t g = 0; g < mut.genes.size(); ++g) mut_col[g] = gene_index.at(mut.genes[g]);
    for (std::size_t g = 0; g < cna.genes.size(); ++g) cna_col[g] = gene_index.at(cna.genes[g]);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        if (auto it = mut_row.find(kept[i]); it != mut_row.end()) {
            const auto& vals = mut.values[it->second];
            for (std::size_t g = 0; g < vals.size(); ++g)
                x(r, static_cast<Eigen::Index>(3 * mut_col[g])) = vals[g];
        }
        if (auto it = cna_row.find(kept[i]); it != cna_row.end()) {
            const auto& vals = cna.values[it->second];
            for (std::size_t g = 0; g < vals.size(); ++g) {
                const auto base = static_cast<Eigen::Index>(3 * cna_col[g]);
                x(r, base + 1) = vals[g] >= 2 ? 1.0 : 0.0;
                x(r, base + 2) = vals[g] <= -2 ? 1.0 : 0.0;
            }
        }
    }
    if (stats) *stats = local;
    return Dataset(std::move(kept), std::move(loci), std::move(x), std::move(y),
                   mutation_file.stem().string());
}

void write_dataset(const Dataset& ds, const std::filesystem::path& mutation_file,
                   const std::filesystem::path& cna_file, const std::filesystem::path& labels_file)
{
    const auto genes = genes_of(ds.loci());
    std::vector<std::array<std::ptrdiff_t, 3>> cols;
    for (const auto& g : genes)
        cols.push_back({ds.locus_index({g, Channel::mutation}), ds.locus_index({g, Channel::cnv_amp}),
                        ds.locus_index({g, Channel::cnv_del})});
    auto cell = [&](std::size_t i, std::ptrdiff_t c) {
        if (c < 0) return 0.0;
        double v = ds.x()(static_cast<Eigen::Index>(i), c);
        if (v != 0.0 && v != 1.0) throw ValidationError("only binary datasets can be written as CSV");
        return v;
    };

    std::ofstream mut(mutation_file), cna(cna_file), lab(labels_file);
    if (!mut || !cna || !lab) throw IoError("cannot write dataset files under " + mutation_file.parent_path().string());
    std::vector<std::string> header{"sample_id"};
    header.insert(header.end(), genes.begin(), genes.end());
    mut << csv::join(header) << '\n';
    cna << csv::join(header) << '\n';
    lab << "sample_id,response\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto& id = csv::escape(ds.sample_ids()[i]);
        mut << id;
        cna << id;
        for (const auto& c : cols) {
            mut << ',' << static_cast<int>(cell(i, c[0]));
            const double amp = cell(i, c[1]);
            const double del = cell(i, c[2]);
            if (amp == 1.0 && del == 1.0)
                throw ValidationError("sample " + ds.sample_ids()[i] + " is both amplified and deleted");
            cna << ',' << (amp == 1.0 ? 2 : del == 1.0 ? -2 : 0);
        }
        mut << '\n';
        cna << '\n';
        lab << id << ',' << (ds.y()[i] == 1 ? "CRPC" : "primary") << '\n';
    }
    if (!mut || !cna || !lab) throw IoError("failed writing dataset files under " + mutation_file.parent_path().string());
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

std::array<std::vector<std::size_t>, 2> class_indices(const std::vector<int>& y)
{
    std::array<std::vector<std::size_t>, 2> out;
    for (std::size_t i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(y[i])].push_back(i);
    return out;
}

} // namespace

Split split(const Dataset& ds, double test_fraction, std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError(fmt::format("test fraction {} outside (0, 1)", test_fraction));
    if (ds.n() < 4) throw StratificationError(fmt::format("cannot split {} samples (need at least 4)", ds.n()));
    auto by_class = class_indices(ds.y());
    std::vector<std::size_t> test_rows, train_rows;
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.size() < 2)
            throw StratificationError(fmt::format("class {} has {} sample(s); stratification needs 2", c, idx.size()));
        Rng rng(derive_seed(seed, {0x5b117, static_cast<std::uint64_t>(c)}));
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto k = static_cast<std::size_t>(std::lround(static_cast<double>(idx.size()) * test_fraction));
        test_rows.insert(test_rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        train_rows.insert(train_rows.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {ds.select_rows(train_rows), ds.select_rows(test_rows)};
}

Dataset stratified_subsample(const Dataset& ds, std::size_t size, std::uint64_t seed)
{
    if (size == 0 || size > ds.n())
        throw ValidationError(fmt::format("subsample size {} outside [1, {}]", size, ds.n()));
    auto by_class = class_indices(ds.y());
    const std::size_t pos_avail = by_class[1].size();
    const std::size_t neg_avail = by_class[0].size();
    auto pos = static_cast<std::size_t>(
        std::lround(static_cast<double>(size) * static_cast<double>(pos_avail) / static_cast<double>(ds.n())));
    if (size >= 2 && pos_avail > 0 && neg_avail > 0) pos = std::clamp<std::size_t>(pos, 1, size - 1);
    pos = std::min(pos, pos_avail);
    if (size - pos > neg_avail) pos = size - neg_avail;
    std::array<std::size_t, 2> take{size - pos, pos};
    std::vector<std::size_t> rows;
    for (std::size_t c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        Rng rng(derive_seed(seed, {0x5ab5, c}));
        std::shuffle(idx.begin(), idx.end(), rng);
        rows.insert(rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]));
    }
    std::sort(rows.begin(), rows.end());
    return ds.select_rows(rows);
}

// ---------------------------------------------------------------------------
// Locus re-indexing

Dataset expand_to_universe(const Dataset& ds, const std::vector<LocusId>& universe)
{
    validate_loci(universe);
    std::unordered_map<LocusId, std::size_t, LocusIdHash> pos;
    for (std::size_t j = 0; j < universe.size(); ++j) pos.emplace(universe[j], j);
    std::vector<std::string> offenders;
    std::vector<std::size_t> target(ds.m());
    for (std::size_t j = 0; j < ds.m(); ++j) {
        auto it = pos.find(ds.loci()[j]);
        if (it == pos.end()) offenders.push_back(ds.loci()[j].label());
        else target[j] = it->second;
    }
    if (!offenders.empty()) {
        std::string list;
        for (std::size_t i = 0; i < offenders.size() && i < 20; ++i) list += (i ? ", " : "") + offenders[i];
        if (offenders.size() > 20) list += fmt::format(", ... ({} total)", offenders.size());
        throw CoverageError("dataset loci not covered by the universe: " + list);
    }
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(universe.size()));
    for (std::size_t j = 0; j < ds.m(); ++j)
        x.col(static_cast<Eigen::Index>(target[j])) = ds.x().col(static_cast<Eigen::Index>(j));
    return Dataset(ds.sample_ids(), universe, std::move(x), ds.y(), ds.name());
}

Dataset restrict_to_loci(const Dataset& ds, const std::vector<LocusId>& g1)
{
    validate_loci(g1);
    std::unordered_map<LocusId, std::size_t, LocusIdHash> pos;
    for (std::size_t j = 0; j < ds.m(); ++j) pos.emplace(ds.loci()[j], j);
    std::vector<std::string> missing;
    std::vector<std::size_t> source;
    source.reserve(g1.size());
    for (const auto& l : g1) {
        auto it = pos.find(l);
        if (it == pos.end()) missing.push_back(l.label());
        else source.push_back(it->second);
    }
    if (!missing.empty() || ds.m() < g1.size()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
        auto what = fmt::format("locus constraint violated for dataset '{}': |G0|={} |G1|={}; "
                                "{} locus/loci of G1 missing from G0: {}",
                                ds.name(), ds.m(), g1.size(), missing.size(), list);
        throw ConstraintViolation(what, std::move(missing));
    }
    Matrix x(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(g1.size()));
    for (std::size_t j = 0; j < source.size(); ++j)
        x.col(static_cast<Eigen::Index>(j)) = ds.x().col(static_cast<Eigen::Index>(source[j]));
    return Dataset(ds.sample_ids(), g1, std::move(x), ds.y(), ds.name());
}

// ---------------------------------------------------------------------------
// Synthetic data

std::string synthetic_gene_name(std::size_t index)
{
    return fmt::format("G{:05d}", index);
}

namespace {

struct GeneFrequencies {
    std::vector<std::array<double, 3>> p;  // per gene: mutation, amp, del
};

struct PlantedModel {
    std::vector<std::size_t> genes;    // gene indices in planted rank order
    std::vector<Channel> drivers;
    std::vector<double> effects;
};

GeneFrequencies draw_frequencies(std::size_t gene_count, const SyntheticOptions& o, Rng& rng)
{
    std::uniform_real_distribution<double> freq(o.min_freq, o.max_freq);
    GeneFrequencies f;
    f.p.resize(gene_count);
    for (auto& g : f.p)
        for (auto& v : g) v = freq(rng);
    return f;
}

PlantedModel draw_planted(std::size_t gene_count, std::size_t planted, const SyntheticOptions& o, Rng& rng)
{
    std::vector<std::size_t> order(gene_count);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> effect(o.effect, 2.0 * o.effect);
    PlantedModel pm;
    for (std::size_t r = 0; r < planted; ++r) {
        pm.genes.push_back(order[r]);
        pm.drivers.push_back(kChannels[r % kChannels.size()]);
        pm.effects.push_back(effect(rng));
    }
    return pm;
}

void apply_planted_frequencies(GeneFrequencies& f, const PlantedModel& pm, const SyntheticOptions& o)
{
    for (std::size_t r = 0; r < pm.genes.size(); ++r)
        f.p[pm.genes[r]][static_cast<std::size_t>(pm.drivers[r])] = o.planted_freq;
}

double centered_intercept(const GeneFrequencies& f, const PlantedModel& pm)
{
    double s = 0.0;
    for (std::size_t r = 0; r < pm.genes.size(); ++r)
        s += pm.effects[r] * f.p[pm.genes[r]][static_cast<std::size_t>(pm.drivers[r])];
    return -s;
}

Dataset draw_cohort(std::size_t n, const GeneFrequencies& f, const PlantedModel& pm, double intercept, double noise,
                    double flip_rate, Rng& rng, const std::string& name, const std::string& sample_prefix)
{
    const std::size_t genes = f.p.size();
    std::vector<std::string> gene_names(genes);
    for (std::size_t g = 0; g < genes; ++g) gene_names[g] = synthetic_gene_name(g);
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(3 * genes));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<int> y(n);
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t g = 0; g < genes; ++g) {
            const auto& p = f.p[g];
            const auto base = static_cast<Eigen::Index>(3 * g);
            x(r, base) = u(rng) < p[0] ? 1.0 : 0.0;
            const double c = u(rng);
            if (c < p[1]) x(r, base + 1) = 1.0;
            else if (c < p[1] + p[2]) x(r, base + 2) = 1.0;
        }
        double score = intercept;
        for (std::size_t k = 0; k < pm.genes.size(); ++k)
            score += pm.effects[k] * x(r, static_cast<Eigen::Index>(3 * pm.genes[k] +
                                                                    static_cast<std::size_t>(pm.drivers[k])));
        score += noise * gauss(rng);
        int label = 1.0 / (1.0 + std::exp(-score)) >= 0.5 ? 1 : 0;
        if (flip_rate > 0.0 && u(rng) < flip_rate) label = 1 - label;
        y[i] = label;
        ids[i] = fmt::format("{}{:05d}", sample_prefix, i);
    }
    return Dataset(std::move(ids), loci_for_genes(gene_names), std::move(x), std::move(y), name);
}

SyntheticTruth make_truth(const PlantedModel& pm, double intercept)
{
    SyntheticTruth t;
    for (std::size_t r = 0; r < pm.genes.size(); ++r) {
        const auto g = synthetic_gene_name(pm.genes[r]);
        t.planted_genes.insert(g);
        t.effect_sizes[g] = pm.effects[r];
        t.driver_channel[g] = pm.drivers[r];
    }
    t.intercept = intercept;
    return t;
}

void validate_synthetic_args(std::size_t n, std::size_t gene_count, std::size_t planted, double noise,
                             const SyntheticOptions& o)
{
    if (planted == 0 || planted > gene_count)
        throw ValidationError(fmt::format("planted gene count {} outside [1, {}]", planted, gene_count));
    if (n < 20) throw ValidationError(fmt::format("synthetic sample count {} below 20", n));
    if (noise < 0) throw ValidationError("noise must be non-negative");
    if (!(o.min_freq >= 0 && o.min_freq <= o.max_freq && o.max_freq <= 0.5 && o.planted_freq > 0 &&
          o.planted_freq <= 0.5 && o.flip_rate >= 0 && o.flip_rate < 0.5 && o.effect > 0))
        throw ValidationError("synthetic frequency/effect options out of range");
}

constexpr int kMaxSyntheticAttempts = 10;

} // namespace

SyntheticData generate_synthetic(std::size_t n, std::size_t gene_count, std::size_t planted, double noise,
                                 std::uint64_t seed, const SyntheticOptions& options)
{
    validate_synthetic_args(n, gene_count, planted, noise, options);
    for (int attempt = 0; attempt < kMaxSyntheticAttempts; ++attempt) {
        Rng rng(derive_seed(seed, {0x51a7, static_cast<std::uint64_t>(attempt)}));
        auto freqs = draw_frequencies(gene_count, options, rng);
        auto pm = draw_planted(gene_count, planted, options, rng);
        apply_planted_frequencies(freqs, pm, options);
        const double intercept = centered_intercept(freqs, pm);
        auto ds = draw_cohort(n, freqs, pm, intercept, noise, options.flip_rate, rng, "synthetic", "S");
        if (ds.has_both_classes()) return {std::move(ds), make_truth(pm, intercept)};
    }
    throw Error(fmt::format("synthetic generator produced a single class {} times in a row", kMaxSyntheticAttempts));
}

std::vector<SyntheticData> generate_shift_family(std::size_t gene_count, std::size_t planted, double noise,
                                                 std::uint64_t seed, const ShiftFamilyOptions& family,
                                                 const SyntheticOptions& options)
{
    validate_synthetic_args(std::min(family.source_n, family.shifted_n), gene_count, planted, noise, options);
    if (family.datasets < 1) throw ValidationError("shift family needs at least one dataset");
    Rng shared(derive_seed(seed, {0xfa3117}));
    auto base = draw_frequencies(gene_count, options, shared);
    auto pm = draw_planted(gene_count, planted, options, shared);
    apply_planted_frequencies(base, pm, options);

    std::vector<SyntheticData> out;
    for (std::size_t c = 0; c < family.datasets; ++c) {
        bool done = false;
        for (int attempt = 0; attempt < kMaxSyntheticAttempts && !done; ++attempt) {
            Rng rng(derive_seed(seed, {0xfa3117, c + 1, static_cast<std::uint64_t>(attempt)}));
            GeneFrequencies f = base;
            double offset = 0.0;
            if (c > 0) {
                std::uniform_real_distribution<double> jitter(-family.frequency_shift, family.frequency_shift);
                for (auto& g : f.p)
                    for (auto& v : g) v = std::clamp(v * std::exp(jitter(rng)), 0.005, 0.45);
                for (auto& g : f.p)
                    if (g[1] + g[2] > 0.9) g[2] = 0.9 - g[1];
                offset = std::normal_distribution<double>(0.0, family.prior_shift)(rng);
            }
            const double intercept = centered_intercept(f, pm) + offset;
            const std::size_t n = c == 0 ? family.source_n : family.shifted_n;
            auto ds = draw_cohort(n, f, pm, intercept, noise, options.flip_rate, rng, fmt::format("cohort{}", c + 1),
                                  fmt::format("C{}S", c + 1));
            if (ds.has_both_classes()) {
                out.push_back({std::move(ds), make_truth(pm, intercept)});
                done = true;
            }
        }
        if (!done) throw Error(fmt::format("shift cohort {} degenerated to a single class", c + 1));
    }
    return out;
}

} // namespace prnet
