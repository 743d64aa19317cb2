#include "prnet/network.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prnet/error.hpp"
#include "prnet/hash.hpp"
#include "prnet/metrics.hpp"
#include "prnet/random.hpp"

namespace prnet {

using nlohmann::json;

Eigen::MatrixXd MaskedLayer::dense_weights() const
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(in_width()), static_cast<Eigen::Index>(out_width()));
    const auto& cp = mask.col_ptr();
    const auto& ri = mask.row_idx();
    for (std::size_t j = 0; j < out_width(); ++j)
        for (std::size_t p = cp[j]; p < cp[j + 1]; ++p)
            d(static_cast<Eigen::Index>(ri[p]), static_cast<Eigen::Index>(j)) = weights[p];
    return d;
}

std::size_t MaskedNetwork::parameter_count() const
{
    return count_params(*this).total;
}

bool MaskedNetwork::same_structure(const MaskedNetwork& other) const
{
    if (input_loci != other.input_loci || nodes != other.nodes || layers.size() != other.layers.size()) return false;
    for (std::size_t k = 0; k < layers.size(); ++k)
        if (!(layers[k].mask == other.layers[k].mask)) return false;
    return true;
}

MaskedNetwork init_network(const MaskStack& masks, std::uint64_t seed)
{
    if (masks.masks.empty()) throw ValidationError("mask stack is empty");
    if (masks.masks.front().rows() != masks.loci.size())
        throw ShapeError("first mask does not match the locus list");
    for (std::size_t k = 1; k < masks.masks.size(); ++k)
        if (masks.masks[k].rows() != masks.masks[k - 1].cols())
            throw ShapeError(fmt::format("mask {} input width does not match mask {} output width", k, k - 1));

    Rng rng(derive_seed(seed, {0x1a17}));
    MaskedNetwork net;
    net.input_loci = masks.loci;
    net.nodes = masks.nodes;
    for (const auto& mask : masks.masks) {
        MaskedLayer layer{mask, std::vector<double>(mask.nnz()), std::vector<double>(mask.cols(), 0.0)};
        for (std::size_t j = 0; j < mask.cols(); ++j) {
            const auto col = mask.column(j);
            if (col.empty()) continue;
            const double bound = 1.0 / std::sqrt(static_cast<double>(col.size()));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (std::size_t p = mask.col_ptr()[j]; p < mask.col_ptr()[j + 1]; ++p) layer.weights[p] = u(rng);
        }
        OutputHead head;
        head.w.resize(mask.cols());
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, mask.cols())));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (auto& w : head.w) w = u(rng);
        net.layers.push_back(std::move(layer));
        net.heads.push_back(std::move(head));
    }
    net.head_weights.assign(net.layers.size(), 1.0 / static_cast<double>(net.layers.size()));
    return net;
}

void set_head_weights(MaskedNetwork& net, std::vector<double> weights)
{
    if (weights.size() != net.heads.size())
        throw ShapeError(fmt::format("{} head weights for {} heads", weights.size(), net.heads.size()));
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("head weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError(fmt::format("head weights sum to {}, not 1", sum));
    net.head_weights = std::move(weights);
}

// ---------------------------------------------------------------------------
// Activations

double apply_hidden(HiddenActivation act, double z)
{
    return act == HiddenActivation::tanh ? std::tanh(z) : z;
}

double hidden_derivative(HiddenActivation act, double, double h)
{
    return act == HiddenActivation::tanh ? 1.0 - h * h : 1.0;
}

double apply_head(HeadActivation act, double a)
{
    return act == HeadActivation::sigmoid ? 1.0 / (1.0 + std::exp(-a)) : a;
}

double head_derivative(HeadActivation act, double, double out)
{
    return act == HeadActivation::sigmoid ? out * (1.0 - out) : 1.0;
}

namespace {

void forward_into(const MaskedNetwork& net, std::span<const double> x, ForwardTrace& t)
{
    if (x.size() != net.input_width())
        throw ShapeError(fmt::format("input has {} values, network expects {}", x.size(), net.input_width()));
    const std::size_t depth = net.layers.size();
    t.pre.resize(depth);
    t.post.resize(depth);
    t.head_logits.resize(depth);
    t.head_outputs.resize(depth);
    t.final = 0.0;
    std::span<const double> prev = x;
    for (std::size_t k = 0; k < depth; ++k) {
        const auto& layer = net.layers[k];
        const auto& cp = layer.mask.col_ptr();
        const auto& ri = layer.mask.row_idx();
        auto& z = t.pre[k];
        auto& h = t.post[k];
        z.resize(layer.out_width());
        h.resize(layer.out_width());
        for (std::size_t j = 0; j < layer.out_width(); ++j) {
            double s = layer.bias[j];
            for (std::size_t p = cp[j]; p < cp[j + 1]; ++p) s += layer.weights[p] * prev[ri[p]];
            z[j] = s;
            h[j] = apply_hidden(net.hidden, s);
        }
        const auto& head = net.heads[k];
        double a = head.b;
        for (std::size_t j = 0; j < h.size(); ++j) a += head.w[j] * h[j];
        t.head_logits[k] = a;
        t.head_outputs[k] = apply_head(net.head, a);
        t.final += net.head_weights[k] * t.head_outputs[k];
        prev = h;
    }
}

double bce_with_logits(double a, int y)
{
    return std::max(a, 0.0) - a * y + std::log1p(std::exp(-std::abs(a)));
}

std::vector<std::size_t> parameter_offsets(const MaskedNetwork& net)
{
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (const auto& l : net.layers) {
        offsets.push_back(off);
        off += l.weights.size() + l.bias.size();
    }
    for (const auto& h : net.heads) {
        offsets.push_back(off);
        off += h.w.size() + 1;
    }
    offsets.push_back(off);
    return offsets;
}

// Accumulates the gradient of scale * (1/K) sum_k BCE(head_k, y) for one sample.
double accumulate_sample(const MaskedNetwork& net, std::span<const double> x, int y, double scale,
                         const std::vector<std::size_t>& offsets, ForwardTrace& t,
                         std::vector<std::vector<double>>& dh, std::span<double> grad)
{
    forward_into(net, x, t);
    const std::size_t depth = net.layers.size();
    const double per_head = scale / static_cast<double>(depth);
    double loss = 0.0;
    dh.resize(depth);
    for (std::size_t k = 0; k < depth; ++k) dh[k].assign(net.layers[k].out_width(), 0.0);

    for (std::size_t k = 0; k < depth; ++k) {
        loss += per_head * bce_with_logits(t.head_logits[k], y);
        const double da = per_head * (t.head_outputs[k] - y);
        const auto& head = net.heads[k];
        double* g = grad.data() + offsets[depth + k];
        const auto& h = t.post[k];
        for (std::size_t j = 0; j < h.size(); ++j) {
            g[j] += da * h[j];
            dh[k][j] += da * head.w[j];
        }
        g[h.size()] += da;
    }
    for (std::size_t k = depth; k-- > 0;) {
        const auto& layer = net.layers[k];
        const auto& cp = layer.mask.col_ptr();
        const auto& ri = layer.mask.row_idx();
        std::span<const double> prev = k == 0 ? x : std::span<const double>(t.post[k - 1]);
        double* gw = grad.data() + offsets[k];
        double* gb = gw + layer.weights.size();
        for (std::size_t j = 0; j < layer.out_width(); ++j) {
            const double dz = dh[k][j] * hidden_derivative(net.hidden, t.pre[k][j], t.post[k][j]);
            if (dz == 0.0) continue;
            gb[j] += dz;
            for (std::size_t p = cp[j]; p < cp[j + 1]; ++p) {
                gw[p] += dz * prev[ri[p]];
                if (k > 0) dh[k - 1][ri[p]] += dz * layer.weights[p];
            }
        }
    }
    return loss;
}

// Row-major copy so samples are contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::span<const double> row_span(const RowMatrix& x, std::size_t r)
{
    return {x.data() + r * static_cast<std::size_t>(x.cols()), static_cast<std::size_t>(x.cols())};
}

void require_matching_loci(const MaskedNetwork& net, const Dataset& ds)
{
    if (ds.loci() == net.input_loci) return;
    std::vector<std::string> missing;
    std::unordered_map<LocusId, bool, LocusIdHash> have;
    for (const auto& l : ds.loci()) have.emplace(l, true);
    for (const auto& l : net.input_loci)
        if (!have.contains(l)) missing.push_back(l.label());
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += fmt::format(", ... ({} total)", missing.size());
    if (missing.empty())
        throw ConstraintViolation(fmt::format("dataset '{}' loci ({}) do not match the network input ordering ({})",
                                              ds.name(), ds.m(), net.input_width()),
                                  {});
    auto what = fmt::format("dataset '{}' lacks {} network input locus/loci: {}", ds.name(), missing.size(), list);
    throw ConstraintViolation(what, std::move(missing));
}

} // namespace

ForwardTrace forward_trace(const MaskedNetwork& net, std::span<const double> x)
{
    ForwardTrace t;
    forward_into(net, x, t);
    return t;
}

ForwardResult forward(const MaskedNetwork& net, std::span<const double> x)
{
    auto t = forward_trace(net, x);
    return {std::move(t.head_outputs), t.final};
}

// ---------------------------------------------------------------------------
// Parameters and gradients

std::vector<double> flatten_parameters(const MaskedNetwork& net)
{
    std::vector<double> p;
    for (const auto& l : net.layers) {
        p.insert(p.end(), l.weights.begin(), l.weights.end());
        p.insert(p.end(), l.bias.begin(), l.bias.end());
    }
    for (const auto& h : net.heads) {
        p.insert(p.end(), h.w.begin(), h.w.end());
        p.push_back(h.b);
    }
    return p;
}

void assign_parameters(MaskedNetwork& net, std::span<const double> params)
{
    const auto offsets = parameter_offsets(net);
    if (params.size() != offsets.back())
        throw ShapeError(fmt::format("{} parameters for a network with {}", params.size(), offsets.back()));
    const double* p = params.data();
    for (auto& l : net.layers) {
        std::copy_n(p, l.weights.size(), l.weights.begin());
        p += l.weights.size();
        std::copy_n(p, l.bias.size(), l.bias.begin());
        p += l.bias.size();
    }
    for (auto& h : net.heads) {
        std::copy_n(p, h.w.size(), h.w.begin());
        p += h.w.size();
        h.b = *p++;
    }
}

LossGradient loss_and_gradient(const MaskedNetwork& net, const Matrix& x, std::span<const int> y,
                               std::span<const std::size_t> rows, double positive_weight)
{
    if (static_cast<std::size_t>(x.cols()) != net.input_width()) throw ShapeError("input width mismatch");
    if (net.head != HeadActivation::sigmoid) throw ValidationError("loss requires sigmoid heads");
    const auto offsets = parameter_offsets(net);
    LossGradient out;
    out.gradient.assign(offsets.back(), 0.0);
    ForwardTrace t;
    std::vector<std::vector<double>> dh;
    std::vector<double> row(net.input_width());
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (auto r : rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        const double w = (y[r] == 1 ? positive_weight : 1.0) * inv;
        out.loss += accumulate_sample(net, row, y[r], w, offsets, t, dh, out.gradient);
    }
    return out;
}

double training_loss(const MaskedNetwork& net, const Dataset& ds, double positive_weight)
{
    std::vector<std::size_t> rows(ds.n());
    std::iota(rows.begin(), rows.end(), 0);
    return loss_and_gradient(net, ds.x(), ds.y(), rows, positive_weight).loss;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
    if (epochs < 1) throw ValidationError("epochs must be at least 1");
    if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
    if (early_stop_patience < 1) throw ValidationError("early_stop_patience must be at least 1");
    if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5))
        throw ValidationError("validation_fraction must lie in [0, 0.5]");
    if (class_weight_positive && !(*class_weight_positive > 0.0))
        throw ValidationError("class_weight_positive must be positive");
}

namespace {

struct Partition {
    std::vector<std::size_t> fit;
    std::vector<std::size_t> validation;
};

// Stratified holdout that always leaves at least one sample of each class on
// both sides.
Partition holdout(const std::vector<int>& y, double fraction, std::uint64_t seed)
{
    Partition part;
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);
    if (fraction <= 0.0 || by_class[0].size() < 2 || by_class[1].size() < 2) {
        if (fraction > 0.0)
            std::clog << "[warn] too few samples per class for a validation holdout; early stopping disabled\n";
        part.fit.resize(y.size());
        std::iota(part.fit.begin(), part.fit.end(), 0);
        return part;
    }
    for (std::size_t c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        Rng rng(derive_seed(seed, {0x7a11d, c}));
        std::shuffle(idx.begin(), idx.end(), rng);
        auto k = static_cast<std::size_t>(std::lround(static_cast<double>(idx.size()) * fraction));
        k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
        part.validation.insert(part.validation.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        part.fit.insert(part.fit.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }
    std::sort(part.fit.begin(), part.fit.end());
    std::sort(part.validation.begin(), part.validation.end());
    return part;
}

} // namespace

TrainResult train(MaskedNetwork net, const Dataset& train_ds, const TrainConfig& cfg)
{
    cfg.validate();
    require_matching_loci(net, train_ds);
    if (!train_ds.has_both_classes()) throw ValidationError("training data must contain both classes");
    if (net.head != HeadActivation::sigmoid) throw ValidationError("training requires sigmoid heads");

    const auto start = std::chrono::steady_clock::now();
    const RowMatrix x = train_ds.x();
    const auto& y = train_ds.y();
    const Partition part = holdout(y, cfg.validation_fraction, cfg.seed);

    double pos_weight = 1.0;
    if (cfg.class_weight_positive) {
        pos_weight = *cfg.class_weight_positive;
    } else {
        std::size_t pos = 0;
        for (auto r : part.fit) pos += static_cast<std::size_t>(y[r]);
        const std::size_t neg = part.fit.size() - pos;
        pos_weight = pos > 0 && neg > 0 ? static_cast<double>(neg) / static_cast<double>(pos) : 1.0;
    }

    const auto offsets = parameter_offsets(net);
    const std::size_t n_params = offsets.back();
    std::vector<double> params = flatten_parameters(net);
    std::vector<double> grad(n_params), m1(n_params, 0.0), m2(n_params, 0.0);
    std::vector<double> best_params = params;
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    TrainReport report;
    ForwardTrace trace;
    std::vector<std::vector<double>> dh;
    std::vector<std::size_t> order = part.fit;
    double best_auc = -1.0;
    int since_best = 0;
    std::vector<double> val_scores(part.validation.size());
    std::vector<int> val_y(part.validation.size());
    for (std::size_t i = 0; i < part.validation.size(); ++i) val_y[i] = y[part.validation[i]];

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, {0xe90c, static_cast<std::uint64_t>(epoch)}));
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start_idx = 0; start_idx < order.size(); start_idx += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end_idx = std::min(order.size(), start_idx + static_cast<std::size_t>(cfg.batch_size));
            const double inv = 1.0 / static_cast<double>(end_idx - start_idx);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t b = start_idx; b < end_idx; ++b) {
                const auto r = order[b];
                batch_loss += accumulate_sample(net, row_span(x, r), y[r], (y[r] == 1 ? pos_weight : 1.0) * inv,
                                                offsets, trace, dh, grad);
            }
            if (!std::isfinite(batch_loss))
                throw DivergenceError(fmt::format("training diverged at epoch {} (learning rate {})", epoch,
                                                  cfg.learning_rate));
            epoch_loss += batch_loss * static_cast<double>(end_idx - start_idx);
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t i = 0; i < n_params; ++i) {
                m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
                m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
                params[i] -= cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + eps);
            }
            assign_parameters(net, params);
        }
        epoch_loss /= static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss))
            throw DivergenceError(fmt::format("training diverged at epoch {} (learning rate {})", epoch,
                                              cfg.learning_rate));
        report.epoch_losses.push_back(epoch_loss);
        report.stopped_epoch = epoch;

        if (part.validation.empty()) {
            report.best_epoch = epoch;
            continue;
        }
        for (std::size_t i = 0; i < part.validation.size(); ++i)
            val_scores[i] = forward(net, row_span(x, part.validation[i])).final;
        const auto metrics = threshold_metrics(val_scores, val_y);
        report.validation_recall.push_back(metrics.recall);
        report.validation_auc.push_back(metrics.auc);
        if (metrics.auc > best_auc) {
            best_auc = metrics.auc;
            best_params = params;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            break;
        }
    }
    if (!part.validation.empty()) assign_parameters(net, best_params);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(net), std::move(report)};
}

Vector predict(const MaskedNetwork& net, const Dataset& ds)
{
    require_matching_loci(net, ds);
    const RowMatrix x = ds.x();
    Vector out(static_cast<Eigen::Index>(ds.n()));
    ForwardTrace t;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        forward_into(net, row_span(x, i), t);
        out(static_cast<Eigen::Index>(i)) = t.final;
    }
    return out;
}

ParamCount count_params(const MaskedNetwork& net)
{
    ParamCount c;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& l = net.layers[k];
        const std::size_t n = l.mask.nnz() + l.bias.size();
        c.per_layer.push_back(n);
        c.total += n;
        c.heads += net.heads[k].w.size() + 1;
    }
    c.total += c.heads;
    if (!net.layers.empty()) {
        c.input_connections = net.layers.front().mask.nnz();
        c.input_layer = c.input_connections + net.layers.front().bias.size();
    }
    return c;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kBlobLayout =
    "little-endian float64; for each layer in order: weights in compressed-column mask order, then biases; "
    "then for each head in order: weights, then bias";

void write_le_doubles(std::ostream& out, const std::vector<double>& values)
{
    for (double v : values) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.write(bytes, 8);
    }
}

std::vector<double> read_le_doubles(std::istream& in, std::size_t count)
{
    std::vector<double> values(count);
    for (auto& v : values) {
        char bytes[8];
        if (!in.read(bytes, 8)) throw IoError("model blob is truncated");
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        v = std::bit_cast<double>(bits);
    }
    return values;
}

} // namespace

void save_network(const MaskedNetwork& net, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& blob_path)
{
    const auto params = flatten_parameters(net);
    {
        std::ofstream blob(blob_path, std::ios::binary);
        if (!blob) throw IoError("cannot write " + blob_path.string());
        write_le_doubles(blob, params);
        if (!blob) throw IoError("failed writing " + blob_path.string());
    }
    json j;
    j["format"] = "prnet-masked-network";
    j["format_version"] = 1;
    j["hidden_activation"] = net.hidden == HiddenActivation::tanh ? "tanh" : "identity";
    j["head_activation"] = net.head == HeadActivation::sigmoid ? "sigmoid" : "identity";
    j["hierarchy_hash"] = net.hierarchy_hash;
    json loci = json::array();
    for (const auto& l : net.input_loci) loci.push_back({l.gene, std::string(to_string(l.channel))});
    j["input_loci"] = std::move(loci);
    j["nodes"] = net.nodes;
    json layers = json::array();
    for (const auto& l : net.layers)
        layers.push_back({{"rows", l.mask.rows()},
                          {"cols", l.mask.cols()},
                          {"nnz", l.mask.nnz()},
                          {"col_ptr", l.mask.col_ptr()},
                          {"row_idx", l.mask.row_idx()}});
    j["layers"] = std::move(layers);
    j["head_weights"] = net.head_weights;
    j["parameter_count"] = params.size();
    j["blob"] = blob_path.filename().string();
    j["blob_sha256"] = sha256_file(blob_path);
    j["blob_layout"] = kBlobLayout;
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot write " + manifest_path.string());
    out << j.dump(1) << '\n';
}

MaskedNetwork load_network(const std::filesystem::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open " + manifest_path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("model manifest " + manifest_path.string() + ": " + e.what());
    }
    MaskedNetwork net;
    try {
        if (j.at("format") != "prnet-masked-network") throw ValidationError("not a prnet model manifest");
        net.hidden = j.at("hidden_activation") == "tanh" ? HiddenActivation::tanh : HiddenActivation::identity;
        net.head = j.at("head_activation") == "sigmoid" ? HeadActivation::sigmoid : HeadActivation::identity;
        net.hierarchy_hash = j.value("hierarchy_hash", "");
        for (const auto& l : j.at("input_loci"))
            net.input_loci.push_back({l.at(0).get<std::string>(), channel_from_string(l.at(1).get<std::string>())});
        net.nodes = j.at("nodes").get<std::vector<std::vector<std::string>>>();
        for (const auto& lj : j.at("layers")) {
            const auto rows = lj.at("rows").get<std::size_t>();
            const auto cols = lj.at("cols").get<std::size_t>();
            const auto cp = lj.at("col_ptr").get<std::vector<std::size_t>>();
            const auto ri = lj.at("row_idx").get<std::vector<std::size_t>>();
            if (cp.size() != cols + 1 || cp.back() != ri.size()) throw ValidationError("corrupt mask in manifest");
            std::vector<std::pair<std::size_t, std::size_t>> entries;
            for (std::size_t c = 0; c < cols; ++c)
                for (std::size_t p = cp[c]; p < cp[c + 1]; ++p) entries.emplace_back(ri[p], c);
            BinaryMask mask(rows, cols, std::move(entries));
            net.layers.push_back({mask, std::vector<double>(mask.nnz()), std::vector<double>(cols)});
            net.heads.push_back({std::vector<double>(cols), 0.0});
        }
        net.head_weights = j.at("head_weights").get<std::vector<double>>();
        const auto blob_path = manifest_path.parent_path() / j.at("blob").get<std::string>();
        if (sha256_file(blob_path) != j.at("blob_sha256").get<std::string>())
            throw ValidationError("model blob hash does not match the manifest");
        std::ifstream blob(blob_path, std::ios::binary);
        assign_parameters(net, read_le_doubles(blob, j.at("parameter_count").get<std::size_t>()));
    } catch (const json::exception& e) {
        throw ValidationError("model manifest " + manifest_path.string() + ": " + e.what());
    }
    if (net.layers.empty() || net.layers.front().in_width() != net.input_width())
        throw ValidationError("model manifest shapes are inconsistent");
    set_head_weights(net, net.head_weights);
    return net;
}

} // namespace prnet
