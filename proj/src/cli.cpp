#include "prnet/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "prnet/analysis.hpp"
#include "prnet/attribution.hpp"
#include "prnet/error.hpp"
#include "prnet/harness.hpp"
#include "prnet/hash.hpp"
#include "prnet/metrics.hpp"
#include "prnet/random.hpp"
#include "prnet/report.hpp"

#ifndef PRNET_VERSION
#define PRNET_VERSION "unknown"
#endif

namespace prnet {

using nlohmann::json;
namespace fs = std::filesystem;

std::string version_string()
{
    return fmt::format("prnet 1.0.0 ({})", PRNET_VERSION);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed)
{
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError(fmt::format("unknown key '{}' in {}", key, where));
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where)
{
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(fmt::format("{}.{} has the wrong type", where, key));
    }
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

DataFiles parse_data_files(const json& j, const fs::path& base, const std::string& where)
{
    check_keys(j, where, {"mutation", "cna", "labels", "name"});
    DataFiles d;
    for (const char* key : {"mutation", "cna", "labels"})
        if (!j.contains(key)) throw ValidationError(fmt::format("{} needs '{}'", where, key));
    std::string s;
    read(j, "mutation", s, where);
    d.mutation = resolve(base, s);
    read(j, "cna", s, where);
    d.cna = resolve(base, s);
    read(j, "labels", s, where);
    d.labels = resolve(base, s);
    d.name = d.mutation.parent_path().filename().string();
    read(j, "name", d.name, where);
    if (d.name.empty()) d.name = "dataset";
    return d;
}

SyntheticOptions parse_synthetic_options(const json& j, const std::string& where)
{
    SyntheticOptions o;
    read(j, "effect", o.effect, where);
    read(j, "flip_rate", o.flip_rate, where);
    read(j, "min_freq", o.min_freq, where);
    read(j, "max_freq", o.max_freq, where);
    read(j, "planted_freq", o.planted_freq, where);
    return o;
}

} // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir)
{
    check_keys(j, "config",
               {"seed", "out_dir", "data", "synthetic", "hierarchy", "toy_hierarchy", "g1", "model", "test_fraction",
                "network", "selection", "baselines", "eval", "bench", "analysis", "threads"});
    RunConfig c;
    c.raw = j;
    if (!j.contains("seed") || !j.at("seed").is_number_unsigned())
        throw ValidationError("config needs a non-negative integer 'seed'");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) {
        std::string s;
        read(j, "out_dir", s, "config");
        c.out_dir = resolve(base_dir, s);
    }
    if (j.contains("data")) c.data = parse_data_files(j.at("data"), base_dir, "data");
    if (j.contains("synthetic")) {
        const auto& s = j.at("synthetic");
        check_keys(s, "synthetic",
                   {"n", "genes", "planted", "noise", "effect", "flip_rate", "min_freq", "max_freq", "planted_freq"});
        SyntheticSpec spec;
        read(s, "n", spec.n, "synthetic");
        read(s, "genes", spec.genes, "synthetic");
        read(s, "planted", spec.planted, "synthetic");
        read(s, "noise", spec.noise, "synthetic");
        spec.options = parse_synthetic_options(s, "synthetic");
        c.synthetic = spec;
    }
    if (j.contains("hierarchy")) {
        std::string s;
        read(j, "hierarchy", s, "config");
        c.hierarchy = resolve(base_dir, s);
    }
    if (j.contains("toy_hierarchy")) {
        const auto& t = j.at("toy_hierarchy");
        check_keys(t, "toy_hierarchy", {"levels", "fanin"});
        ToyHierarchySpec spec;
        read(t, "levels", spec.levels, "toy_hierarchy");
        read(t, "fanin", spec.fanin, "toy_hierarchy");
        c.toy_hierarchy = spec;
    }
    if (j.contains("g1")) {
        std::string s;
        read(j, "g1", s, "config");
        c.g1_path = resolve(base_dir, s);
    }
    if (j.contains("model")) {
        std::string s;
        read(j, "model", s, "config");
        c.model_path = resolve(base_dir, s);
    }
    read(j, "test_fraction", c.test_fraction, "config");
    read(j, "threads", c.threads, "config");

    if (j.contains("network")) {
        const auto& n = j.at("network");
        check_keys(n, "network",
                   {"learning_rate", "epochs", "batch_size", "class_weight_positive", "early_stop_patience",
                    "validation_fraction"});
        read(n, "learning_rate", c.network.learning_rate, "network");
        read(n, "epochs", c.network.epochs, "network");
        read(n, "batch_size", c.network.batch_size, "network");
        read(n, "early_stop_patience", c.network.early_stop_patience, "network");
        read(n, "validation_fraction", c.network.validation_fraction, "network");
        if (n.contains("class_weight_positive") && !n.at("class_weight_positive").is_null()) {
            double w = 0.0;
            read(n, "class_weight_positive", w, "network");
            c.network.class_weight_positive = w;
        }
    }
    if (j.contains("selection")) {
        const auto& s = j.at("selection");
        check_keys(s, "selection", {"candidate_sizes", "trials_per_size", "metric"});
        read(s, "candidate_sizes", c.selection.candidate_sizes, "selection");
        read(s, "trials_per_size", c.selection.trials_per_size, "selection");
        if (s.contains("metric")) {
            std::string m;
            read(s, "metric", m, "selection");
            c.selection.metric = selection_metric_from_string(m);
        }
    }
    if (j.contains("baselines")) {
        const auto& b = j.at("baselines");
        check_keys(b, "baselines",
                   {"tree_max_depth", "l2_lambda", "forest_trees", "svm_lambda", "rbf_gamma", "rbf_lambda",
                    "max_iterations"});
        read(b, "tree_max_depth", c.baselines.tree_max_depth, "baselines");
        read(b, "l2_lambda", c.baselines.l2_lambda, "baselines");
        read(b, "forest_trees", c.baselines.forest_trees, "baselines");
        read(b, "svm_lambda", c.baselines.svm_lambda, "baselines");
        read(b, "rbf_gamma", c.baselines.rbf_gamma, "baselines");
        read(b, "rbf_lambda", c.baselines.rbf_lambda, "baselines");
        read(b, "max_iterations", c.baselines.max_iterations, "baselines");
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        check_keys(e, "eval", {"train_sizes", "datasets", "synthetic_shift", "modes"});
        read(e, "train_sizes", c.eval.train_sizes, "eval");
        read(e, "modes", c.eval.modes, "eval");
        if (e.contains("datasets")) {
            if (!e.at("datasets").is_array()) throw ValidationError("eval.datasets must be an array");
            for (std::size_t i = 0; i < e.at("datasets").size(); ++i)
                c.eval.datasets.push_back(
                    parse_data_files(e.at("datasets")[i], base_dir, fmt::format("eval.datasets[{}]", i)));
        }
        if (e.contains("synthetic_shift")) {
            const auto& s = e.at("synthetic_shift");
            check_keys(s, "eval.synthetic_shift",
                       {"datasets", "source_n", "shifted_n", "frequency_shift", "prior_shift"});
            ShiftSpec spec;
            read(s, "datasets", spec.family.datasets, "eval.synthetic_shift");
            read(s, "source_n", spec.family.source_n, "eval.synthetic_shift");
            read(s, "shifted_n", spec.family.shifted_n, "eval.synthetic_shift");
            read(s, "frequency_shift", spec.family.frequency_shift, "eval.synthetic_shift");
            read(s, "prior_shift", spec.family.prior_shift, "eval.synthetic_shift");
            c.eval.synthetic_shift = spec;
        }
    }
    if (j.contains("bench")) {
        check_keys(j.at("bench"), "bench", {"repetitions"});
        read(j.at("bench"), "repetitions", c.bench_repetitions, "bench");
    }
    if (j.contains("analysis")) {
        check_keys(j.at("analysis"), "analysis", {"top_k"});
        read(j.at("analysis"), "top_k", c.analysis_top_k, "analysis");
    }
    return c;
}

void RunConfig::validate() const
{
    if (out_dir.empty()) throw ValidationError("no output directory: set out_dir or pass --out");
    if (data.has_value() == synthetic.has_value())
        throw ValidationError("exactly one of 'data' and 'synthetic' must be given");
    if (hierarchy && toy_hierarchy) throw ValidationError("'hierarchy' and 'toy_hierarchy' are mutually exclusive");
    auto must_exist = [](const fs::path& p, const std::string& what) {
        if (!fs::exists(p)) throw ValidationError(fmt::format("{} '{}' does not exist", what, p.string()));
    };
    if (data) {
        must_exist(data->mutation, "mutation file");
        must_exist(data->cna, "CNA file");
        must_exist(data->labels, "label file");
    }
    for (const auto& d : eval.datasets) {
        must_exist(d.mutation, "mutation file");
        must_exist(d.cna, "CNA file");
        must_exist(d.labels, "label file");
    }
    if (hierarchy) must_exist(*hierarchy, "hierarchy file");
    if (g1_path) must_exist(*g1_path, "G1 manifest");
    if (model_path) must_exist(*model_path, "model manifest");
    if (synthetic) {
        if (synthetic->n < 10) throw ValidationError("synthetic.n must be at least 10");
        if (synthetic->genes == 0 || synthetic->planted == 0 || synthetic->planted > synthetic->genes)
            throw ValidationError("synthetic.planted must lie in [1, genes]");
        if (!(synthetic->noise >= 0.0)) throw ValidationError("synthetic.noise must be non-negative");
    }
    if (toy_hierarchy) {
        if (toy_hierarchy->levels.empty()) throw ValidationError("toy_hierarchy.levels is empty");
        if (toy_hierarchy->fanin == 0) throw ValidationError("toy_hierarchy.fanin must be positive");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
    network.validate();
    if (selection.candidate_sizes.empty()) throw ValidationError("selection.candidate_sizes is empty");
    if (selection.trials_per_size < 1) throw ValidationError("selection.trials_per_size must be at least 1");
    baselines.validate();
    if (eval.train_sizes.empty()) throw ValidationError("eval.train_sizes is empty");
    for (const auto& m : eval.modes)
        if (m != "universe" && m != "restricted")
            throw ValidationError("eval.modes entries must be 'universe' or 'restricted'");
    if (eval.synthetic_shift && !synthetic) throw ValidationError("eval.synthetic_shift needs a 'synthetic' block");
    if (eval.synthetic_shift && eval.synthetic_shift->family.datasets < 2)
        throw ValidationError("eval.synthetic_shift.datasets must be at least 2");
    if (bench_repetitions < 1) throw ValidationError("bench.repetitions must be at least 1");
    if (analysis_top_k == 0) throw ValidationError("analysis.top_k must be positive");
}

RunConfig load_run_config(const fs::path& path, std::optional<std::uint64_t> seed_override,
                          std::optional<fs::path> out_override)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("config file '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    if (seed_override) {
        if (!j.is_object()) throw ValidationError("config must be a JSON object");
        j["seed"] = *seed_override;
    }
    auto cfg = parse_run_config(j, path.parent_path());
    if (out_override) cfg.out_dir = *out_override;
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

// Seed streams, one per pipeline stage.
enum SeedTag : std::uint64_t {
    kSynthSeed = 1,
    kHierarchySeed,
    kSplitSeed,
    kNetworkSeed,
    kSelectionSeed,
    kPrunedSeed,
    kEvalSeed,
    kBenchSeed,
    kBaselineSeed
};

struct Context {
    RunConfig cfg;
    std::string subcommand;
    fs::path out;
    std::ostream& log;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<json> inputs;
    std::set<std::string> outputs;

    std::uint64_t seed(const std::string& name, SeedTag tag)
    {
        const auto s = derive_seed(cfg.seed, {tag});
        seeds[name] = s;
        return s;
    }

    void add_input(const std::string& role, const fs::path& p)
    {
        inputs.push_back({{"role", role}, {"path", p.lexically_relative(fs::current_path()).generic_string()},
                          {"sha256", sha256_file(p)}});
    }

    void wrote(const fs::path& p) { outputs.insert(p.lexically_relative(out).generic_string()); }

    template <typename... Args>
    void info(fmt::format_string<Args...> f, Args&&... args)
    {
        log << "[prnet] " << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }
};

json truth_json(const SyntheticTruth& t)
{
    json channels = json::object();
    for (const auto& [g, c] : t.driver_channel) channels[g] = std::string(to_string(c));
    return {{"planted_genes", t.planted_genes},
            {"effect_sizes", t.effect_sizes},
            {"driver_channel", channels},
            {"intercept", t.intercept}};
}

struct Inputs {
    Dataset data;
    std::optional<SyntheticTruth> truth;
    std::vector<Dataset> evals;
};

Inputs load_inputs(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    Inputs in;
    if (cfg.synthetic) {
        const auto& s = *cfg.synthetic;
        const auto seed = ctx.seed("synthetic", kSynthSeed);
        if (cfg.eval.synthetic_shift) {
            auto family = generate_shift_family(s.genes, s.planted, s.noise, seed, cfg.eval.synthetic_shift->family,
                                                s.options);
            in.data = family.front().dataset.with_name("source");
            in.truth = family.front().truth;
            for (std::size_t i = 1; i < family.size(); ++i)
                in.evals.push_back(family[i].dataset.with_name(fmt::format("shift{}", i)));
        } else {
            auto syn = generate_synthetic(s.n, s.genes, s.planted, s.noise, seed, s.options);
            in.data = syn.dataset.with_name("synthetic");
            in.truth = syn.truth;
        }
    } else {
        const auto& d = *cfg.data;
        ctx.add_input("mutation", d.mutation);
        ctx.add_input("cna", d.cna);
        ctx.add_input("labels", d.labels);
        in.data = load_dataset(d.mutation, d.cna, d.labels).with_name(d.name);
    }
    for (const auto& d : cfg.eval.datasets) {
        ctx.add_input("eval_mutation", d.mutation);
        ctx.add_input("eval_cna", d.cna);
        ctx.add_input("eval_labels", d.labels);
        in.evals.push_back(load_dataset(d.mutation, d.cna, d.labels).with_name(d.name));
    }
    ctx.info("data '{}': {} samples ({} positive), {} loci", in.data.name(), in.data.n(), in.data.positives(),
             in.data.m());
    return in;
}

PathwayHierarchy load_pathways(Context& ctx, const Dataset& ds)
{
    const auto& cfg = ctx.cfg;
    if (cfg.hierarchy) {
        ctx.add_input("hierarchy", *cfg.hierarchy);
        return load_hierarchy(*cfg.hierarchy);
    }
    if (!cfg.toy_hierarchy) throw ValidationError("this subcommand needs 'hierarchy' or 'toy_hierarchy'");
    const auto gene_count = genes_of(ds.loci()).size();
    return generate_toy_hierarchy(gene_count, cfg.toy_hierarchy->levels, cfg.toy_hierarchy->fanin,
                                  ctx.seed("toy_hierarchy", kHierarchySeed));
}

struct FullModel {
    Split split;
    MaskedNetwork net;
    TrainReport report;
};

TrainConfig network_config(const Context& ctx, std::uint64_t seed)
{
    auto c = ctx.cfg.network;
    c.seed = seed;
    return c;
}

FullModel train_full(Context& ctx, const Dataset& ds, const PathwayHierarchy& h)
{
    FullModel f{split(ds, ctx.cfg.test_fraction, ctx.seed("split", kSplitSeed)), {}, {}};
    const auto seed = ctx.seed("network", kNetworkSeed);
    auto masks = build_masks(h, f.split.train.loci());
    auto net = init_network(masks, seed);
    net.hierarchy_hash = h.hash();
    ctx.info("training full network: {} layers, {} parameters", net.depth(), net.parameter_count());
    auto trained = train(std::move(net), restrict_to_loci(f.split.train, masks.loci), network_config(ctx, seed));
    f.net = std::move(trained.net);
    f.report = std::move(trained.report);
    ctx.info("stopped at epoch {} (best {})", f.report.stopped_epoch, f.report.best_epoch);
    return f;
}

MetricSet score(const Vector& s, const Dataset& ds)
{
    return threshold_metrics({s.data(), static_cast<std::size_t>(s.size())}, ds.y());
}

MetricSet score_full(const MaskedNetwork& net, const Dataset& ds)
{
    return score(predict(net, restrict_to_loci(ds, net.input_loci)), ds);
}

ImportanceRanking rank_model(const MaskedNetwork& net, const Dataset& ds, const std::string& name)
{
    const auto view = restrict_to_loci(ds, net.input_loci);
    auto r = aggregate_importance(deeplift(net, view), net.input_loci);
    r.source_model = name;
    return r;
}

void save_model(Context& ctx, const MaskedNetwork& net, const std::string& stem)
{
    const auto dir = ctx.out / "models";
    fs::create_directories(dir);
    save_network(net, dir / (stem + ".json"), dir / (stem + ".bin"));
    ctx.wrote(dir / (stem + ".json"));
    ctx.wrote(dir / (stem + ".bin"));
}

void write_train_log(Context& ctx, const TrainReport& r, const std::string& file)
{
    std::string s = "epoch,loss,validation_auc,validation_recall\n";
    for (std::size_t e = 0; e < r.epoch_losses.size(); ++e)
        s += fmt::format("{},{},{},{}\n", e + 1, format_number(r.epoch_losses[e]),
                         e < r.validation_auc.size() ? format_number(r.validation_auc[e]) : "",
                         e < r.validation_recall.size() ? format_number(r.validation_recall[e]) : "");
    write_text(ctx.out / file, s);
    ctx.wrote(ctx.out / file);
}

struct PruneOutcome {
    FullModel full;
    ImportanceRanking ranking;
    SelectionResult selection;
    PrNet pruned;
};

PruneOutcome prune_pipeline(Context& ctx, const Dataset& ds, const PathwayHierarchy& h)
{
    PruneOutcome o{train_full(ctx, ds, h), {}, {}, {}};
    o.ranking = rank_model(o.full.net, o.full.split.train, "P-NET");
    const auto ranked = gene_rollup(filter_nonzero(o.ranking));
    ctx.info("{} genes carry nonzero importance", ranked.size());
    auto sel = ctx.cfg.selection;
    sel.seed = ctx.seed("selection", kSelectionSeed);
    sel.train = network_config(ctx, sel.seed);
    sel.threads = ctx.cfg.threads;
    const MasksBuilder builder = [&h](const std::vector<LocusId>& loci) { return build_masks(h, loci); };
    o.selection = select_optimal(o.full.split.train, o.full.split.test, builder, ranked, sel, o.ranking.hash());
    ctx.info("chosen size {} genes ({} loci)", o.selection.chosen_size, o.selection.g1.size());
    o.pruned = assemble_prnet(o.full.split.train, o.selection.g1, h,
                              network_config(ctx, ctx.seed("pruned_network", kPrunedSeed)));
    return o;
}

void write_prune_outputs(Context& ctx, const PruneOutcome& o)
{
    write_ranking_csv(o.ranking, ctx.out / "ranking.csv");
    ctx.wrote(ctx.out / "ranking.csv");
    write_g1_manifest(o.selection, ctx.out / "g1.json");
    ctx.wrote(ctx.out / "g1.json");
    ReportBundle bundle;
    bundle.selection = &o.selection;
    bundle.metrics = {{"P-NET", score_full(o.full.net, o.full.split.test)},
                      {"PR-NET", score(o.pruned.predict(o.full.split.test), o.full.split.test)}};
    for (const auto& p : emit_reports(bundle, ctx.out)) ctx.wrote(p);
    save_model(ctx, o.full.net, "pnet");
    save_model(ctx, o.pruned.net, "prnet");
}

std::vector<LocusId> obtain_g1(Context& ctx, const Dataset& ds, const PathwayHierarchy& h)
{
    if (ctx.cfg.g1_path) {
        ctx.add_input("g1", *ctx.cfg.g1_path);
        return read_g1_manifest(*ctx.cfg.g1_path);
    }
    ctx.info("no G1 manifest configured; running the pruning pipeline first");
    auto o = prune_pipeline(ctx, ds, h);
    write_prune_outputs(ctx, o);
    return o.selection.g1;
}

void cmd_synth(Context& ctx)
{
    if (!ctx.cfg.synthetic) throw ValidationError("synth needs a 'synthetic' block");
    const auto in = load_inputs(ctx);
    const auto dir = ctx.out / "data";
    fs::create_directories(dir);
    auto put_dataset = [&](const Dataset& ds, const fs::path& d) {
        fs::create_directories(d);
        write_dataset(ds, d / "mutations.csv", d / "cna.csv", d / "labels.csv");
        for (const char* f : {"mutations.csv", "cna.csv", "labels.csv"}) ctx.wrote(d / f);
    };
    put_dataset(in.data, dir);
    write_json(dir / "truth.json", truth_json(*in.truth));
    ctx.wrote(dir / "truth.json");
    for (const auto& e : in.evals) put_dataset(e, ctx.out / "cohorts" / e.name());
    if (ctx.cfg.toy_hierarchy) {
        const auto h = load_pathways(ctx, in.data);
        save_hierarchy(h, dir / "hierarchy.json");
        ctx.wrote(dir / "hierarchy.json");
    }
}

void cmd_train(Context& ctx)
{
    const auto in = load_inputs(ctx);
    const auto h = load_pathways(ctx, in.data);
    const auto full = train_full(ctx, in.data, h);
    save_model(ctx, full.net, "pnet");
    write_train_log(ctx, full.report, "train_log.csv");
    ReportBundle bundle;
    bundle.metrics = {{"P-NET", score_full(full.net, full.split.test)}};
    for (const auto& p : emit_reports(bundle, ctx.out)) ctx.wrote(p);
}

void cmd_attribute(Context& ctx)
{
    const auto in = load_inputs(ctx);
    MaskedNetwork net;
    Dataset train_split;
    if (ctx.cfg.model_path) {
        ctx.add_input("model", *ctx.cfg.model_path);
        net = load_network(*ctx.cfg.model_path);
        train_split = split(in.data, ctx.cfg.test_fraction, ctx.seed("split", kSplitSeed)).train;
    } else {
        const auto h = load_pathways(ctx, in.data);
        auto full = train_full(ctx, in.data, h);
        net = std::move(full.net);
        train_split = std::move(full.split.train);
        save_model(ctx, net, "pnet");
    }
    const auto ranking = rank_model(net, train_split, "P-NET");
    write_ranking_csv(ranking, ctx.out / "ranking.csv");
    ctx.wrote(ctx.out / "ranking.csv");
    const auto d = score_distribution(ranking);
    write_json(ctx.out / "score_distribution.json",
               {{"zero", {{"count", d.zero_count}, {"fraction", d.zero_fraction}}},
                {"unit_interval", {{"count", d.unit_interval_count}, {"fraction", d.unit_interval_fraction}}},
                {"above_one", {{"count", d.above_one_count}, {"fraction", d.above_one_fraction}}},
                {"ranking_sha256", ranking.hash()}});
    ctx.wrote(ctx.out / "score_distribution.json");
}

void cmd_prune(Context& ctx)
{
    const auto in = load_inputs(ctx);
    const auto h = load_pathways(ctx, in.data);
    const auto o = prune_pipeline(ctx, in.data, h);
    write_prune_outputs(ctx, o);
    write_train_log(ctx, o.full.report, "train_log.csv");
    if (in.truth) {
        write_json(ctx.out / "truth.json", truth_json(*in.truth));
        ctx.wrote(ctx.out / "truth.json");
    }
}

void cmd_analyze(Context& ctx)
{
    const auto in = load_inputs(ctx);
    const auto h = load_pathways(ctx, in.data);
    std::vector<LocusId> g1;
    FullModel full;
    ImportanceRanking before;
    MaskedNetwork pruned;
    if (ctx.cfg.g1_path) {
        ctx.add_input("g1", *ctx.cfg.g1_path);
        g1 = read_g1_manifest(*ctx.cfg.g1_path);
        full = train_full(ctx, in.data, h);
        before = rank_model(full.net, full.split.train, "P-NET");
        pruned = assemble_prnet(full.split.train, g1, h, network_config(ctx, ctx.seed("pruned_network", kPrunedSeed)))
                     .net;
    } else {
        auto o = prune_pipeline(ctx, in.data, h);
        write_prune_outputs(ctx, o);
        g1 = o.selection.g1;
        full = std::move(o.full);
        before = std::move(o.ranking);
        pruned = std::move(o.pruned.net);
    }
    const auto after = rank_model(pruned, full.split.train, "PR-NET");
    const auto cmp = compare_rankings(before, after, ctx.cfg.analysis_top_k);
    write_comparison_csv(cmp, ctx.out / "ranking_comparison.csv");
    ctx.wrote(ctx.out / "ranking_comparison.csv");
    if (cmp.spearman) ctx.info("Spearman over {} shared top loci: {:.4f}", cmp.intersection, *cmp.spearman);

    std::vector<AssociationReport> reports{association_report(in.data, g1)};
    for (const auto& e : in.evals) reports.push_back(association_report(e, g1));
    write_association_csv(reports, ctx.out / "association.csv");
    ctx.wrote(ctx.out / "association.csv");
}

std::vector<GeneralizationMode> parse_modes(const std::vector<std::string>& modes)
{
    std::vector<GeneralizationMode> out;
    for (const auto& m : modes) out.push_back(m == "universe" ? GeneralizationMode::universe : GeneralizationMode::restricted);
    if (out.empty()) throw ValidationError("eval.modes is empty");
    return out;
}

void cmd_eval(Context& ctx)
{
    const auto in = load_inputs(ctx);
    if (in.evals.empty()) throw ValidationError("eval needs eval.datasets or eval.synthetic_shift");
    for (auto s : ctx.cfg.eval.train_sizes)
        if (s > in.data.n())
            throw ValidationError(fmt::format("training size {} exceeds the {} source samples", s, in.data.n()));
    const auto modes = parse_modes(ctx.cfg.eval.modes);
    const auto h = load_pathways(ctx, in.data);
    const auto g1 = obtain_g1(ctx, in.data, h);
    if (std::find(modes.begin(), modes.end(), GeneralizationMode::restricted) != modes.end())
        for (const auto& e : in.evals) (void)RestrictionRecipe{g1, 0.0}.apply(e);

    const auto models = standard_models(h, g1, ctx.cfg.network, ctx.cfg.baselines);
    GeneralizationOptions opt{modes, g1, ctx.cfg.threads};
    ctx.info("generalization grid: {} models x {} sizes x {} cohorts x {} modes", models.size(),
             ctx.cfg.eval.train_sizes.size(), in.evals.size(), modes.size());
    const auto grid = generalization_run(models, in.data, ctx.cfg.eval.train_sizes, in.evals, in.data.loci(),
                                         ctx.seed("eval", kEvalSeed), opt);
    ReportBundle bundle;
    bundle.grid = &grid;
    for (const auto& p : emit_reports(bundle, ctx.out)) ctx.wrote(p);

    std::string summary = "model,mode,mean_auc,mean_recall,failed_cells\n";
    for (auto mode : modes)
        for (const auto& m : models) {
            std::size_t failed = 0;
            for (const auto& c : grid.cells)
                if (c.model == m.name && c.mode == mode && !c.metrics) ++failed;
            summary += fmt::format("{},{},{},{},{}\n", m.name, to_string(mode),
                                   format_number(grid.mean(m.name, mode, &MetricSet::auc)),
                                   format_number(grid.mean(m.name, mode, &MetricSet::recall)), failed);
        }
    write_text(ctx.out / "eval_summary.csv", summary);
    ctx.wrote(ctx.out / "eval_summary.csv");
}

void cmd_bench(Context& ctx)
{
    const auto in = load_inputs(ctx);
    const auto h = load_pathways(ctx, in.data);
    const auto g1 = obtain_g1(ctx, in.data, h);
    const std::vector<NamedModel> models{pnet_model(h, ctx.cfg.network), prnet_model(h, g1, ctx.cfg.network)};
    const auto timing = timing_benchmark(models, in.data, ctx.cfg.bench_repetitions, ctx.seed("bench", kBenchSeed));
    ReportBundle bundle;
    bundle.timing = &timing;
    for (const auto& p : emit_reports(bundle, ctx.out)) ctx.wrote(p);
    const auto& full = timing.at("P-NET");
    const auto& pruned = timing.at("PR-NET");
    ctx.info("train speed-up {:.2f}x, inference speed-up {:.2f}x", full.train.mean / pruned.train.mean,
             full.inference.mean / pruned.inference.mean);
}

void write_manifest(Context& ctx, const fs::path& config_path)
{
    json config = ctx.cfg.raw;
    config.erase("out_dir");
    json j;
    j["tool"] = "prnet";
    j["version"] = version_string();
    j["subcommand"] = ctx.subcommand;
    j["config_file"] = config_path.filename().string();
    j["config_sha256"] = sha256_file(config_path);
    j["config"] = std::move(config);
    j["seed"] = ctx.cfg.seed;
    j["derived_seeds"] = ctx.seeds;
    j["inputs"] = ctx.inputs;
    ctx.outputs.insert("manifest.json");
    j["outputs"] = ctx.outputs;
    write_json(ctx.out / "manifest.json", j);
}

const std::vector<std::pair<std::string, std::string>> kSubcommands{
    {"synth", "Generate a planted-signal synthetic dataset (and toy hierarchy)"},
    {"train", "Train the full pathway-masked network"},
    {"attribute", "Score every locus with DeepLIFT and write the ranking"},
    {"prune", "Train, attribute, sweep candidate sizes and assemble the pruned network"},
    {"analyze", "Association statistics and before/after ranking comparison"},
    {"eval", "Cross-cohort generalization grid for all models"},
    {"bench", "Training and inference timing of full vs pruned network"},
};

} // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Pathway-masked network pruning toolkit", "prnet"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", version_string());
    std::string config;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc] : kSubcommands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config, "JSON experiment config")->required();
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--out", out_dir, "Override the output directory");
        subs.push_back(sub);
    }

    std::vector<const char*> cargs;
    for (const auto& a : argv) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        std::optional<std::uint64_t> seed_override;
        if (sub->count("--seed")) seed_override = seed;
        std::optional<fs::path> out_override;
        if (sub->count("--out")) out_override = fs::path(out_dir);
        Context ctx{load_run_config(config, seed_override, out_override), sub->get_name(), {}, err, {}, {}, {}};
        ctx.out = ctx.cfg.out_dir;
        fs::create_directories(ctx.out);
        ctx.info("{} {}", version_string(), ctx.subcommand);
        const std::string& name = ctx.subcommand;
        if (name == "synth") cmd_synth(ctx);
        else if (name == "train") cmd_train(ctx);
        else if (name == "attribute") cmd_attribute(ctx);
        else if (name == "prune") cmd_prune(ctx);
        else if (name == "analyze") cmd_analyze(ctx);
        else if (name == "eval") cmd_eval(ctx);
        else if (name == "bench") cmd_bench(ctx);
        write_manifest(ctx, config);
        out << fmt::format("{}: wrote {} files to {}\n", name, ctx.outputs.size(), ctx.out.string());
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConstraintViolation& e) {
        err << "error: " << e.what() << '\n';
        if (!e.missing().empty()) {
            err << "missing loci:";
            for (const auto& m : e.missing()) err << ' ' << m;
            err << '\n';
        }
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace prnet
