// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Pipeline criteria drive the CLI entry point in-process.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prnet/analysis.hpp"
#include "prnet/attribution.hpp"
#include "prnet/cli.hpp"
#include "prnet/error.hpp"
#include "prnet/metrics.hpp"
#include "prnet/network.hpp"
#include "prnet/pruning.hpp"
#include "test_util.hpp"

using namespace prnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail)
{
    if (!ok) ++failures;
    std::cout << fmt::format("{} [{}] {}: {}", ok ? "PASS" : "FAIL", id, name, detail) << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int invoke(const std::vector<std::string>& args, const fs::path& log)
{
    std::vector<std::string> argv{"prnet"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ofstream out(log);
    return run(argv, out, out);
}

// Data rows of a two-line-or-more CSV keyed by the first column.
std::map<std::string, std::vector<std::string>> csv_rows(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (!fields.empty()) rows[fields[0]] = fields;
    }
    return rows;
}

std::map<std::string, std::string> csv_files(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().extension() == ".csv")
            files[e.path().lexically_relative(root).generic_string()] = test::slurp(e.path());
    return files;
}

const json kToyHierarchy{{"levels", {128, 64, 32, 16, 8}}, {"fanin", 3}};

json pipeline_config(const std::string& out_dir)
{
    return {{"seed", 2024},
            {"out_dir", out_dir},
            {"synthetic", {{"n", 1200}, {"genes", 600}, {"planted", 15}, {"noise", 0.5}}},
            {"toy_hierarchy", kToyHierarchy},
            {"network", {{"learning_rate", 0.005}, {"epochs", 60}, {"batch_size", 64}, {"early_stop_patience", 8}}},
            {"selection", {{"candidate_sizes", {5, 10, 15, 20, 30, 60}}, {"trials_per_size", 5}}},
            {"bench", {{"repetitions", 5}}}};
}

void planted_recovery(const fs::path& run_dir, double elapsed)
{
    const auto truth = json::parse(test::slurp(run_dir / "truth.json"));
    const auto g1 = read_g1_manifest(run_dir / "g1.json");
    std::set<std::string> chosen;
    for (const auto& l : g1) chosen.insert(l.gene);
    std::size_t hits = 0, planted = 0;
    for (const auto& g : truth["planted_genes"]) {
        ++planted;
        hits += chosen.count(g.get<std::string>());
    }
    const auto metrics = csv_rows(run_dir / "metrics.csv");
    const double full_auc = std::stod(metrics.at("P-NET").at(1));
    const double pruned_auc = std::stod(metrics.at("PR-NET").at(1));
    const double recovered = static_cast<double>(hits) / static_cast<double>(planted);
    report(1, "planted-signal recovery",
           recovered >= 0.8 && pruned_auc >= full_auc - 0.03 && elapsed <= 300.0,
           fmt::format("{}/{} planted genes in G1 ({} genes), pruned AUC {:.4f} vs full {:.4f}, {:.1f}s", hits,
                       planted, chosen.size(), pruned_auc, full_auc, elapsed));
}

void parameter_reduction()
{
    const auto h = generate_toy_hierarchy(9229, {1024, 512, 256, 128, 64, 32}, 3, 7);
    const auto full = count_params(init_network(build_masks(h, loci_for_genes(h.genes)), 1));
    std::vector<std::string> g1_genes;
    std::mt19937_64 rng(46);
    std::sample(h.genes.begin(), h.genes.end(), std::back_inserter(g1_genes), 46, rng);
    const auto pruned = count_params(init_network(build_masks(h, loci_for_genes(g1_genes)), 1));
    const double locus_drop = 1.0 - static_cast<double>(pruned.input_connections) /
                                        static_cast<double>(full.input_connections);
    const double param_drop = 1.0 - static_cast<double>(pruned.total) / static_cast<double>(full.total);
    report(2, "parameter reduction",
           full.input_connections == 27687 && pruned.input_connections == 138 &&
               std::abs(locus_drop - 0.995) < 5e-5 && param_drop >= 0.8,
           fmt::format("input loci {} -> {} ({:.2f}%), parameters {} -> {} ({:.2f}%)", full.input_connections,
                       pruned.input_connections, 100 * locus_drop, full.total, pruned.total, 100 * param_drop));
}

void summation_to_delta()
{
    double worst = 0.0;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto net = test::random_network(33, {40, 16, 8, 4, 2}, 0.2);
    const std::vector<double> zero(net.input_width(), 0.0);
    const auto at_ref = forward(net, zero);
    for (int s = 0; s < 100; ++s) {
        std::vector<double> x(net.input_width());
        for (auto& v : x) v = normal(rng);
        const auto fx = forward(net, x);
        const auto c = deeplift_sample(net, x, zero);
        auto rel = [](double sum, double delta) { return std::abs(sum - delta) / std::max(std::abs(delta), 1e-12); };
        double final_sum = 0.0;
        for (double v : c.final) final_sum += v;
        worst = std::max(worst, rel(final_sum, fx.final - at_ref.final));
        for (Eigen::Index k = 0; k < c.per_head.rows(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            worst = std::max(worst, rel(c.per_head.row(k).sum(), fx.head_outputs[kk] - at_ref.head_outputs[kk]));
        }
    }
    report(3, "DeepLIFT summation-to-delta", worst <= 1e-6,
           fmt::format("max relative error {:.3g} over 100 inputs, final and {} heads", worst, net.depth()));
}

void gradient_oracle()
{
    double worst = 0.0;
    std::size_t max_params = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto net = test::random_network(500 + seed, {12, 6, 4, 2}, 0.3);
        auto params = flatten_parameters(net);
        max_params = std::max(max_params, params.size());
        const auto ds = test::random_binary_dataset(seed, 16, net.input_loci, 0.5);
        std::vector<std::size_t> rows(ds.n());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        const double pw = 1.0 + 0.1 * static_cast<double>(seed);
        const auto g = loss_and_gradient(net, ds.x(), ds.y(), rows, pw).gradient;
        auto probe = net;
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto p = params;
            p[i] = params[i] + 1e-5;
            assign_parameters(probe, p);
            const double up = loss_and_gradient(probe, ds.x(), ds.y(), rows, pw).loss;
            p[i] = params[i] - 1e-5;
            assign_parameters(probe, p);
            const double down = loss_and_gradient(probe, ds.x(), ds.y(), rows, pw).loss;
            const double fd = (up - down) / 2e-5;
            worst = std::max(worst, std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-6}));
        }
    }
    report(4, "gradient oracle", worst <= 1e-4 && max_params <= 200,
           fmt::format("max relative error {:.3g} on 10 networks (<= {} parameters)", worst, max_params));
}

void metric_oracles()
{
    std::mt19937_64 rng(99);
    int auc_mismatch = 0;
    for (int c = 0; c < 1000; ++c) {
        const std::size_t n = 2 + rng() % 60;
        std::vector<double> s(n);
        std::vector<int> y(n);
        const unsigned levels = 1 + static_cast<unsigned>(rng() % 8);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % levels);
            y[i] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        double wins = 0.0, pairs = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (y[i] == 1 && y[j] == 0) {
                    pairs += 1.0;
                    wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
                }
        if (auc(s, y) != wins / pairs) ++auc_mismatch;
    }

    double mi_worst = 0.0;
    for (int n = 1; n <= 8; ++n)
        for (unsigned xb = 0; xb < (1u << n); ++xb)
            for (unsigned yb = 0; yb < (1u << n); ++yb) {
                std::vector<int> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
                double joint[2][2] = {{0, 0}, {0, 0}};
                for (int i = 0; i < n; ++i) {
                    x[static_cast<std::size_t>(i)] = static_cast<int>((xb >> i) & 1u);
                    y[static_cast<std::size_t>(i)] = static_cast<int>((yb >> i) & 1u);
                    joint[x[static_cast<std::size_t>(i)]][y[static_cast<std::size_t>(i)]] += 1.0 / n;
                }
                double brute = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        const double pa = joint[a][0] + joint[a][1], pb = joint[0][b] + joint[1][b];
                        if (joint[a][b] > 0) brute += joint[a][b] * std::log(joint[a][b] / (pa * pb));
                    }
                mi_worst = std::max(mi_worst, std::abs(mutual_information(x, y) - brute));
            }

    const std::vector<int> y{1, 1, 0, 0};
    const double pb_worst = std::max({std::abs(point_biserial(std::vector<double>{1, 1, 0, 0}, y) - 1.0),
                                      std::abs(point_biserial(std::vector<double>{0, 0, 1, 1}, y) + 1.0),
                                      std::abs(point_biserial(std::vector<double>{1, 0, 0, 0}, y) - 1.0 / std::sqrt(3.0))});
    report(5, "metric oracles", auc_mismatch == 0 && mi_worst <= 1e-12 && pb_worst <= 1e-9,
           fmt::format("AUC mismatches {}/1000, MI max error {:.3g}, point-biserial max error {:.3g}", auc_mismatch,
                       mi_worst, pb_worst));
}

void timing_property(const fs::path& bench_dir)
{
    const auto t = json::parse(test::slurp(bench_dir / "timing.json"));
    auto mean = [&](const std::string& model, const char* phase) {
        for (const auto& m : t["models"])
            if (m["model"] == model) return m[phase]["mean_s"].get<double>();
        return std::nan("");
    };
    const double train_ratio = mean("PR-NET", "train") / mean("P-NET", "train");
    const double infer_ratio = mean("PR-NET", "inference") / mean("P-NET", "inference");
    const auto csv = test::slurp(bench_dir / "timing.csv");
    const auto header = csv.substr(0, csv.find('\n'));
    report(6, "timing property",
           train_ratio <= 2.0 / 3.0 && infer_ratio <= 2.0 / 3.0 && header == "phase,model,mean_s,variance,std",
           fmt::format("pruned/full train {:.3f} ({:.2f}x), inference {:.3f} ({:.2f}x), {} repetitions", train_ratio,
                       1.0 / train_ratio, infer_ratio, 1.0 / infer_ratio, t["repetitions"].get<int>()));
}

void generalization_property(const fs::path& work)
{
    json cfg = pipeline_config("eval");
    cfg["eval"] = {{"train_sizes", {202, 404, 606, 808}},
                   {"synthetic_shift", {{"datasets", 5}, {"source_n", 1013}, {"shifted_n", 600}}},
                   {"modes", {"universe", "restricted"}}};
    cfg["baselines"] = {{"forest_trees", 50}};
    test::spit(work / "eval.json", cfg.dump(2));
    const auto t0 = std::chrono::steady_clock::now();
    const int code = invoke({"eval", "--config", (work / "eval.json").string()}, work / "eval.log");
    if (code != 0) {
        report(7, "generalization harness", false, fmt::format("eval exited {}, see {}", code, (work / "eval.log").string()));
        return;
    }
    std::map<std::pair<std::string, std::string>, std::vector<double>> recall;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> cells;
    std::size_t failed = 0, rows = 0;
    std::ifstream in(work / "eval" / "grid.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        ++rows;
        cells.insert({f[0], f[1], f[2], f[3]});
        if (f.size() < 6 || f[5].empty() || f[5] == "nan" || (f.size() > 14 && !f[14].empty())) {
            ++failed;
            continue;
        }
        recall[{f[0], f[1]}].push_back(std::stod(f[5]));
    }
    auto avg = [&](const std::string& m) {
        const auto& v = recall[{m, "universe"}];
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
    };
    const std::size_t expected = 7 * 4 * 4 * 2;
    const double pr = avg("PR-NET"), full = avg("P-NET");
    report(7, "generalization harness", failed == 0 && rows == expected && cells.size() == expected && pr >= full,
           fmt::format("mean recall PR-NET {:.4f} vs P-NET {:.4f} (universe), {}/{} grid rows complete, {:.1f}s", pr,
                       full, rows - failed, expected, seconds_since(t0)));
}

void restriction_guard()
{
    const auto universe = loci_for_genes({"AR", "TP53", "PTEN", "RB1"});
    const auto ds = test::random_binary_dataset(8, 30, universe, 0.4);
    const auto h = generate_toy_hierarchy(4, {2}, 1, 1);
    std::vector<LocusId> g1{{"TP53", Channel::cnv_del}, {"AR", Channel::cnv_amp}};
    TrainConfig quick;
    quick.epochs = 2;
    quick.validation_fraction = 0.0;
    const auto pr = assemble_prnet(test::random_binary_dataset(8, 30, loci_for_genes(h.genes), 0.4),
                                   loci_for_genes({h.genes[0], h.genes[1]}), h, quick);
    std::string message;
    bool named = false;
    try {
        const auto missing_one = restrict_to_loci(
            test::random_binary_dataset(1, 5, loci_for_genes(h.genes)),
            std::vector<LocusId>(pr.net.input_loci.begin() + 1, pr.net.input_loci.end()));
        (void)pr.predict(missing_one);
    } catch (const ConstraintViolation& e) {
        message = e.what();
        named = message.find(pr.net.input_loci.front().label()) != std::string::npos;
    }
    const auto narrow = restrict_to_loci(ds, g1);
    const auto round_trip = restrict_to_loci(expand_to_universe(narrow, universe), g1);
    const auto full_trip = restrict_to_loci(expand_to_universe(ds, universe), universe);
    const bool lossless = round_trip.x() == narrow.x() && full_trip.x() == ds.x() && round_trip.loci() == g1;
    report(8, "restriction guard", named && lossless,
           fmt::format("missing-locus error {}: \"{}\"; expand/restrict round trip {}", named ? "named" : "NOT named",
                       message, lossless ? "lossless" : "LOSSY"));
}

void determinism(const fs::path& a, const fs::path& b)
{
    const auto fa = csv_files(a), fb = csv_files(b);
    std::size_t differing = 0;
    for (const auto& [name, content] : fa) {
        auto it = fb.find(name);
        if (it == fb.end() || it->second != content) ++differing;
    }
    const bool same_files = fa.size() == fb.size();
    const bool same_g1 = read_g1_manifest(a / "g1.json") == read_g1_manifest(b / "g1.json");
    const bool same_manifest = test::slurp(a / "manifest.json") == test::slurp(b / "manifest.json");
    report(9, "determinism", same_files && differing == 0 && same_g1 && same_manifest && !fa.empty(),
           fmt::format("{} CSV files compared, {} differ; chosen G1 {}; run manifest {}", fa.size(), differing,
                       same_g1 ? "identical" : "DIFFERENT", same_manifest ? "identical" : "DIFFERENT"));
}

} // namespace

int main(int argc, char** argv)
{
    fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "prnet_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    std::cout << "acceptance work directory: " << work.string() << std::endl;

    test::spit(work / "pipeline.json", pipeline_config("run_a").dump(2));
    const auto t0 = std::chrono::steady_clock::now();
    const int prune_code = invoke({"prune", "--config", (work / "pipeline.json").string()}, work / "prune_a.log");
    const double prune_seconds = seconds_since(t0);

    if (prune_code == 0) planted_recovery(work / "run_a", prune_seconds);
    else report(1, "planted-signal recovery", false, fmt::format("prune exited {}", prune_code));
    parameter_reduction();
    summation_to_delta();
    gradient_oracle();
    metric_oracles();

    if (prune_code == 0) {
        json bench = pipeline_config("bench");
        bench["g1"] = (work / "run_a" / "g1.json").string();
        // Fixed epoch budget so both models do the same number of passes.
        bench["network"]["epochs"] = 30;
        bench["network"]["validation_fraction"] = 0.0;
        test::spit(work / "bench.json", bench.dump(2));
        const int code = invoke({"bench", "--config", (work / "bench.json").string()}, work / "bench.log");
        if (code == 0) timing_property(work / "bench");
        else report(6, "timing property", false, fmt::format("bench exited {}", code));
    } else {
        report(6, "timing property", false, "no G1 from the pipeline run");
    }

    generalization_property(work);
    restriction_guard();

    if (prune_code == 0) {
        const int code = invoke({"prune", "--config", (work / "pipeline.json").string(), "--out",
                                 (work / "run_b").string()},
                                work / "prune_b.log");
        if (code == 0) determinism(work / "run_a", work / "run_b");
        else report(9, "determinism", false, fmt::format("repeat prune exited {}", code));
    } else {
        report(9, "determinism", false, "pipeline run failed");
    }

    std::cout << fmt::format("{} of 9 criteria passed", 9 - failures) << std::endl;
    return failures == 0 ? 0 : 1;
}
