#include "prnet/pathway.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prnet/dataset.hpp"
#include "prnet/error.hpp"
#include "prnet/hash.hpp"
#include "prnet/random.hpp"

namespace prnet {

using nlohmann::json;

std::size_t PathwayHierarchy::edge_count() const
{
    std::size_t n = gene_edges.size();
    for (const auto& level : pathway_edges) n += level.size();
    return n;
}

namespace {

json to_json(const PathwayHierarchy& h)
{
    json j;
    j["genes"] = h.genes;
    j["levels"] = h.levels;
    json ge = json::array();
    for (const auto& [g, p] : h.gene_edges) ge.push_back({g, p});
    j["gene_edges"] = std::move(ge);
    json pe = json::array();
    for (std::size_t k = 0; k < h.pathway_edges.size(); ++k)
        for (const auto& [c, p] : h.pathway_edges[k]) pe.push_back({k, c, p});
    j["pathway_edges"] = std::move(pe);
    return j;
}

std::unordered_map<std::string, std::size_t> index_names(const std::vector<std::string>& names, const char* what)
{
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].empty()) throw ValidationError(fmt::format("empty {} name", what));
        if (!idx.emplace(names[i], i).second) throw ValidationError(fmt::format("duplicate {} '{}'", what, names[i]));
    }
    return idx;
}

} // namespace

std::string PathwayHierarchy::hash() const
{
    return sha256_hex(to_json(*this).dump());
}

PathwayHierarchy validate_hierarchy(PathwayHierarchy h)
{
    if (h.genes.empty()) throw ValidationError("hierarchy has no genes");
    if (h.levels.empty()) throw ValidationError("hierarchy has no pathway levels");
    for (std::size_t k = 0; k < h.levels.size(); ++k)
        if (h.levels[k].empty()) throw ValidationError(fmt::format("pathway level {} is empty", k));
    if (h.pathway_edges.size() > h.levels.size() - 1)
        throw ValidationError("pathway edges reference a level above the top level");
    h.pathway_edges.resize(h.levels.size() - 1);

    const auto gene_idx = index_names(h.genes, "gene");
    std::vector<std::unordered_map<std::string, std::size_t>> level_idx;
    for (const auto& level : h.levels) level_idx.push_back(index_names(level, "pathway"));

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& [g, p] : h.gene_edges) {
        if (!gene_idx.contains(g) || !level_idx[0].contains(p))
            throw ValidationError(fmt::format("dangling edge {} -> {} (level 0)", g, p));
        if (!seen.emplace(g, p).second) throw ValidationError(fmt::format("duplicate edge {} -> {}", g, p));
    }
    for (std::size_t k = 0; k < h.pathway_edges.size(); ++k) {
        seen.clear();
        for (const auto& [c, p] : h.pathway_edges[k]) {
            if (c == p) throw ValidationError(fmt::format("self-loop on pathway {} (level {})", c, k));
            if (!level_idx[k].contains(c) || !level_idx[k + 1].contains(p))
                throw ValidationError(fmt::format("dangling edge {} -> {} (level {})", c, p, k + 1));
            if (!seen.emplace(c, p).second)
                throw ValidationError(fmt::format("duplicate edge {} -> {} (level {})", c, p, k + 1));
        }
    }

    // Nodes without a parent feed a residual pathway on the next level.
    auto residual_on = [&](std::size_t level) {
        const std::string name(kResidualPathway);
        if (!level_idx[level].contains(name)) {
            level_idx[level].emplace(name, h.levels[level].size());
            h.levels[level].push_back(name);
        }
        return name;
    };
    std::unordered_set<std::string> has_parent;
    for (const auto& [g, _] : h.gene_edges) has_parent.insert(g);
    for (const auto& g : h.genes) {
        if (has_parent.contains(g)) continue;
        h.gene_edges.emplace_back(g, residual_on(0));
        ++h.residual_attachments;
    }
    for (std::size_t k = 0; k + 1 < h.levels.size(); ++k) {
        has_parent.clear();
        for (const auto& [c, _] : h.pathway_edges[k]) has_parent.insert(c);
        for (const auto& node : h.levels[k]) {
            if (has_parent.contains(node)) continue;
            h.pathway_edges[k].emplace_back(node, residual_on(k + 1));
            if (node != kResidualPathway) ++h.residual_attachments;
        }
    }
    if (h.residual_attachments > 0)
        std::clog << "[warn] " << h.residual_attachments << " hierarchy node(s) without a parent attached to '"
                  << kResidualPathway << "'\n";
    return h;
}

PathwayHierarchy load_hierarchy(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open hierarchy " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("hierarchy " + path.string() + ": " + e.what());
    }
    PathwayHierarchy h;
    try {
        h.genes = j.at("genes").get<std::vector<std::string>>();
        h.levels = j.at("levels").get<std::vector<std::vector<std::string>>>();
        for (const auto& e : j.value("gene_edges", json::array())) {
            if (!e.is_array() || e.size() != 2) throw ValidationError("gene edge must be [gene, pathway]");
            h.gene_edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        h.pathway_edges.resize(h.levels.empty() ? 0 : h.levels.size() - 1);
        for (const auto& e : j.value("pathway_edges", json::array())) {
            if (!e.is_array() || e.size() != 3)
                throw ValidationError("pathway edge must be [level_index, child, parent]");
            const auto k = e[0].get<std::size_t>();
            if (k + 1 >= h.levels.size())
                throw ValidationError(fmt::format("pathway edge level index {} has no parent level", k));
            h.pathway_edges[k].emplace_back(e[1].get<std::string>(), e[2].get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ValidationError("hierarchy " + path.string() + ": " + e.what());
    }
    return validate_hierarchy(std::move(h));
}

void save_hierarchy(const PathwayHierarchy& h, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(h).dump(1) << '\n';
}

PathwayHierarchy generate_toy_hierarchy(std::size_t gene_count, const std::vector<std::size_t>& pathways_per_level,
                                        std::size_t fanin, std::uint64_t seed)
{
    if (pathways_per_level.empty()) throw ValidationError("toy hierarchy needs at least one level");
    if (fanin < 1) throw ValidationError("fanin must be at least 1");
    if (gene_count < 1) throw ValidationError("toy hierarchy needs at least one gene");
    for (auto w : pathways_per_level)
        if (w == 0) throw ValidationError("toy hierarchy level width must be positive");

    PathwayHierarchy h;
    for (std::size_t g = 0; g < gene_count; ++g) h.genes.push_back(synthetic_gene_name(g));
    for (std::size_t k = 0; k < pathways_per_level.size(); ++k) {
        std::vector<std::string> level;
        for (std::size_t i = 0; i < pathways_per_level[k]; ++i) level.push_back(fmt::format("P{}_{:04d}", k, i));
        h.levels.push_back(std::move(level));
    }
    h.pathway_edges.resize(h.levels.size() - 1);

    Rng rng(derive_seed(seed, {0x70f}));
    auto connect = [&](const std::vector<std::string>& children, const std::vector<std::string>& parents,
                       std::vector<std::pair<std::string, std::string>>& edges) {
        const std::size_t p = parents.size();
        const std::size_t per_child = std::min(fanin, p);
        std::vector<bool> covered(p, false);
        std::uniform_int_distribution<std::size_t> pick(0, p - 1);
        for (std::size_t c = 0; c < children.size(); ++c) {
            std::vector<std::size_t> chosen{c % p};
            while (chosen.size() < per_child) {
                auto cand = pick(rng);
                if (std::find(chosen.begin(), chosen.end(), cand) == chosen.end()) chosen.push_back(cand);
            }
            std::sort(chosen.begin(), chosen.end());
            for (auto q : chosen) {
                covered[q] = true;
                edges.emplace_back(children[c], parents[q]);
            }
        }
        std::uniform_int_distribution<std::size_t> pick_child(0, children.size() - 1);
        for (std::size_t q = 0; q < p; ++q) {
            if (covered[q]) continue;
            // fewer children than parents: give the orphan parent one child
            std::size_t c = pick_child(rng);
            while (std::find(edges.begin(), edges.end(), std::make_pair(children[c], parents[q])) != edges.end())
                c = pick_child(rng);
            edges.emplace_back(children[c], parents[q]);
        }
    };
    connect(h.genes, h.levels[0], h.gene_edges);
    for (std::size_t k = 0; k + 1 < h.levels.size(); ++k) connect(h.levels[k], h.levels[k + 1], h.pathway_edges[k]);
    return validate_hierarchy(std::move(h));
}

// ---------------------------------------------------------------------------

BinaryMask::BinaryMask(std::size_t rows, std::size_t cols, std::vector<std::pair<std::size_t, std::size_t>> entries)
    : rows_(rows)
    , cols_(cols)
{
    for (const auto& [i, j] : entries)
        if (i >= rows || j >= cols)
            throw ShapeError(fmt::format("mask entry ({}, {}) outside {}x{}", i, j, rows, cols));
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    col_ptr_.assign(cols + 1, 0);
    row_idx_.reserve(entries.size());
    for (const auto& [i, j] : entries) {
        ++col_ptr_[j + 1];
        row_idx_.push_back(i);
    }
    std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());
}

bool BinaryMask::contains(std::size_t i, std::size_t j) const
{
    if (j >= cols_) return false;
    auto col = column(j);
    return std::binary_search(col.begin(), col.end(), i);
}

Eigen::MatrixXd BinaryMask::to_dense() const
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t j = 0; j < cols_; ++j)
        for (auto i : column(j)) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    return d;
}

std::size_t MaskStack::total_nnz() const
{
    std::size_t n = 0;
    for (const auto& m : masks) n += m.nnz();
    return n;
}

MaskStack build_masks(const PathwayHierarchy& h, const std::vector<LocusId>& locus_list)
{
    if (locus_list.empty()) throw ValidationError("cannot build masks for an empty locus list");
    validate_loci(locus_list);

    std::unordered_set<std::string> hierarchy_genes(h.genes.begin(), h.genes.end());
    std::unordered_set<std::string> present;
    std::vector<std::string> uncovered;
    for (const auto& l : locus_list) {
        if (!hierarchy_genes.contains(l.gene)) {
            if (std::find(uncovered.begin(), uncovered.end(), l.gene) == uncovered.end()) uncovered.push_back(l.gene);
            continue;
        }
        present.insert(l.gene);
    }
    if (!uncovered.empty()) {
        std::string list;
        for (std::size_t i = 0; i < uncovered.size() && i < 20; ++i) list += (i ? ", " : "") + uncovered[i];
        if (uncovered.size() > 20) list += fmt::format(", ... ({} total)", uncovered.size());
        throw CoverageError("genes absent from the pathway hierarchy: " + list);
    }

    MaskStack stack;
    stack.loci = locus_list;

    // Layer 0: loci -> genes, genes kept in hierarchy order.
    std::vector<std::string> genes;
    for (const auto& g : h.genes)
        if (present.contains(g)) genes.push_back(g);
    std::unordered_map<std::string, std::size_t> prev_idx;
    for (std::size_t j = 0; j < genes.size(); ++j) prev_idx.emplace(genes[j], j);
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t i = 0; i < locus_list.size(); ++i) entries.emplace_back(i, prev_idx.at(locus_list[i].gene));
    stack.masks.emplace_back(locus_list.size(), genes.size(), std::move(entries));
    stack.nodes.push_back(genes);

    // Pathway levels: keep nodes that still receive at least one child.
    for (std::size_t k = 0; k < h.levels.size(); ++k) {
        const auto& edges = k == 0 ? h.gene_edges : h.pathway_edges[k - 1];
        std::unordered_map<std::string, std::vector<std::size_t>> children;
        for (const auto& [c, p] : edges)
            if (auto it = prev_idx.find(c); it != prev_idx.end()) children[p].push_back(it->second);
        std::vector<std::string> nodes;
        std::vector<std::pair<std::size_t, std::size_t>> level_entries;
        for (const auto& p : h.levels[k]) {
            auto it = children.find(p);
            if (it == children.end()) continue;
            for (auto c : it->second) level_entries.emplace_back(c, nodes.size());
            nodes.push_back(p);
        }
        if (nodes.empty()) throw ValidationError(fmt::format("pathway level {} has no connected nodes", k));
        stack.masks.emplace_back(prev_idx.size(), nodes.size(), std::move(level_entries));
        prev_idx.clear();
        for (std::size_t j = 0; j < nodes.size(); ++j) prev_idx.emplace(nodes[j], j);
        stack.nodes.push_back(std::move(nodes));
    }
    return stack;
}

} // namespace prnet
