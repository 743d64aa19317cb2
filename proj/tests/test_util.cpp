#include "test_util.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <unistd.h>

namespace prnet::test {

TempDir::TempDir()
{
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() / fmt::format("prnet_test_{}_{}", ::getpid(), counter++);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const std::filesystem::path& p, const std::string& content)
{
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

std::vector<LocusId> mutation_loci(std::size_t n)
{
    std::vector<LocusId> loci;
    for (std::size_t i = 0; i < n; ++i) loci.push_back({fmt::format("G{}", i), Channel::mutation});
    return loci;
}

Dataset make_dataset(const std::vector<std::vector<double>>& rows, std::vector<int> y, std::vector<LocusId> loci,
                     std::string name)
{
    const std::size_t m = rows.empty() ? loci.size() : rows.front().size();
    if (loci.empty()) loci = mutation_loci(m);
    Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ids.push_back(fmt::format("S{}", i));
        for (std::size_t j = 0; j < m; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return Dataset(std::move(ids), std::move(loci), std::move(x), std::move(y), std::move(name));
}

MaskStack random_masks(std::uint64_t seed, const std::vector<std::size_t>& widths, double density)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MaskStack s;
    s.loci = mutation_loci(widths.front());
    s.nodes.resize(widths.size() - 1);
    for (std::size_t k = 1; k < widths.size(); ++k) {
        for (std::size_t j = 0; j < widths[k]; ++j) s.nodes[k - 1].push_back(fmt::format("N{}_{}", k, j));
        std::vector<std::vector<bool>> on(widths[k - 1], std::vector<bool>(widths[k], false));
        for (auto& row : on)
            for (std::size_t j = 0; j < row.size(); ++j) row[j] = u(rng) < density;
        for (std::size_t i = 0; i < widths[k - 1]; ++i)
            on[i][std::uniform_int_distribution<std::size_t>(0, widths[k] - 1)(rng)] = true;
        for (std::size_t j = 0; j < widths[k]; ++j)
            on[std::uniform_int_distribution<std::size_t>(0, widths[k - 1] - 1)(rng)][j] = true;
        std::vector<std::pair<std::size_t, std::size_t>> entries;
        for (std::size_t i = 0; i < widths[k - 1]; ++i)
            for (std::size_t j = 0; j < widths[k]; ++j)
                if (on[i][j]) entries.emplace_back(i, j);
        s.masks.emplace_back(widths[k - 1], widths[k], std::move(entries));
    }
    return s;
}

MaskedNetwork random_network(std::uint64_t seed, const std::vector<std::size_t>& widths, double density)
{
    auto net = init_network(random_masks(seed, widths, density), seed + 1);
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto& l : net.layers)
        for (auto& b : l.bias) b = u(rng);
    for (auto& h : net.heads) h.b = u(rng);
    std::vector<double> w(net.depth());
    double sum = 0.0;
    for (auto& v : w) sum += v = 0.2 + std::abs(u(rng));
    for (auto& v : w) v /= sum;
    w.back() = 1.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) w.back() -= w[k];
    set_head_weights(net, w);
    return net;
}

Dataset random_binary_dataset(std::uint64_t seed, std::size_t n, const std::vector<LocusId>& loci, double p)
{
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(p);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(loci.size()));
    std::vector<int> y(n);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(fmt::format("R{}", i));
        y[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < loci.size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bit(rng) ? 1.0 : 0.0;
    }
    return Dataset(std::move(ids), loci, std::move(x), std::move(y), "random");
}

} // namespace prnet::test
