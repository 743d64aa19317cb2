#include "prnet/locus.hpp"

#include <unordered_set>

#include "prnet/error.hpp"

namespace prnet {

std::string_view to_string(Channel c)
{
    switch (c) {
    case Channel::mutation: return "mutation";
    case Channel::cnv_amp: return "cnv_amp";
    case Channel::cnv_del: return "cnv_del";
    }
    return "unknown";
}

Channel channel_from_string(std::string_view s)
{
    if (s == "mutation" || s == "mut") return Channel::mutation;
    if (s == "cnv_amp" || s == "amp") return Channel::cnv_amp;
    if (s == "cnv_del" || s == "del") return Channel::cnv_del;
    throw ValidationError("unknown channel '" + std::string(s) + "'");
}

std::string LocusId::label() const
{
    return gene + "(" + std::string(to_string(channel)) + ")";
}

std::vector<LocusId> loci_for_genes(const std::vector<std::string>& genes)
{
    std::vector<LocusId> loci;
    loci.reserve(genes.size() * kChannels.size());
    for (const auto& g : genes)
        for (auto c : kChannels) loci.push_back({g, c});
    return loci;
}

std::vector<std::string> genes_of(const std::vector<LocusId>& loci)
{
    std::vector<std::string> genes;
    std::unordered_set<std::string> seen;
    for (const auto& l : loci)
        if (seen.insert(l.gene).second) genes.push_back(l.gene);
    return genes;
}

void validate_loci(const std::vector<LocusId>& loci)
{
    std::unordered_set<LocusId, LocusIdHash> seen;
    for (const auto& l : loci) {
        if (l.gene.empty()) throw ValidationError("locus with empty gene symbol");
        if (!seen.insert(l).second) throw DuplicateError("duplicate locus " + l.label());
    }
}

} // namespace prnet
