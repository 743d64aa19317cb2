#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace prnet {

enum class Channel { mutation = 0, cnv_amp = 1, cnv_del = 2 };

inline constexpr std::array<Channel, 3> kChannels{Channel::mutation, Channel::cnv_amp, Channel::cnv_del};

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view s);

// One input feature: a gene observed through one alteration channel.
struct LocusId {
    std::string gene;
    Channel channel = Channel::mutation;

    auto operator<=>(const LocusId&) const = default;
    bool operator==(const LocusId&) const = default;

    // "AR(cnv_amp)"
    [[nodiscard]] std::string label() const;
};

struct LocusIdHash {
    std::size_t operator()(const LocusId& l) const noexcept
    {
        return std::hash<std::string>{}(l.gene) * 3 + static_cast<std::size_t>(l.channel);
    }
};

// Gene-major locus list with channel order (mutation, cnv_amp, cnv_del).
std::vector<LocusId> loci_for_genes(const std::vector<std::string>& genes);

// Distinct genes in first-appearance order.
std::vector<std::string> genes_of(const std::vector<LocusId>& loci);

// Throws ValidationError for an empty gene, DuplicateError for a repeated
// (gene, channel) pair.
void validate_loci(const std::vector<LocusId>& loci);

} // namespace prnet
