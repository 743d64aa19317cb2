#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace prnet::csv {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

// Comma-separated with optional double-quoted fields. Blank lines are
// skipped, a UTF-8 BOM and trailing CR are stripped. Throws ParseError.
std::vector<Row> read(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

std::string trim(std::string_view s);

} // namespace prnet::csv
