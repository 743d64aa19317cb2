#include "prnet/error.hpp"

#include <fmt/format.h>

namespace prnet {

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : Error(fmt::format("{}:{}: {}", path, line, what))
    , line_(line)
{
}

ConstraintViolation::ConstraintViolation(const std::string& what, std::vector<std::string> missing)
    : Error(what)
    , missing_(std::move(missing))
{
}

} // namespace prnet
