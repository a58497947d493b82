#include "guidecheck/error.hpp"

#include <fmt/format.h>

namespace guidecheck {

namespace {
std::string located(const std::string& message, std::size_t line, std::size_t column) {
  if (line == 0) return message;
  if (column == 0) return fmt::format("line {}: {}", line, message);
  return fmt::format("line {}, column {}: {}", line, column, message);
}
}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(located(message, line, column)), line_(line), column_(column) {}

}  // namespace guidecheck
