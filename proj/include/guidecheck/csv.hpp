#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace guidecheck::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
};

/// RFC 4180 reader: comma delimiter, double-quote quoting with "" escapes,
/// quoted fields may span lines, CRLF or LF record terminators.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws ParseError on an
  /// unterminated quoted field.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace guidecheck::csv
