#include "guidecheck/date.hpp"

#include <fmt/format.h>

#include <cctype>

#include "guidecheck/error.hpp"

namespace guidecheck {

namespace {

bool read_number(std::string_view text, std::size_t& pos, std::size_t max_digits, int& value) {
  std::size_t digits = 0;
  value = 0;
  while (pos < text.size() && digits < max_digits &&
         std::isdigit(static_cast<unsigned char>(text[pos]))) {
    value = value * 10 + (text[pos] - '0');
    ++pos;
    ++digits;
  }
  return digits > 0;
}

[[noreturn]] void fail(std::string_view text, std::string_view format) {
  throw ParseError(fmt::format("date '{}' does not match pattern '{}'", text, format), 0);
}

}  // namespace

Date parse_date(std::string_view text, std::string_view format) {
  int year = 0;
  int month = 0;
  int day = 0;
  bool have_year = false;
  bool have_month = false;
  bool have_day = false;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < format.size(); ++f) {
    if (format[f] != '%' || f + 1 == format.size()) {
      if (pos >= text.size() || text[pos] != format[f]) fail(text, format);
      ++pos;
      continue;
    }
    const char spec = format[++f];
    int ignored = 0;
    switch (spec) {
      case 'Y':
        have_year = read_number(text, pos, 4, year);
        if (!have_year) fail(text, format);
        break;
      case 'm':
        have_month = read_number(text, pos, 2, month);
        if (!have_month) fail(text, format);
        break;
      case 'd':
        have_day = read_number(text, pos, 2, day);
        if (!have_day) fail(text, format);
        break;
      case 'H':
      case 'M':
      case 'S':
        // Time of day is accepted and discarded.
        if (!read_number(text, pos, 2, ignored)) fail(text, format);
        break;
      case '%':
        if (pos >= text.size() || text[pos] != '%') fail(text, format);
        ++pos;
        break;
      default:
        throw ParseError(fmt::format("unsupported date pattern directive '%{}'", spec), 0);
    }
  }
  if (pos != text.size() || !have_year || !have_month || !have_day) fail(text, format);
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) throw ParseError(fmt::format("'{}' is not a valid calendar date", text), 0);
  return Date{ymd};
}

std::string format_date(Date date, std::string_view format) {
  const std::chrono::year_month_day ymd{date};
  std::string out;
  for (std::size_t f = 0; f < format.size(); ++f) {
    if (format[f] != '%' || f + 1 == format.size()) {
      out.push_back(format[f]);
      continue;
    }
    switch (format[++f]) {
      case 'Y':
        out += fmt::format("{:04d}", static_cast<int>(ymd.year()));
        break;
      case 'm':
        out += fmt::format("{:02d}", static_cast<unsigned>(ymd.month()));
        break;
      case 'd':
        out += fmt::format("{:02d}", static_cast<unsigned>(ymd.day()));
        break;
      case 'H':
      case 'M':
      case 'S':
        out += "00";
        break;
      case '%':
        out.push_back('%');
        break;
      default:
        throw ParseError(fmt::format("unsupported date pattern directive '%{}'", format[f]), 0);
    }
  }
  return out;
}

}  // namespace guidecheck
