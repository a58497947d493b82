#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace guidecheck {

/// Calendar date at day granularity.
using Date = std::chrono::sys_days;

inline constexpr std::string_view kIsoDateFormat = "%Y-%m-%d";

/// Parses `text` with a strftime-style pattern (%Y %m %d and literals).
/// Throws ParseError (line 0) on mismatch or an invalid calendar date.
Date parse_date(std::string_view text, std::string_view format = kIsoDateFormat);

std::string format_date(Date date, std::string_view format = kIsoDateFormat);

/// Whole days from `from` to `to` (negative if `to` precedes `from`).
inline long days_between(Date from, Date to) { return (to - from).count(); }

}  // namespace guidecheck
