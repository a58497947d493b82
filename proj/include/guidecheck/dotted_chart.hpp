#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "guidecheck/date.hpp"
#include "guidecheck/event_log.hpp"

namespace guidecheck {

struct DottedChartRow {
  std::string case_id;
  Date first_date;
};

struct Dot {
  std::size_t row = 0;
  Date date;
  bool is_first = false;
};

/// One row per trace sorted by first event date (ties by case id), one dot per event.
struct DottedChartData {
  std::vector<DottedChartRow> rows;
  std::vector<Dot> dots;
  std::vector<Date> cutoffs;
};

DottedChartData dotted_chart(const EventLog& log, const WaveBoundaries& waves = {});

/// Columns: row_index,case_id,date,is_first
void write_dotted_chart_csv(const DottedChartData& chart, std::ostream& out);

/// Standalone SVG: x = date, y = row, dashed vertical line per cutoff.
void write_dotted_chart_svg(const DottedChartData& chart, std::ostream& out);

}  // namespace guidecheck
