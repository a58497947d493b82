#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "guidecheck/alignment.hpp"

namespace guidecheck {

struct ActivityMoveRow {
  std::string activity;
  std::size_t move_on_log = 0;
  std::size_t sync_move = 0;
  std::size_t move_on_model = 0;

  bool operator==(const ActivityMoveRow&) const = default;
};

struct ConformanceReport {
  /// Ordered by sync_move descending, then activity.
  std::vector<ActivityMoveRow> rows;
  double log_fitness_average = 0.0;
  double log_fitness_cost_based = 0.0;
  std::size_t case_count = 0;
  std::size_t event_count = 0;
  std::size_t variant_count = 0;
  std::size_t failed_count = 0;

  const ActivityMoveRow* find(std::string_view activity) const;
};

/// Counts moves per activity over all aligned traces. Silent model moves are
/// not counted. Every visible net label gets a row, even when all zero.
ConformanceReport per_activity_moves(const alignment::ConformanceResult& result);

/// Checks that move_on_log + sync_move equals the occurrence count of every
/// activity in `log`, and that the row totals equal the event count.
/// Throws ContractError naming the first mismatch.
void check_bookkeeping(const ConformanceReport& report, const EventLog& log);

enum class ReportFormat { csv, markdown, json };

/// Throws UsageError for anything other than csv, markdown (md) or json.
ReportFormat parse_report_format(std::string_view name);
std::string_view file_extension(ReportFormat format);

void render(const ConformanceReport& report, ReportFormat format, std::ostream& out);
std::string render(const ConformanceReport& report, ReportFormat format);

}  // namespace guidecheck
