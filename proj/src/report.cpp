#include "guidecheck/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "guidecheck/csv.hpp"
#include "guidecheck/error.hpp"

namespace guidecheck {

const ActivityMoveRow* ConformanceReport::find(std::string_view activity) const {
  const auto it = std::find_if(rows.begin(), rows.end(), [&](const ActivityMoveRow& r) { return r.activity == activity; });
  return it == rows.end() ? nullptr : &*it;
}

ConformanceReport per_activity_moves(const alignment::ConformanceResult& result) {
  using alignment::MoveKind;
  std::map<std::string, ActivityMoveRow> rows;
  for (const auto& label : result.model_labels) rows[label].activity = label;

  ConformanceReport report;
  std::set<std::vector<std::string>> variants;
  for (const auto& trace : result.per_trace) {
    ++report.case_count;
    if (!trace.alignment) {
      ++report.failed_count;
      continue;
    }
    std::vector<std::string> sequence;
    for (const auto& move : trace.alignment->moves) {
      if (move.kind == MoveKind::model_silent) continue;
      auto& row = rows[move.label];
      row.activity = move.label;
      switch (move.kind) {
        case MoveKind::sync:
          ++row.sync_move;
          break;
        case MoveKind::log:
          ++row.move_on_log;
          break;
        case MoveKind::model_visible:
          ++row.move_on_model;
          break;
        case MoveKind::model_silent:
          break;
      }
      if (move.event_index) {
        ++report.event_count;
        sequence.push_back(move.label);
      }
    }
    variants.insert(std::move(sequence));
  }
  report.variant_count = variants.size();
  report.log_fitness_average = result.log_fitness_average;
  report.log_fitness_cost_based = result.log_fitness_cost_based;

  for (auto& [label, row] : rows) report.rows.push_back(std::move(row));
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ActivityMoveRow& a, const ActivityMoveRow& b) { return a.sync_move > b.sync_move; });
  return report;
}

void check_bookkeeping(const ConformanceReport& report, const EventLog& log) {
  std::map<std::string, std::size_t> occurrences;
  std::size_t events = 0;
  for (const auto& trace : log.traces()) {
    for (const auto& label : alignment::trace_labels(trace)) {
      ++occurrences[label];
      ++events;
    }
  }
  std::size_t total = 0;
  for (const auto& row : report.rows) {
    const auto observed = row.move_on_log + row.sync_move;
    const auto it = occurrences.find(row.activity);
    const auto expected = it == occurrences.end() ? 0 : it->second;
    if (observed != expected) {
      throw ContractError(fmt::format("activity '{}': move_on_log + sync_move = {} but the log holds {} occurrences",
                                      row.activity, observed, expected));
    }
    total += observed;
  }
  for (const auto& [label, count] : occurrences) {
    if (!report.find(label)) throw ContractError(fmt::format("log activity '{}' has no report row", label));
  }
  if (total != events) {
    throw ContractError(fmt::format("report rows account for {} events but the log holds {}", total, events));
  }
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  if (name == "json") return ReportFormat::json;
  throw UsageError(fmt::format("unknown report format '{}' (expected csv, markdown or json)", name));
}

std::string_view file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::csv:
      return "csv";
    case ReportFormat::markdown:
      return "md";
    case ReportFormat::json:
      return "json";
  }
  return "txt";
}

namespace {

nlohmann::ordered_json fitness_value(double v) {
  return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
}

}  // namespace

void render(const ConformanceReport& report, ReportFormat format, std::ostream& out) {
  switch (format) {
    case ReportFormat::csv: {
      const std::vector<std::string> header{"activity", "move_on_log", "sync_move", "move_on_model"};
      csv::write_row(out, header);
      for (const auto& row : report.rows) {
        const std::vector<std::string> fields{row.activity, std::to_string(row.move_on_log),
                                              std::to_string(row.sync_move), std::to_string(row.move_on_model)};
        csv::write_row(out, fields);
      }
      break;
    }
    case ReportFormat::markdown:
      out << "| Activity | Move on log | Synchronous move | Move on model |\n";
      out << "|---|---:|---:|---:|\n";
      for (const auto& row : report.rows) {
        std::string label = row.activity;
        for (std::size_t pos = 0; (pos = label.find('|', pos)) != std::string::npos; pos += 2) label.insert(pos, "\\");
        out << fmt::format("| {} | {} | {} | {} |\n", label, row.move_on_log, row.sync_move, row.move_on_model);
      }
      break;
    case ReportFormat::json: {
      nlohmann::ordered_json doc;
      doc["case_count"] = report.case_count;
      doc["event_count"] = report.event_count;
      doc["variant_count"] = report.variant_count;
      doc["failed_count"] = report.failed_count;
      doc["log_fitness_average"] = fitness_value(report.log_fitness_average);
      doc["log_fitness_cost_based"] = fitness_value(report.log_fitness_cost_based);
      auto& rows = doc["rows"] = nlohmann::ordered_json::array();
      for (const auto& row : report.rows) {
        rows.push_back({{"activity", row.activity},
                        {"move_on_log", row.move_on_log},
                        {"sync_move", row.sync_move},
                        {"move_on_model", row.move_on_model}});
      }
      out << doc.dump(2) << '\n';
      break;
    }
  }
}

std::string render(const ConformanceReport& report, ReportFormat format) {
  std::ostringstream out;
  render(report, format, out);
  return out.str();
}

}  // namespace guidecheck
