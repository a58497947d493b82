#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guidecheck/date.hpp"

namespace guidecheck {

struct Event {
  std::string case_id;
  std::string activity;
  Date date;
  std::size_t source_index = 0;

  bool operator==(const Event&) const = default;
};

/// Events of one case, ordered by (date, source_index).
class Trace {
 public:
  Trace() = default;

  /// Sorts `events` by (date, source_index). Throws ContractError if an event
  /// belongs to another case or has an empty activity.
  Trace(std::string case_id, std::vector<Event> events);

  const std::string& case_id() const noexcept { return case_id_; }
  std::span<const Event> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }

  std::vector<std::string> activities() const;

  bool operator==(const Trace&) const = default;

 private:
  std::string case_id_;
  std::vector<Event> events_;
};

/// Immutable collection of traces with unique case ids, ordered by case id.
class EventLog {
 public:
  EventLog() = default;
  /// Throws ContractError on duplicate case ids.
  EventLog(std::string name, std::vector<Trace> traces);

  const std::string& name() const noexcept { return name_; }
  std::span<const Trace> traces() const noexcept { return traces_; }
  std::size_t size() const noexcept { return traces_.size(); }
  bool empty() const noexcept { return traces_.empty(); }
  std::size_t event_count() const noexcept { return event_count_; }

  const Trace* find(std::string_view case_id) const;
  std::vector<std::string> activity_labels() const;  // sorted, unique

  bool operator==(const EventLog& other) const { return traces_ == other.traces_; }

 private:
  std::string name_;
  std::vector<Trace> traces_;
  std::size_t event_count_ = 0;
};

struct ColumnMapping {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::string date_column = "date";
};

/// Reads a header-bearing RFC 4180 CSV. One event per data row;
/// source_index is the 0-based data-row ordinal.
/// Throws SchemaError naming a missing column, ParseError with the line
/// number for bad dates or empty activities.
EventLog parse_csv(std::istream& in, const ColumnMapping& mapping = {},
                   std::string_view date_format = kIsoDateFormat, std::string name = "log");

/// Reads the XES subset: log/trace/event with string "concept:name" and
/// date "time:timestamp". Timestamps are truncated to their calendar date.
EventLog parse_xes(std::istream& in, std::string name = "log");

/// Writes one row per event, traces in case-id order.
void write_csv(const EventLog& log, std::ostream& out, const ColumnMapping& mapping = {},
               std::string_view date_format = kIsoDateFormat);

/// Keeps traces whose span (last date - first date) is at most `max_days`.
EventLog remove_duration_outliers(const EventLog& log, long max_days);

/// label -> replacement; nullopt drops the event.
using AbstractionMap = std::map<std::string, std::optional<std::string>, std::less<>>;

/// Relabels events; dropped events are removed, then empty traces.
EventLog abstract_activities(const EventLog& log, const AbstractionMap& rename);

/// Two-column CSV (from,to) with header; an empty `to` means drop.
AbstractionMap read_abstraction_map(std::istream& in);

struct Variant {
  std::vector<std::string> activities;
  std::size_t multiplicity = 0;

  bool operator==(const Variant&) const = default;
};

/// Variants ordered by descending multiplicity, then activity sequence.
std::vector<Variant> variants(const EventLog& log);

EventLog filter_infrequent_variants(const EventLog& log, std::size_t min_multiplicity);

class WaveBoundaries {
 public:
  WaveBoundaries() = default;
  /// Throws ContractError unless strictly ascending.
  explicit WaveBoundaries(std::vector<Date> cutoffs);

  /// Comma-separated ISO dates; empty text gives no cutoffs.
  static WaveBoundaries parse(std::string_view text);

  std::span<const Date> cutoffs() const noexcept { return cutoffs_; }
  std::size_t bucket_count() const noexcept { return cutoffs_.size() + 1; }
  /// Bucket i holds dates strictly before cutoff i (and not before cutoff i-1).
  std::size_t bucket_of(Date date) const;

 private:
  std::vector<Date> cutoffs_;
};

/// Assigns each trace to a bucket by its first event date.
std::vector<EventLog> split_by_waves(const EventLog& log, const WaveBoundaries& boundaries);

/// Throws ContractError on an empty trace.
long trace_duration_days(const Trace& trace);

/// Arithmetic mean of trace durations; NaN for an empty log.
double mean_duration_days(const EventLog& log);

struct LogSummary {
  std::size_t cases = 0;
  std::size_t activities = 0;
  std::size_t variants = 0;
  std::size_t events = 0;
  double mean_duration_days = 0.0;
};

LogSummary summarize(const EventLog& log);

struct NoiseKinds {
  bool drop = false;
  bool insert = false;
  bool swap = false;

  bool any() const noexcept { return drop || insert || swap; }
  /// Comma-separated subset of {drop, insert, swap}. Throws UsageError.
  static NoiseKinds parse(std::string_view text);
  static NoiseKinds all() { return {true, true, true}; }
};

struct NoisyTrace {
  Trace trace;
  std::size_t skipped = 0;  // edits that could not apply (e.g. drop on an empty trace)
};

/// Applies `edits` random edits. Each edit picks a kind uniformly from `kinds`:
/// drop removes a random event, insert adds a random alphabet label at a random
/// position (date copied from the neighbouring event), swap exchanges the labels
/// of two adjacent events. Pure in all arguments.
/// Throws ContractError if insert is enabled with an empty alphabet.
NoisyTrace inject_noise(const Trace& trace, std::size_t edits, NoiseKinds kinds, std::uint64_t seed,
                        std::span<const std::string> alphabet);

}  // namespace guidecheck
