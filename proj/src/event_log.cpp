#include "guidecheck/event_log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include "guidecheck/csv.hpp"
#include "guidecheck/error.hpp"
#include "guidecheck/random.hpp"
#include "guidecheck/xml.hpp"

namespace guidecheck {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Groups events by case id in order of first appearance.
std::vector<Trace> group_events(std::vector<Event> events) {
  std::unordered_map<std::string, std::size_t> slot_of;
  std::vector<std::pair<std::string, std::vector<Event>>> groups;
  for (auto& event : events) {
    auto [it, inserted] = slot_of.try_emplace(event.case_id, groups.size());
    if (inserted) groups.emplace_back(event.case_id, std::vector<Event>{});
    groups[it->second].second.push_back(std::move(event));
  }
  std::vector<Trace> traces;
  traces.reserve(groups.size());
  for (auto& [case_id, group] : groups) traces.emplace_back(case_id, std::move(group));
  return traces;
}

EventLog filtered(const EventLog& log, const auto& keep) {
  std::vector<Trace> kept;
  for (const auto& trace : log.traces()) {
    if (keep(trace)) kept.push_back(trace);
  }
  return EventLog{log.name(), std::move(kept)};
}

}  // namespace

// Trace ----------------------------------------------------------------------

Trace::Trace(std::string case_id, std::vector<Event> events)
    : case_id_(std::move(case_id)), events_(std::move(events)) {
  for (const auto& event : events_) {
    if (event.case_id != case_id_) {
      throw ContractError(
          fmt::format("event of case '{}' placed in trace '{}'", event.case_id, case_id_));
    }
    if (event.activity.empty()) {
      throw ContractError(fmt::format("event with empty activity in trace '{}'", case_id_));
    }
  }
  std::stable_sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
    return std::tie(a.date, a.source_index) < std::tie(b.date, b.source_index);
  });
}

std::vector<std::string> Trace::activities() const {
  std::vector<std::string> labels;
  labels.reserve(events_.size());
  for (const auto& event : events_) labels.push_back(event.activity);
  return labels;
}

// EventLog -------------------------------------------------------------------

EventLog::EventLog(std::string name, std::vector<Trace> traces)
    : name_(std::move(name)), traces_(std::move(traces)) {
  std::sort(traces_.begin(), traces_.end(),
            [](const Trace& a, const Trace& b) { return a.case_id() < b.case_id(); });
  for (std::size_t i = 1; i < traces_.size(); ++i) {
    if (traces_[i - 1].case_id() == traces_[i].case_id()) {
      throw ContractError(fmt::format("duplicate case id '{}'", traces_[i].case_id()));
    }
  }
  for (const auto& trace : traces_) event_count_ += trace.size();
}

const Trace* EventLog::find(std::string_view case_id) const {
  const auto it = std::lower_bound(traces_.begin(), traces_.end(), case_id,
                                   [](const Trace& t, std::string_view id) { return t.case_id() < id; });
  return (it != traces_.end() && it->case_id() == case_id) ? &*it : nullptr;
}

std::vector<std::string> EventLog::activity_labels() const {
  std::set<std::string> labels;
  for (const auto& trace : traces_) {
    for (const auto& event : trace.events()) labels.insert(event.activity);
  }
  return {labels.begin(), labels.end()};
}

// Readers and writers ----------------------------------------------------------

EventLog parse_csv(std::istream& in, const ColumnMapping& mapping, std::string_view date_format,
                   std::string name) {
  csv::Reader reader{in};
  const auto header = reader.next();
  if (!header) throw SchemaError("CSV input has no header row");

  auto column = [&](const std::string& wanted) {
    const auto& fields = header->fields;
    const auto it = std::find_if(fields.begin(), fields.end(),
                                 [&](const std::string& f) { return trim(f) == wanted; });
    if (it == fields.end()) throw SchemaError(fmt::format("missing column '{}'", wanted));
    return static_cast<std::size_t>(it - fields.begin());
  };
  const std::size_t case_col = column(mapping.case_column);
  const std::size_t activity_col = column(mapping.activity_column);
  const std::size_t date_col = column(mapping.date_column);
  const std::size_t needed = std::max({case_col, activity_col, date_col}) + 1;

  std::vector<Event> events;
  while (auto record = reader.next()) {
    const auto& fields = record->fields;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() < needed) {
      throw ParseError(fmt::format("expected at least {} fields, found {}", needed, fields.size()),
                       record->line);
    }
    Event event;
    event.case_id = std::string{trim(fields[case_col])};
    event.activity = std::string{trim(fields[activity_col])};
    if (event.case_id.empty()) throw ParseError("empty case id", record->line);
    if (event.activity.empty()) throw ParseError("empty activity", record->line);
    try {
      event.date = parse_date(trim(fields[date_col]), date_format);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), record->line);
    }
    event.source_index = events.size();
    events.push_back(std::move(event));
  }
  return EventLog{std::move(name), group_events(std::move(events))};
}

EventLog parse_xes(std::istream& in, std::string name) {
  const auto root = xml::parse(in);
  if (root.name != "log") throw ParseError("XES root element must be <log>", root.line, root.column);

  auto string_attribute = [](const xml::Element& parent, std::string_view key) -> const std::string* {
    for (const auto& child : parent.children) {
      if (child.name == "string" && child.attribute_or("key", "") == key) return child.attribute("value");
    }
    return nullptr;
  };

  std::vector<Trace> traces;
  std::set<std::string, std::less<>> seen;
  std::size_t source_index = 0;
  for (const auto& trace_element : root.children) {
    if (trace_element.name != "trace") continue;
    const auto* case_id = string_attribute(trace_element, "concept:name");
    if (case_id == nullptr) {
      throw ParseError("trace lacks a concept:name", trace_element.line, trace_element.column);
    }
    if (!seen.insert(*case_id).second) {
      throw ParseError(fmt::format("duplicate case id '{}'", *case_id), trace_element.line,
                       trace_element.column);
    }
    std::vector<Event> events;
    for (const auto& event_element : trace_element.children) {
      if (event_element.name != "event") continue;
      const auto* label = string_attribute(event_element, "concept:name");
      if (label == nullptr || trim(*label).empty()) {
        throw ParseError("event lacks a concept:name", event_element.line, event_element.column);
      }
      const std::string* timestamp = nullptr;
      for (const auto& attr : event_element.children) {
        if (attr.name == "date" && attr.attribute_or("key", "") == "time:timestamp") {
          timestamp = attr.attribute("value");
        }
      }
      if (timestamp == nullptr) {
        throw ParseError("event lacks a time:timestamp", event_element.line, event_element.column);
      }
      Event event;
      event.case_id = *case_id;
      event.activity = std::string{trim(*label)};
      try {
        event.date = parse_date(std::string_view{*timestamp}.substr(0, 10));
      } catch (const ParseError& e) {
        throw ParseError(e.what(), event_element.line, event_element.column);
      }
      event.source_index = source_index++;
      events.push_back(std::move(event));
    }
    if (!events.empty()) traces.emplace_back(*case_id, std::move(events));
  }
  return EventLog{std::move(name), std::move(traces)};
}

void write_csv(const EventLog& log, std::ostream& out, const ColumnMapping& mapping,
               std::string_view date_format) {
  const std::vector<std::string> header{mapping.case_column, mapping.activity_column,
                                        mapping.date_column};
  csv::write_row(out, header);
  std::vector<std::string> row(3);
  for (const auto& trace : log.traces()) {
    for (const auto& event : trace.events()) {
      row[0] = event.case_id;
      row[1] = event.activity;
      row[2] = format_date(event.date, date_format);
      csv::write_row(out, row);
    }
  }
}

// Preprocessing ----------------------------------------------------------------

EventLog remove_duration_outliers(const EventLog& log, long max_days) {
  if (max_days < 1) throw ContractError("max_days must be at least 1");
  return filtered(log, [&](const Trace& trace) {
    return trace.empty() || trace_duration_days(trace) <= max_days;
  });
}

EventLog abstract_activities(const EventLog& log, const AbstractionMap& rename) {
  std::vector<Trace> traces;
  for (const auto& trace : log.traces()) {
    std::vector<Event> events;
    for (const auto& event : trace.events()) {
      const auto it = rename.find(event.activity);
      if (it == rename.end()) {
        events.push_back(event);
      } else if (it->second) {
        events.push_back(event);
        events.back().activity = *it->second;
      }
    }
    if (!events.empty()) traces.emplace_back(trace.case_id(), std::move(events));
  }
  return EventLog{log.name(), std::move(traces)};
}

AbstractionMap read_abstraction_map(std::istream& in) {
  csv::Reader reader{in};
  if (!reader.next()) return {};
  AbstractionMap map;
  while (auto record = reader.next()) {
    const auto& fields = record->fields;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() < 2) throw ParseError("expected two fields (from,to)", record->line);
    const auto from = trim(fields[0]);
    const auto to = trim(fields[1]);
    if (from.empty()) throw ParseError("empty source label", record->line);
    map.insert_or_assign(std::string{from},
                         to.empty() ? std::nullopt : std::optional<std::string>{std::string{to}});
  }
  return map;
}

std::vector<Variant> variants(const EventLog& log) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (const auto& trace : log.traces()) ++counts[trace.activities()];
  std::vector<Variant> out;
  out.reserve(counts.size());
  for (auto& [activities, count] : counts) out.push_back({activities, count});
  std::stable_sort(out.begin(), out.end(),
                   [](const Variant& a, const Variant& b) { return a.multiplicity > b.multiplicity; });
  return out;
}

EventLog filter_infrequent_variants(const EventLog& log, std::size_t min_multiplicity) {
  if (min_multiplicity < 1) throw ContractError("min_multiplicity must be at least 1");
  std::map<std::vector<std::string>, std::size_t> counts;
  for (const auto& trace : log.traces()) ++counts[trace.activities()];
  return filtered(log, [&](const Trace& trace) { return counts[trace.activities()] >= min_multiplicity; });
}

// Waves ------------------------------------------------------------------------

WaveBoundaries::WaveBoundaries(std::vector<Date> cutoffs) : cutoffs_(std::move(cutoffs)) {
  for (std::size_t i = 1; i < cutoffs_.size(); ++i) {
    if (!(cutoffs_[i - 1] < cutoffs_[i])) {
      throw ContractError("wave cutoffs must be strictly ascending");
    }
  }
}

WaveBoundaries WaveBoundaries::parse(std::string_view text) {
  std::vector<Date> cutoffs;
  while (!trim(text).empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item.empty()) throw UsageError("empty entry in wave cutoff list");
    cutoffs.push_back(parse_date(item));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return WaveBoundaries{std::move(cutoffs)};
}

std::size_t WaveBoundaries::bucket_of(Date date) const {
  return static_cast<std::size_t>(std::upper_bound(cutoffs_.begin(), cutoffs_.end(), date) -
                                  cutoffs_.begin());
}

std::vector<EventLog> split_by_waves(const EventLog& log, const WaveBoundaries& boundaries) {
  std::vector<std::vector<Trace>> buckets(boundaries.bucket_count());
  for (const auto& trace : log.traces()) {
    const std::size_t bucket = trace.empty() ? 0 : boundaries.bucket_of(trace[0].date);
    buckets[bucket].push_back(trace);
  }
  std::vector<EventLog> logs;
  logs.reserve(buckets.size());
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    logs.emplace_back(fmt::format("{}_wave{}", log.name(), i + 1), std::move(buckets[i]));
  }
  return logs;
}

// Statistics -------------------------------------------------------------------

long trace_duration_days(const Trace& trace) {
  if (trace.empty()) throw ContractError("duration of an empty trace is undefined");
  return days_between(trace[0].date, trace[trace.size() - 1].date);
}

double mean_duration_days(const EventLog& log) {
  std::size_t counted = 0;
  double total = 0.0;
  for (const auto& trace : log.traces()) {
    if (trace.empty()) continue;
    total += static_cast<double>(trace_duration_days(trace));
    ++counted;
  }
  return counted == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(counted);
}

LogSummary summarize(const EventLog& log) {
  return LogSummary{log.size(), log.activity_labels().size(), variants(log).size(), log.event_count(),
                    mean_duration_days(log)};
}

// Noise ------------------------------------------------------------------------

NoiseKinds NoiseKinds::parse(std::string_view text) {
  NoiseKinds kinds;
  while (!trim(text).empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item == "drop") {
      kinds.drop = true;
    } else if (item == "insert") {
      kinds.insert = true;
    } else if (item == "swap") {
      kinds.swap = true;
    } else {
      throw UsageError(fmt::format("unknown noise kind '{}' (expected drop, insert, swap)", item));
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return kinds;
}

NoisyTrace inject_noise(const Trace& trace, std::size_t edits, NoiseKinds kinds, std::uint64_t seed,
                        std::span<const std::string> alphabet) {
  if (kinds.insert && alphabet.empty()) {
    throw ContractError("insert noise requires a non-empty alphabet");
  }
  NoisyTrace result{trace, 0};
  if (edits == 0) return result;
  if (!kinds.any()) throw ContractError("no noise kinds enabled");

  enum class Kind { drop, insert, swap };
  std::vector<Kind> enabled;
  if (kinds.drop) enabled.push_back(Kind::drop);
  if (kinds.insert) enabled.push_back(Kind::insert);
  if (kinds.swap) enabled.push_back(Kind::swap);

  Rng rng{seed};
  std::vector<Event> events{trace.events().begin(), trace.events().end()};
  for (std::size_t e = 0; e < edits; ++e) {
    switch (enabled[rng.below(enabled.size())]) {
      case Kind::drop:
        if (events.empty()) {
          ++result.skipped;
          break;
        }
        events.erase(events.begin() + static_cast<std::ptrdiff_t>(rng.below(events.size())));
        break;
      case Kind::insert: {
        if (events.empty()) {
          ++result.skipped;
          break;
        }
        const std::size_t at = rng.below(events.size() + 1);
        Event inserted = events[at == 0 ? 0 : at - 1];
        inserted.activity = alphabet[rng.below(alphabet.size())];
        events.insert(events.begin() + static_cast<std::ptrdiff_t>(at), std::move(inserted));
        break;
      }
      case Kind::swap: {
        if (events.size() < 2) {
          ++result.skipped;
          break;
        }
        const std::size_t at = rng.below(events.size() - 1);
        std::swap(events[at].activity, events[at + 1].activity);
        break;
      }
    }
  }
  // Positions become the new tie-break order so the edited sequence survives re-sorting.
  for (std::size_t i = 0; i < events.size(); ++i) events[i].source_index = i;
  result.trace = Trace{trace.case_id(), std::move(events)};
  return result;
}

}  // namespace guidecheck
