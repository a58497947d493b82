#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "guidecheck/error.hpp"
#include "guidecheck/event_log.hpp"
#include "test_support.hpp"

using namespace guidecheck;
using guidecheck::testing::make_trace;
using std::chrono::year;

namespace {

Date d(int y, unsigned m, unsigned day) { return Date{year{y} / m / day}; }

EventLog csv_log(const std::string& text) {
  std::istringstream in{text};
  return parse_csv(in);
}

/// One trace per (case, first date, span in days); two events per trace.
EventLog spans_log(const std::vector<std::tuple<std::string, Date, long>>& cases) {
  std::vector<Trace> traces;
  for (const auto& [id, first, span] : cases) {
    traces.emplace_back(id, std::vector<Event>{{id, "A", first, 0}, {id, "B", first + std::chrono::days{span}, 1}});
  }
  return EventLog{"spans", std::move(traces)};
}

std::vector<std::string> case_ids(const EventLog& log) {
  std::vector<std::string> ids;
  for (const auto& t : log.traces()) ids.push_back(t.case_id());
  return ids;
}

}  // namespace

TEST(Trace, SortsByDateThenSourceOrder) {
  const Trace t{"c", {{"c", "B", d(2020, 3, 2), 0}, {"c", "A", d(2020, 3, 1), 1}, {"c", "C", d(2020, 3, 2), 2}}};
  EXPECT_EQ(t.activities(), (std::vector<std::string>{"A", "B", "C"}));
}

TEST(Trace, RejectsForeignEventsAndEmptyLabels) {
  EXPECT_THROW((Trace{"c", {{"other", "A", d(2020, 1, 1), 0}}}), ContractError);
  EXPECT_THROW((Trace{"c", {{"c", "", d(2020, 1, 1), 0}}}), ContractError);
}

TEST(EventLog, RejectsDuplicateCaseIds) {
  EXPECT_THROW((EventLog{"x", {make_trace("a", {"A"}), make_trace("a", {"B"})}}), ContractError);
}

TEST(ParseCsv, GroupsRowsIntoTracesOrderedByCaseId) {
  const auto log = csv_log("case_id,activity,date\nb,X,2020-01-02\na,Y,2020-01-05\nb,Z,2020-01-01\n\n");
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log.traces()[0].case_id(), "a");
  EXPECT_EQ(log.traces()[1].activities(), (std::vector<std::string>{"Z", "X"}));
  EXPECT_EQ(log.event_count(), 3u);
  EXPECT_EQ(log.activity_labels(), (std::vector<std::string>{"X", "Y", "Z"}));
}

TEST(ParseCsv, CustomColumnsAndFormat) {
  std::istringstream in{"patient,x,step,when\np1,x,Triage,03.02.2021 10:00\n"};
  const auto log = parse_csv(in, {"patient", "step", "when"}, "%d.%m.%Y %H:%M");
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log.traces()[0][0].activity, "Triage");
  EXPECT_EQ(log.traces()[0][0].date, d(2021, 2, 3));
}

TEST(ParseCsv, MissingColumnIsSchemaError) {
  EXPECT_THROW(csv_log("case_id,activity\na,X\n"), SchemaError);
  EXPECT_THROW(csv_log(""), SchemaError);
}

TEST(ParseCsv, BadRowReportsLine) {
  try {
    csv_log("case_id,activity,date\na,X,2020-01-01\na,Y,not-a-date\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseCsv, WriteCsvRoundTrips) {
  const EventLog log{"x", {make_trace("a", {"A", "B, quoted"}), make_trace("b", {"C"})}};
  std::ostringstream out;
  write_csv(log, out);
  std::istringstream in{out.str()};
  const auto back = parse_csv(in);
  ASSERT_EQ(back.size(), log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(back.traces()[i].case_id(), log.traces()[i].case_id());
    EXPECT_EQ(back.traces()[i].activities(), log.traces()[i].activities());
    EXPECT_EQ(back.traces()[i][0].date, log.traces()[i][0].date);
  }
}

TEST(ParseXes, ReadsTracesAndEvents) {
  const std::string xes = R"(<?xml version="1.0"?>
<log xes.version="1.0">
  <trace><string key="concept:name" value="p2"/>
    <event><string key="concept:name" value="B"/><date key="time:timestamp" value="2020-04-02T10:00:00.000+01:00"/></event>
    <event><string key="concept:name" value="A"/><date key="time:timestamp" value="2020-04-01T09:00:00.000+01:00"/></event>
  </trace>
  <trace><string key="concept:name" value="p1"/>
    <event><string key="concept:name" value="C"/><date key="time:timestamp" value="2020-05-01T00:00:00"/></event>
  </trace>
  <trace><string key="concept:name" value="empty"/></trace>
</log>)";
  std::istringstream in{xes};
  const auto log = parse_xes(in);
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log.traces()[0].case_id(), "p1");
  EXPECT_EQ(log.traces()[1].activities(), (std::vector<std::string>{"A", "B"}));
}

TEST(ParseXes, MissingTimestampIsParseError) {
  std::istringstream in{R"(<log><trace><string key="concept:name" value="p"/><event><string key="concept:name" value="A"/></event></trace></log>)"};
  EXPECT_THROW(parse_xes(in), ParseError);
}

TEST(Preprocess, DurationOutliersInclusiveBound) {
  const auto log = spans_log({{"a", d(2020, 1, 1), 70}, {"b", d(2020, 1, 1), 71}, {"c", d(2020, 1, 1), 0}});
  EXPECT_EQ(case_ids(remove_duration_outliers(log, 70)), (std::vector<std::string>{"a", "c"}));
  EXPECT_THROW(remove_duration_outliers(log, 0), ContractError);
}

TEST(Preprocess, PlantedOutliersAreExactlyRemoved) {
  std::vector<std::tuple<std::string, Date, long>> cases;
  for (int i = 0; i < 40; ++i) cases.emplace_back(fmt::format("ok{:02}", i), d(2020, 3, 1), i % 60);
  cases.emplace_back("long1", d(2020, 3, 1), 71);
  cases.emplace_back("long2", d(2020, 4, 1), 120);
  cases.emplace_back("long3", d(2020, 5, 1), 365);
  const auto log = spans_log(cases);
  const auto kept = remove_duration_outliers(log, 70);
  EXPECT_EQ(kept.size(), 40u);
  for (const auto* id : {"long1", "long2", "long3"}) EXPECT_EQ(kept.find(id), nullptr);
}

TEST(Preprocess, AbstractionRenamesMergesAndDrops) {
  std::istringstream map_in{"from,to\nAbx Start,Antibiotics\nAbx End,Antibiotics\nNoise,\n"};
  const auto map = read_abstraction_map(map_in);
  const EventLog log{"x", {make_trace("a", {"Abx Start", "Noise", "Abx End", "Other"})}};
  const auto out = abstract_activities(log, map);
  EXPECT_EQ(out.traces()[0].activities(), (std::vector<std::string>{"Antibiotics", "Antibiotics", "Other"}));
}

TEST(Preprocess, VariantsOrderedByMultiplicity) {
  const EventLog log{"x",
                     {make_trace("a", {"A", "B"}), make_trace("b", {"A"}), make_trace("c", {"A", "B"}),
                      make_trace("d", {"C"})}};
  const auto vs = variants(log);
  ASSERT_EQ(vs.size(), 3u);
  EXPECT_EQ(vs[0], (Variant{{"A", "B"}, 2}));
  EXPECT_EQ(vs[1], (Variant{{"A"}, 1}));
  EXPECT_EQ(vs[2], (Variant{{"C"}, 1}));
  EXPECT_EQ(case_ids(filter_infrequent_variants(log, 2)), (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(filter_infrequent_variants(log, 1), log);
}

TEST(Waves, OnCutoffDateBelongsToLaterBucket) {
  const WaveBoundaries waves{{d(2020, 6, 1), d(2020, 10, 1)}};
  EXPECT_EQ(waves.bucket_count(), 3u);
  EXPECT_EQ(waves.bucket_of(d(2020, 5, 31)), 0u);
  EXPECT_EQ(waves.bucket_of(d(2020, 6, 1)), 1u);
  EXPECT_EQ(waves.bucket_of(d(2020, 9, 30)), 1u);
  EXPECT_EQ(waves.bucket_of(d(2020, 10, 1)), 2u);
}

TEST(Waves, ParseRequiresAscendingDates) {
  EXPECT_EQ(WaveBoundaries::parse("2020-06-01, 2020-10-01").cutoffs().size(), 2u);
  EXPECT_THROW(WaveBoundaries::parse("2020-10-01,2020-06-01"), ContractError);
  EXPECT_THROW(WaveBoundaries::parse("2020-06-01,,2020-10-01"), UsageError);
  EXPECT_THROW(WaveBoundaries::parse("2020-13-01"), ParseError);
}

TEST(Waves, SplitAssignsWholeCaseByFirstEvent) {
  const auto log = spans_log({{"early", d(2020, 5, 20), 30}, {"edge", d(2020, 6, 1), 1}, {"late", d(2020, 11, 1), 2}});
  const auto buckets = split_by_waves(log, WaveBoundaries{{d(2020, 6, 1), d(2020, 10, 1)}});
  ASSERT_EQ(buckets.size(), 3u);
  EXPECT_EQ(case_ids(buckets[0]), (std::vector<std::string>{"early"}));
  EXPECT_EQ(case_ids(buckets[1]), (std::vector<std::string>{"edge"}));
  EXPECT_EQ(case_ids(buckets[2]), (std::vector<std::string>{"late"}));
  EXPECT_EQ(buckets[2].name(), "spans_wave3");
  EXPECT_EQ(split_by_waves(log, {}).front(), log);
}

TEST(Statistics, DurationsAndSummary) {
  const auto log = spans_log({{"a", d(2020, 1, 1), 10}, {"b", d(2020, 1, 1), 20}});
  EXPECT_EQ(trace_duration_days(log.traces()[0]), 10);
  EXPECT_DOUBLE_EQ(mean_duration_days(log), 15.0);
  EXPECT_TRUE(std::isnan(mean_duration_days(EventLog{})));
  EXPECT_THROW(trace_duration_days(Trace{}), ContractError);
  const auto summary = summarize(log);
  EXPECT_EQ(summary.cases, 2u);
  EXPECT_EQ(summary.activities, 2u);
  EXPECT_EQ(summary.variants, 1u);
  EXPECT_EQ(summary.events, 4u);
}

TEST(Noise, ZeroEditsIsIdentity) {
  const auto t = make_trace("a", {"A", "B", "C"});
  const std::vector<std::string> alphabet{"X"};
  EXPECT_EQ(inject_noise(t, 0, NoiseKinds::all(), 1, alphabet).trace, t);
}

TEST(Noise, KindsChangeLengthAsExpected) {
  const auto t = make_trace("a", {"A", "B", "C", "D"});
  const std::vector<std::string> alphabet{"X"};
  EXPECT_EQ(inject_noise(t, 2, {true, false, false}, 3, alphabet).trace.size(), 2u);
  const auto inserted = inject_noise(t, 2, {false, true, false}, 3, alphabet).trace;
  EXPECT_EQ(inserted.size(), 6u);
  const auto acts = inserted.activities();
  EXPECT_EQ(std::count(acts.begin(), acts.end(), "X"), 2);
  const auto swapped = inject_noise(t, 1, {false, false, true}, 3, alphabet).trace.activities();
  auto sorted = swapped;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::string>{"A", "B", "C", "D"}));
  EXPECT_NE(swapped, t.activities());
}

TEST(Noise, InapplicableEditsAreCountedAsSkipped) {
  const auto single = make_trace("a", {"A"});
  const std::vector<std::string> alphabet{"X"};
  const auto result = inject_noise(single, 3, {false, false, true}, 9, alphabet);
  EXPECT_EQ(result.skipped, 3u);
  EXPECT_EQ(result.trace, single);
  EXPECT_THROW(inject_noise(single, 1, {false, true, false}, 9, {}), ContractError);
  EXPECT_THROW(NoiseKinds::parse("drop,shuffle"), UsageError);
  const auto kinds = NoiseKinds::parse("swap, drop");
  EXPECT_TRUE(kinds.swap && kinds.drop && !kinds.insert);
}

TEST(Noise, DeterministicPerSeed) {
  const auto t = make_trace("a", {"A", "B", "C", "D", "E"});
  const std::vector<std::string> alphabet{"X", "Y"};
  EXPECT_EQ(inject_noise(t, 4, NoiseKinds::all(), 11, alphabet).trace,
            inject_noise(t, 4, NoiseKinds::all(), 11, alphabet).trace);
}
