// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#include "guidecheck/alignment.hpp"
#include "guidecheck/cli.hpp"
#include "guidecheck/dotted_chart.hpp"
#include "guidecheck/error.hpp"
#include "guidecheck/report.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace guidecheck;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1 ----------------------------------------------------------------------------

Verdict fixture_structure() {
  const auto start = Clock::now();
  const auto model = testing::load_stakob();
  const auto s = bpmn::stats(model);
  const double elapsed = seconds_since(start);
  require(s.subprocesses == 3, fmt::format("{} sub-processes", s.subprocesses));
  require(s.tasks == 23, fmt::format("{} activities", s.tasks));
  require(s.gateways() >= 30 && s.gateways() <= 42, fmt::format("{} gateways outside [30, 42]", s.gateways()));
  require(s.gateways() == 36, fmt::format("{} gateways, frozen count is 36", s.gateways()));
  require(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));
  return {true, fmt::format("3 sub-processes, 23 activities, 36 gateways ({} XOR, {} AND, {} OR) in {:.3f} s",
                            s.exclusive_gateways, s.parallel_gateways, s.inclusive_gateways, elapsed)};
}

// 2 ----------------------------------------------------------------------------

Verdict compilation_soundness() {
  const auto start = Clock::now();
  const auto net = petri::compile(testing::load_stakob());
  const auto diagnostics = petri::check_workflow_net(net);
  require(diagnostics.empty(), diagnostics.empty() ? "" : diagnostics.front().message);
  std::size_t dead_ends = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    if (std::holds_alternative<petri::DeadEnd>(petri::random_playout(net, mix_seed(2024, i), 500))) ++dead_ends;
  }
  const double elapsed = seconds_since(start);
  require(dead_ends == 0, fmt::format("{} of 1000 playouts dead-ended", dead_ends));
  require(elapsed < 30.0, fmt::format("took {:.2f} s", elapsed));
  return {true, fmt::format("workflow-net check clean, 1000/1000 playouts reached the final marking in {:.2f} s",
                            elapsed)};
}

// 3 and 6 ----------------------------------------------------------------------

std::size_t bookkeeping_runs = 0;

ConformanceReport checked_report(const petri::PetriNet& net, const EventLog& log) {
  const auto result = alignment::align_log(net, log);
  require(result.failed_count() == 0, "alignment failures");
  const auto report = per_activity_moves(result);
  check_bookkeeping(report, log);
  ++bookkeeping_runs;
  return report;
}

Verdict self_conformance() {
  const auto& net = testing::stakob_net();
  const auto log = testing::playout_log(net, 500, 31);
  require(log.size() == 500, "playout dead-ended");
  const auto result = alignment::align_log(net, log);
  require(result.log_fitness_average == 1.0, fmt::format("average fitness {}", result.log_fitness_average));
  const auto report = per_activity_moves(result);
  check_bookkeeping(report, log);
  ++bookkeeping_runs;
  for (const auto& row : report.rows) {
    require(row.move_on_log == 0 && row.move_on_model == 0, fmt::format("row '{}' has deviations", row.activity));
  }
  return {true, fmt::format("500 traces, {} events, fitness 1.0 (cost-based {}), {} rows all deviation-free",
                            log.event_count(), result.log_fitness_cost_based, report.rows.size())};
}

// 4 ----------------------------------------------------------------------------

Verdict oracle_equivalence() {
  const auto start = Clock::now();
  testing::RandomModelGenerator generator{4242};
  Rng rng{77};
  const std::vector<std::string> alphabet{"a", "b", "c", "d", "e", "unknown"};
  std::size_t instances = 0;
  std::size_t with_unknown = 0;
  std::size_t nonzero = 0;
  std::size_t inconclusive = 0;
  std::size_t max_transitions = 0;
  while (instances < 250) {
    const auto [model, net] = generator.generate_small(12);
    max_transitions = std::max(max_transitions, net.transitions().size());
    for (int k = 0; k < 5; ++k) {
      std::vector<std::string> labels;
      if (k % 2 == 0) {
        const auto n = rng.below(9);
        for (std::size_t i = 0; i < n; ++i) labels.push_back(alphabet[rng.below(alphabet.size())]);
      } else {
        const auto playout = petri::random_playout(net, mix_seed(instances, k), 200);
        if (const auto* trace = std::get_if<Trace>(&playout)) {
          labels = inject_noise(*trace, rng.below(3), NoiseKinds::all(), mix_seed(instances, 100 + k), alphabet)
                       .trace.activities();
        }
        if (labels.size() > 8) labels.resize(8);
      }
      const auto trace = testing::make_trace("c", labels);
      const auto fast = alignment::optimal_alignment(net, trace);
      const auto plain = alignment::optimal_alignment(net, trace, {}, {alignment::AlignOptions{}.state_budget, false});
      alignment::Alignment slow;
      try {
        slow = alignment::brute_force_alignment(net, trace, {}, labels.size() + 2 * net.transitions().size() + 6);
      } catch (const OracleInconclusive&) {
        ++inconclusive;
        continue;
      }
      alignment::verify_alignment(net, labels, slow);
      require(fast.total_cost == slow.total_cost,
              fmt::format("instance {}: search cost {} vs oracle cost {}", instances, fast.total_cost,
                          slow.total_cost));
      require(plain.total_cost == slow.total_cost,
              fmt::format("instance {}: heuristic-free cost {} vs oracle cost {}", instances, plain.total_cost,
                          slow.total_cost));
      ++instances;
      if (std::find(labels.begin(), labels.end(), "unknown") != labels.end()) ++with_unknown;
      if (fast.total_cost > 0) ++nonzero;
    }
  }
  const double elapsed = seconds_since(start);
  require(inconclusive == 0, fmt::format("{} oracle runs inconclusive", inconclusive));
  require(with_unknown > 0, "no instance used an out-of-alphabet label");
  require(elapsed < 300.0, fmt::format("took {:.1f} s", elapsed));
  return {true, fmt::format("{} instances (nets of 4 to {} transitions, {} with out-of-alphabet labels, {} deviating) "
                            "agree exactly, with and without the heuristic, in {:.1f} s",
                            instances, max_transitions, with_unknown, nonzero, elapsed)};
}

// 5 ----------------------------------------------------------------------------

Verdict worked_example() {
  const auto net = testing::sequence_net({"A", "B"});
  const auto trace = testing::make_trace("c", {"B", "A"});
  const auto a = alignment::optimal_alignment(net, trace);
  const auto oracle = alignment::brute_force_alignment(net, trace, {}, 10);
  require(oracle.total_cost == 2.0, fmt::format("oracle cost {}", oracle.total_cost));
  require(a.total_cost == 2.0, fmt::format("cost {}", a.total_cost));
  require(a.trace_fitness == 0.5, fmt::format("fitness {}", a.trace_fitness));
  return {true, fmt::format("cost {} (oracle {}), fitness {:.2f}", a.total_cost, oracle.total_cost, a.trace_fitness)};
}

// 6 ----------------------------------------------------------------------------

Verdict bookkeeping() {
  const auto& net = testing::stakob_net();
  const auto base = testing::playout_log(net, 120, 606);
  std::vector<std::string> alphabet = net.visible_labels();
  alphabet.push_back("Dexamethasone Start");
  alphabet.push_back("CVVH End");
  for (std::size_t edits : {1, 3, 6}) {
    std::vector<Trace> noisy;
    for (std::size_t i = 0; i < base.size(); ++i) {
      noisy.push_back(inject_noise(base.traces()[i], edits, NoiseKinds::all(), mix_seed(edits, i), alphabet).trace);
    }
    checked_report(net, EventLog{"noisy", std::move(noisy)});
  }
  testing::RandomModelGenerator generator{66};
  Rng rng{6};
  for (int i = 0; i < 20; ++i) {
    const auto [model, net_small] = generator.generate_small(12);
    std::vector<Trace> traces;
    for (int t = 0; t < 10; ++t) {
      std::vector<std::string> labels;
      const auto n = rng.below(7);
      for (std::size_t e = 0; e < n; ++e) labels.push_back(std::string(1, static_cast<char>('a' + rng.below(7))));
      traces.push_back(testing::make_trace(fmt::format("c{}", t), labels));
    }
    checked_report(net_small, EventLog{"random", std::move(traces)});
  }
  return {true, fmt::format("identities held exactly on {} conformance runs", bookkeeping_runs)};
}

// 7 ----------------------------------------------------------------------------

Verdict noise_degradation() {
  const auto& net = testing::stakob_net();
  const auto base = testing::playout_log(net, 100, 707);
  require(base.size() == 100, "playout dead-ended");
  const auto alphabet = net.visible_labels();
  std::vector<double> means;
  std::string series;
  for (std::size_t k : {0, 1, 2, 4, 8}) {
    std::vector<Trace> noisy;
    for (std::size_t i = 0; i < base.size(); ++i) {
      noisy.push_back(inject_noise(base.traces()[i], k, NoiseKinds::all(), mix_seed(k, i), alphabet).trace);
    }
    const EventLog log{"noisy", std::move(noisy)};
    const auto result = alignment::align_log(net, log);
    require(result.failed_count() == 0, "alignment failures");
    check_bookkeeping(per_activity_moves(result), log);
    means.push_back(result.log_fitness_average);
    series += fmt::format("{}k={}: {:.3f}", series.empty() ? "" : ", ", k, result.log_fitness_average);
  }
  require(means.front() == 1.0, "noise-free fitness is not 1");
  for (std::size_t i = 1; i < means.size(); ++i) {
    require(means[i] <= means[i - 1] + 0.02, fmt::format("fitness rose: {}", series));
  }
  return {true, series};
}

// 8 ----------------------------------------------------------------------------

Verdict preprocessing() {
  using std::chrono::days;
  const Date base{std::chrono::year{2020} / 3 / 1};
  std::vector<Trace> traces;
  auto add = [&](const std::string& id, Date first, long span) {
    traces.push_back(Trace{id, {{id, "Symptobegin", first, 0}, {id, "Discharge alive", first + days{span}, 1}}});
  };
  for (int i = 0; i < 60; ++i) add(fmt::format("keep{:02}", i), base + days{i}, i % 71);
  add("planted_a", base, 71);
  add("planted_b", base + days{10}, 100);
  add("planted_c", base + days{20}, 400);
  const EventLog log{"synthetic", std::move(traces)};
  const auto kept = remove_duration_outliers(log, 70);
  std::set<std::string> removed;
  for (const auto& t : log.traces()) {
    if (!kept.find(t.case_id())) removed.insert(t.case_id());
  }
  require(removed == std::set<std::string>{"planted_a", "planted_b", "planted_c"},
          fmt::format("removed {} cases", removed.size()));

  const auto waves = WaveBoundaries::parse("2020-06-01,2020-10-01");
  std::vector<Trace> wave_traces;
  const std::map<std::string, std::pair<Date, std::size_t>> expected{
      {"w1_early", {Date{std::chrono::year{2020} / 3 / 1}, 0}},
      {"w1_last_day", {Date{std::chrono::year{2020} / 5 / 31}, 0}},
      {"w2_on_cutoff", {Date{std::chrono::year{2020} / 6 / 1}, 1}},
      {"w2_spans_cutoff", {Date{std::chrono::year{2020} / 9 / 20}, 1}},
      {"w3_on_cutoff", {Date{std::chrono::year{2020} / 10 / 1}, 2}},
      {"w3_late", {Date{std::chrono::year{2021} / 2 / 1}, 2}},
  };
  for (const auto& [id, info] : expected) {
    wave_traces.push_back(
        Trace{id, {{id, "Symptobegin", info.first, 0}, {id, "Discharge alive", info.first + days{30}, 1}}});
  }
  const auto buckets = split_by_waves(EventLog{"waves", std::move(wave_traces)}, waves);
  require(buckets.size() == 3, "expected three buckets");
  for (const auto& [id, info] : expected) {
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      require((buckets[b].find(id) != nullptr) == (b == info.second), fmt::format("case '{}' in wrong bucket", id));
    }
  }
  return {true, fmt::format("3 planted outliers removed, {} of {} cases kept; 6 cases bucketed exactly "
                            "(cutoff dates go to the later wave)",
                            kept.size(), log.size())};
}

// 9 ----------------------------------------------------------------------------

Verdict dotted_chart_counts() {
  std::vector<std::size_t> sizes;
  auto check = [&](const EventLog& log, std::size_t expected_events) {
    require(log.event_count() == expected_events, "fixture log has the wrong size");
    const auto chart = dotted_chart(log);
    require(chart.dots.size() == expected_events,
            fmt::format("{} dots for {} events", chart.dots.size(), expected_events));
    std::ostringstream svg;
    write_dotted_chart_svg(chart, svg);
    const auto text = svg.str();
    require(text.find("</svg>") != std::string::npos, "SVG not terminated");
    std::size_t circles = 0;
    for (auto pos = text.find("<circle"); pos != std::string::npos; pos = text.find("<circle", pos + 1)) ++circles;
    require(circles == expected_events, "circle count differs from event count");
    sizes.push_back(expected_events);
  };
  check(EventLog{}, 0);
  check(EventLog{"one", {testing::make_trace("c", {"Symptobegin"})}}, 1);

  const auto& net = testing::stakob_net();
  std::vector<Trace> traces;
  std::size_t events = 0;
  for (std::uint64_t i = 0; events < 2397; ++i) {
    auto playout = petri::random_playout(net, mix_seed(9, i), 500, fmt::format("case_{:04}", i + 1),
                                         Date{std::chrono::year{2020} / 3 / 1} + std::chrono::days{long(i % 400)});
    auto trace = std::get<Trace>(std::move(playout));
    std::vector<Event> kept{trace.events().begin(), trace.events().end()};
    if (events + kept.size() > 2397) kept.resize(2397 - events);
    events += kept.size();
    traces.emplace_back(trace.case_id(), std::move(kept));
  }
  check(EventLog{"large", std::move(traces)}, 2397);

  for (const auto* cutoffs : {"2020-06-01", "2020-06-01,2020-10-01", "2020-06-01,2020-10-01,2021-03-01"}) {
    const auto waves = WaveBoundaries::parse(cutoffs);
    std::ostringstream svg;
    write_dotted_chart_svg(dotted_chart(EventLog{"one", {testing::make_trace("c", {"A"})}}, waves), svg);
    const auto text = svg.str();
    std::size_t dashed = 0;
    for (auto pos = text.find("stroke-dasharray"); pos != std::string::npos;
         pos = text.find("stroke-dasharray", pos + 1)) {
      ++dashed;
    }
    require(dashed == waves.cutoffs().size(), fmt::format("{} dashed lines for {} cutoffs", dashed,
                                                          waves.cutoffs().size()));
  }
  return {true, "dot counts match for logs of 0, 1 and 2397 events; one dashed separator per cutoff (1, 2, 3)"};
}

// 10 ---------------------------------------------------------------------------

std::map<std::string, std::string> directory_snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in{entry.path(), std::ios::binary};
    std::stringstream buffer;
    buffer << in.rdbuf();
    files[entry.path().filename().string()] = buffer.str();
  }
  return files;
}

Verdict determinism() {
  const auto root = fs::temp_directory_path() / fmt::format("guidecheck_acceptance_{}", ::getpid());
  fs::remove_all(root);
  const auto model = testing::stakob_path().string();
  const auto input_dir = root / "input";
  fs::create_directories(input_dir);
  {
    std::vector<std::string> args{"guidecheck", "simulate", "--model", model, "--n", "150", "--seed", "10",
                                  "--noise", "2", "--out", input_dir.string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    require(cli::run(static_cast<int>(argv.size()), argv.data(), out, err) == 0, "simulate failed: " + err.str());
  }
  const auto log = (input_dir / "simulated_log.csv").string();

  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"simulate", {"simulate", "--model", model, "--n", "50", "--seed", "3", "--noise", "3"}},
      {"preprocess", {"preprocess", "--log", log, "--max-days", "20", "--min-variant-count", "2"}},
      {"check", {"check", "--model", model, "--log", log, "--waves", "2020-04-01,2020-06-01", "--format", "json"}},
      {"convert", {"convert", "--model", model}},
      {"dotted-chart", {"dotted-chart", "--log", log, "--waves", "2020-04-01,2020-06-01"}},
  };
  std::size_t files = 0;
  for (const auto& [name, base_args] : commands) {
    std::vector<std::map<std::string, std::string>> snapshots;
    std::vector<std::string> stdouts;
    for (int run = 0; run < 2; ++run) {
      const auto out_dir = root / fmt::format("{}_{}", name, run);
      auto args = base_args;
      args.insert(args.begin(), "guidecheck");
      args.push_back("--out");
      args.push_back(out_dir.string());
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
      require(code == 0, fmt::format("{} exited {}: {}", name, code, err.str()));
      snapshots.push_back(directory_snapshot(out_dir));
      stdouts.push_back(out.str());
    }
    require(!snapshots[0].empty(), name + " wrote no files");
    require(snapshots[0] == snapshots[1], name + " outputs differ between runs");
    require(stdouts[0] == stdouts[1], name + " console output differs between runs");
    files += snapshots[0].size();
  }
  fs::remove_all(root);
  return {true, fmt::format("5 commands run twice, {} output files byte-identical", files)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"guideline fixture structure", fixture_structure},
      {"compilation soundness", compilation_soundness},
      {"self-conformance of playouts", self_conformance},
      {"search/oracle equivalence", oracle_equivalence},
      {"worked alignment example", worked_example},
      {"bookkeeping identities", bookkeeping},
      {"noise degradation", noise_degradation},
      {"preprocessing", preprocessing},
      {"dotted chart", dotted_chart_counts},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict verdict;
    try {
      verdict = criteria[i].second();
    } catch (const std::exception& e) {
      verdict = {false, e.what()};
    }
    failures += verdict.pass ? 0 : 1;
    std::cout << fmt::format("criterion {:>2}: {} - {}: {}", i + 1, verdict.pass ? "PASS" : "FAIL", criteria[i].first,
                             verdict.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
  return failures == 0 ? 0 : 1;
}
