#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guidecheck/event_log.hpp"
#include "guidecheck/petri.hpp"

namespace guidecheck::alignment {

/// Move costs. Synchronous and silent model moves are free; log moves and
/// visible model moves must cost more than zero.
struct CostScheme {
  double log_move = 1.0;
  double model_visible = 1.0;
  double model_silent = 0.0;
  double sync = 0.0;

  /// Throws ContractError.
  void validate() const;
};

enum class MoveKind { sync, model_silent, model_visible, log };

std::string_view to_string(MoveKind kind);

struct Move {
  MoveKind kind = MoveKind::log;
  std::optional<std::size_t> event_index;
  std::optional<petri::TransitionIndex> transition;
  std::string label;  // empty for silent model moves
  double cost = 0.0;

  bool operator==(const Move&) const = default;
};

struct Alignment {
  std::vector<Move> moves;
  double total_cost = 0.0;
  /// 1 - total_cost / reference_cost (1 when reference_cost is 0).
  double trace_fitness = 1.0;
  /// Cost of the trivial alignment: all log moves plus the cheapest model-only run.
  double reference_cost = 0.0;

  std::size_t count(MoveKind kind) const;
};

struct AlignOptions {
  std::size_t state_budget = 2'000'000;
  /// Adds an admissible lower bound (remaining events whose label no
  /// transition carries). Off gives plain uniform-cost search.
  bool use_heuristic = true;
};

/// Cost-optimal alignments against one net. Construction checks the net for
/// silent cycles and computes the cheapest model-only run once; align() is
/// const and safe to call concurrently.
class Aligner {
 public:
  /// Throws ContractError (invalid costs) or ModelError (silent cycle, final
  /// marking unreachable).
  explicit Aligner(const petri::PetriNet& net, CostScheme costs = {}, AlignOptions options = {});

  /// Throws ResourceError when the state budget is exhausted.
  Alignment align(const Trace& trace) const;
  Alignment align(std::span<const std::string> labels) const;

  double min_model_path_cost() const noexcept { return min_model_cost_; }
  const petri::PetriNet& net() const noexcept { return *net_; }
  const CostScheme& costs() const noexcept { return costs_; }

 private:
  Alignment search(std::span<const std::string> labels, std::size_t state_budget) const;

  const petri::PetriNet* net_;
  CostScheme costs_;
  AlignOptions options_;
  std::vector<std::string> visible_labels_;  // sorted
  std::vector<std::string> transition_labels_;  // trimmed; empty for silent transitions
  std::vector<std::vector<petri::TransitionIndex>> consumers_;  // per place
  double min_model_cost_ = 0.0;
};

/// Search over (marking, trace position) in the synchronous product. Among
/// equal-cost alternatives, sync < silent < visible model < log moves, then
/// lower transition index.
Alignment optimal_alignment(const petri::PetriNet& net, const Trace& trace, const CostScheme& costs = {},
                            const AlignOptions& options = {});

/// Independent depth-first oracle: enumerates every legal move sequence of at
/// most `depth_bound` moves and keeps a cheapest complete one.
/// Throws OracleInconclusive when no complete alignment fits in the bound.
Alignment brute_force_alignment(const petri::PetriNet& net, const Trace& trace, const CostScheme& costs,
                                std::size_t depth_bound);

/// Checks move well-formedness, cost bookkeeping, the trace projection and
/// that the model projection is a firing sequence from initial to final
/// marking. Throws ContractError describing the first violation.
void verify_alignment(const petri::PetriNet& net, std::span<const std::string> labels, const Alignment& alignment,
                      const CostScheme& costs = {});

/// Visible labels of a trace with surrounding whitespace removed.
std::vector<std::string> trace_labels(const Trace& trace);

struct TraceResult {
  std::string case_id;
  std::optional<Alignment> alignment;  // empty on failure
  std::string error;
};

struct ConformanceResult {
  std::vector<TraceResult> per_trace;  // case-id order
  /// NaN when no trace was aligned.
  double log_fitness_average = 0.0;
  double log_fitness_cost_based = 0.0;
  std::vector<std::string> model_labels;  // visible labels of the net

  std::size_t failed_count() const;
};

/// Aligns each distinct variant once (in parallel when threads != 1) and
/// replicates the result to its traces. Resource errors become per-trace
/// failures. threads == 0 picks the hardware concurrency.
ConformanceResult align_log(const petri::PetriNet& net, const EventLog& log, const CostScheme& costs = {},
                            const AlignOptions& options = {}, unsigned threads = 0);

/// Tab-separated: kind, label, event index or '-', transition id or '-', cost.
void write_alignment_dump(const petri::PetriNet& net, const Alignment& alignment, std::ostream& out);

void write_conformance_json(const petri::PetriNet& net, const ConformanceResult& result, std::ostream& out);

}  // namespace guidecheck::alignment
