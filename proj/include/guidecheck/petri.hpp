#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "guidecheck/bpmn.hpp"
#include "guidecheck/event_log.hpp"

namespace guidecheck::petri {

using PlaceIndex = std::uint32_t;
using TransitionIndex = std::uint32_t;

/// Token count per place, dense over the places of one net.
class Marking {
 public:
  Marking() = default;
  explicit Marking(std::size_t place_count) : tokens_(place_count, 0) {}

  std::uint32_t operator[](PlaceIndex p) const { return tokens_[p]; }
  void add(PlaceIndex p, std::uint32_t n = 1) { tokens_[p] += n; }
  /// Throws ContractError when fewer than n tokens are present.
  void remove(PlaceIndex p, std::uint32_t n = 1);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::uint64_t total() const noexcept;
  std::span<const std::uint32_t> tokens() const noexcept { return tokens_; }

  bool operator==(const Marking&) const = default;

 private:
  std::vector<std::uint32_t> tokens_;
};

struct MarkingHash {
  std::size_t operator()(const Marking& m) const noexcept;
};

struct Place {
  std::string id;
  std::string name;
};

struct Transition {
  std::string id;
  std::optional<std::string> label;  // nullopt = silent
  std::vector<PlaceIndex> inputs;
  std::vector<PlaceIndex> outputs;

  bool silent() const noexcept { return !label.has_value(); }
};

/// Place/transition net with unit arc weights and initial/final markings.
class PetriNet {
 public:
  PlaceIndex add_place(std::string id, std::string name = {});
  TransitionIndex add_transition(std::string id, std::optional<std::string> label);
  /// place -> transition
  void add_input_arc(PlaceIndex place, TransitionIndex transition);
  /// transition -> place
  void add_output_arc(TransitionIndex transition, PlaceIndex place);
  void set_initial_marking(Marking marking);
  void set_final_marking(Marking marking);

  std::span<const Place> places() const noexcept { return places_; }
  std::span<const Transition> transitions() const noexcept { return transitions_; }
  const Place& place(PlaceIndex p) const { return places_[p]; }
  const Transition& transition(TransitionIndex t) const { return transitions_[t]; }
  const Marking& initial_marking() const noexcept { return initial_; }
  const Marking& final_marking() const noexcept { return final_; }

  std::optional<PlaceIndex> find_place(std::string_view id) const;
  std::optional<TransitionIndex> find_transition(std::string_view id) const;

  Marking empty_marking() const { return Marking{places_.size()}; }
  /// Sorted, unique labels of visible transitions.
  std::vector<std::string> visible_labels() const;

 private:
  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  Marking initial_;
  Marking final_;
};

bool is_enabled(const PetriNet& net, const Marking& m, TransitionIndex t);
/// Enabled transitions in ascending index order.
std::vector<TransitionIndex> enabled(const PetriNet& net, const Marking& m);
/// Pure: returns the successor marking. Throws ContractError if t is disabled.
Marking fire(const PetriNet& net, const Marking& m, TransitionIndex t);
/// True iff m equals the final marking exactly.
bool is_final(const PetriNet& net, const Marking& m);

struct CompileOptions {
  std::size_t max_inclusive_branches = 10;
};

/// Compiles a validated BPMN model into a workflow net: one visible transition
/// per task, silent routing transitions for gateways, sub-processes inlined.
/// Inclusive gateways must form matching split/join blocks and are expanded
/// into one silent transition per non-empty branch subset on each side.
/// Throws CompilationError.
PetriNet compile(const bpmn::Model& model, const CompileOptions& options = {});

struct DeadEnd {
  Marking marking;
  std::size_t steps = 0;
  std::string reason;
};

/// Fires uniformly random enabled transitions until the final marking is
/// reached. Visible labels become events dated one day apart from
/// `first_date`. Deterministic in `seed`.
std::variant<Trace, DeadEnd> random_playout(const PetriNet& net, std::uint64_t seed, std::size_t max_steps,
                                            std::string case_id = "playout",
                                            Date first_date = Date{std::chrono::year{2020} / 1 / 1});

struct NetDiagnostic {
  std::string element_id;
  std::string message;
};

/// Structural workflow-net check: single source place holding the initial
/// token, single sink place holding the final token, every node on a
/// source-to-sink path, every transition with input and output arcs.
std::vector<NetDiagnostic> check_workflow_net(const PetriNet& net);

}  // namespace guidecheck::petri
