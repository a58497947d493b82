#include "guidecheck/petri.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

#include "guidecheck/error.hpp"
#include "guidecheck/random.hpp"

namespace guidecheck::petri {

void Marking::remove(PlaceIndex p, std::uint32_t n) {
  if (tokens_[p] < n) throw ContractError(fmt::format("place {} holds {} tokens, cannot remove {}", p, tokens_[p], n));
  tokens_[p] -= n;
}

std::uint64_t Marking::total() const noexcept {
  return std::accumulate(tokens_.begin(), tokens_.end(), std::uint64_t{0});
}

std::size_t MarkingHash::operator()(const Marking& m) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto count : m.tokens()) {
    h ^= count;
    h *= 0x100000001b3ull;
  }
  return static_cast<std::size_t>(h);
}

// PetriNet ---------------------------------------------------------------------

PlaceIndex PetriNet::add_place(std::string id, std::string name) {
  places_.push_back({std::move(id), std::move(name)});
  return static_cast<PlaceIndex>(places_.size() - 1);
}

TransitionIndex PetriNet::add_transition(std::string id, std::optional<std::string> label) {
  transitions_.push_back({std::move(id), std::move(label), {}, {}});
  return static_cast<TransitionIndex>(transitions_.size() - 1);
}

void PetriNet::add_input_arc(PlaceIndex place, TransitionIndex transition) {
  if (place >= places_.size() || transition >= transitions_.size()) throw ContractError("arc endpoint out of range");
  auto& inputs = transitions_[transition].inputs;
  if (std::find(inputs.begin(), inputs.end(), place) == inputs.end()) inputs.push_back(place);
}

void PetriNet::add_output_arc(TransitionIndex transition, PlaceIndex place) {
  if (place >= places_.size() || transition >= transitions_.size()) throw ContractError("arc endpoint out of range");
  auto& outputs = transitions_[transition].outputs;
  if (std::find(outputs.begin(), outputs.end(), place) == outputs.end()) outputs.push_back(place);
}

void PetriNet::set_initial_marking(Marking marking) {
  if (marking.size() != places_.size()) throw ContractError("initial marking is not over this net's places");
  initial_ = std::move(marking);
}

void PetriNet::set_final_marking(Marking marking) {
  if (marking.size() != places_.size()) throw ContractError("final marking is not over this net's places");
  final_ = std::move(marking);
}

std::optional<PlaceIndex> PetriNet::find_place(std::string_view id) const {
  for (std::size_t i = 0; i < places_.size(); ++i) {
    if (places_[i].id == id) return static_cast<PlaceIndex>(i);
  }
  return std::nullopt;
}

std::optional<TransitionIndex> PetriNet::find_transition(std::string_view id) const {
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    if (transitions_[i].id == id) return static_cast<TransitionIndex>(i);
  }
  return std::nullopt;
}

std::vector<std::string> PetriNet::visible_labels() const {
  std::set<std::string> labels;
  for (const auto& t : transitions_) {
    if (t.label) labels.insert(*t.label);
  }
  return {labels.begin(), labels.end()};
}

// Firing rule ------------------------------------------------------------------

bool is_enabled(const PetriNet& net, const Marking& m, TransitionIndex t) {
  if (m.size() != net.places().size()) throw ContractError("marking is not over this net's places");
  const auto& inputs = net.transition(t).inputs;
  return std::all_of(inputs.begin(), inputs.end(), [&](PlaceIndex p) { return m[p] >= 1; });
}

std::vector<TransitionIndex> enabled(const PetriNet& net, const Marking& m) {
  std::vector<TransitionIndex> out;
  for (TransitionIndex t = 0; t < net.transitions().size(); ++t) {
    if (is_enabled(net, m, t)) out.push_back(t);
  }
  return out;
}

Marking fire(const PetriNet& net, const Marking& m, TransitionIndex t) {
  if (t >= net.transitions().size()) throw ContractError(fmt::format("no transition with index {}", t));
  if (!is_enabled(net, m, t)) {
    throw ContractError(fmt::format("transition '{}' is not enabled", net.transition(t).id));
  }
  Marking next = m;
  for (const auto p : net.transition(t).inputs) next.remove(p);
  for (const auto p : net.transition(t).outputs) next.add(p);
  return next;
}

bool is_final(const PetriNet& net, const Marking& m) { return m == net.final_marking(); }

// Playout ----------------------------------------------------------------------

std::variant<Trace, DeadEnd> random_playout(const PetriNet& net, std::uint64_t seed, std::size_t max_steps,
                                            std::string case_id, Date first_date) {
  Rng rng{seed};
  Marking m = net.initial_marking();
  std::vector<Event> events;
  std::size_t steps = 0;
  while (!is_final(net, m)) {
    if (steps == max_steps) {
      return DeadEnd{std::move(m), steps, fmt::format("final marking not reached within {} steps", max_steps)};
    }
    const auto candidates = enabled(net, m);
    if (candidates.empty()) return DeadEnd{std::move(m), steps, "no transition enabled (deadlock)"};
    const auto t = candidates[rng.below(candidates.size())];
    m = fire(net, m, t);
    ++steps;
    if (const auto& label = net.transition(t).label) {
      const auto index = events.size();
      events.push_back({case_id, *label, first_date + std::chrono::days{static_cast<long>(index)}, index});
    }
  }
  return Trace{std::move(case_id), std::move(events)};
}

// Workflow-net check -----------------------------------------------------------

std::vector<NetDiagnostic> check_workflow_net(const PetriNet& net) {
  std::vector<NetDiagnostic> out;
  const std::size_t place_count = net.places().size();
  const std::size_t transition_count = net.transitions().size();

  std::vector<std::vector<TransitionIndex>> consumers(place_count);
  std::vector<std::vector<TransitionIndex>> producers(place_count);
  for (TransitionIndex t = 0; t < transition_count; ++t) {
    const auto& tr = net.transition(t);
    if (tr.inputs.empty()) out.push_back({tr.id, fmt::format("transition '{}' has no input place", tr.id)});
    if (tr.outputs.empty()) out.push_back({tr.id, fmt::format("transition '{}' has no output place", tr.id)});
    for (const auto p : tr.inputs) consumers[p].push_back(t);
    for (const auto p : tr.outputs) producers[p].push_back(t);
  }

  std::vector<PlaceIndex> sources;
  std::vector<PlaceIndex> sinks;
  for (PlaceIndex p = 0; p < place_count; ++p) {
    if (producers[p].empty()) sources.push_back(p);
    if (consumers[p].empty()) sinks.push_back(p);
  }
  auto names = [&](const std::vector<PlaceIndex>& ps) {
    std::vector<std::string> ids;
    for (const auto p : ps) ids.push_back(net.place(p).id);
    return fmt::format("{}", fmt::join(ids, ", "));
  };
  if (sources.size() != 1) {
    out.push_back({sources.empty() ? std::string{} : net.place(sources.back()).id,
                   fmt::format("expected exactly one source place, found {}: {}", sources.size(), names(sources))});
  }
  if (sinks.size() != 1) {
    out.push_back({sinks.empty() ? std::string{} : net.place(sinks.back()).id,
                   fmt::format("expected exactly one sink place, found {}: {}", sinks.size(), names(sinks))});
  }

  auto single_token_on = [&](const Marking& m, std::optional<PlaceIndex> p) {
    return p && m.size() == place_count && m.total() == 1 && m[*p] == 1;
  };
  const auto source = sources.size() == 1 ? std::optional<PlaceIndex>{sources[0]} : std::nullopt;
  const auto sink = sinks.size() == 1 ? std::optional<PlaceIndex>{sinks[0]} : std::nullopt;
  if (!single_token_on(net.initial_marking(), source)) {
    out.push_back({"initial_marking", "initial marking must be exactly one token on the source place"});
  }
  if (!single_token_on(net.final_marking(), sink)) {
    out.push_back({"final_marking", "final marking must be exactly one token on the sink place"});
  }
  if (!source || !sink) return out;

  // Node indices: places [0, P), transitions [P, P+T).
  auto sweep = [&](PlaceIndex seed, bool forward) {
    std::vector<bool> seen(place_count + transition_count, false);
    std::deque<std::size_t> queue{seed};
    seen[seed] = true;
    auto visit = [&](std::size_t node) {
      if (!seen[node]) {
        seen[node] = true;
        queue.push_back(node);
      }
    };
    while (!queue.empty()) {
      const auto node = queue.front();
      queue.pop_front();
      if (node < place_count) {
        for (const auto t : forward ? consumers[node] : producers[node]) visit(place_count + t);
      } else {
        const auto& tr = net.transition(static_cast<TransitionIndex>(node - place_count));
        for (const auto p : forward ? tr.outputs : tr.inputs) visit(p);
      }
    }
    return seen;
  };
  const auto from_source = sweep(*source, true);
  const auto to_sink = sweep(*sink, false);
  for (std::size_t node = 0; node < place_count + transition_count; ++node) {
    if (from_source[node] && to_sink[node]) continue;
    const bool is_place = node < place_count;
    const auto& id = is_place ? net.place(static_cast<PlaceIndex>(node)).id
                              : net.transition(static_cast<TransitionIndex>(node - place_count)).id;
    out.push_back({id, fmt::format("{} '{}' is not on a path from source to sink", is_place ? "place" : "transition", id)});
  }
  return out;
}

}  // namespace guidecheck::petri
