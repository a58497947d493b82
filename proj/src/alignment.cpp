#include "guidecheck/alignment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <queue>
#include <thread>
#include <unordered_map>

#include "guidecheck/error.hpp"

namespace guidecheck::alignment {

using petri::PetriNet;
using petri::PlaceIndex;
using petri::TransitionIndex;

namespace {

std::string trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string{s.substr(first, last - first + 1)};
}

/// Sorted multiset of marked places; markings of workflow nets are sparse.
using SparseMarking = std::vector<PlaceIndex>;

SparseMarking to_sparse(const petri::Marking& m) {
  SparseMarking out;
  for (PlaceIndex p = 0; p < m.size(); ++p) out.insert(out.end(), m[p], p);
  return out;
}

struct StateKey {
  SparseMarking marking;
  std::uint32_t position;
  bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& key) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull ^ key.position;
    for (const auto p : key.marking) {
      h ^= p + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct SearchNode {
  std::uint32_t parent;
  TransitionIndex transition;
  MoveKind kind;
  double g;
  bool closed = false;
};

struct QueueEntry {
  double f;
  std::uint64_t sequence;
  std::uint32_t node;
  double g;

  bool operator>(const QueueEntry& other) const {
    return f != other.f ? f > other.f : sequence > other.sequence;
  }
};

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

bool has_silent_cycle(const PetriNet& net) {
  const auto& transitions = net.transitions();
  std::vector<std::vector<TransitionIndex>> silent_consumers(net.places().size());
  for (TransitionIndex t = 0; t < transitions.size(); ++t) {
    if (!transitions[t].silent()) continue;
    for (const auto p : transitions[t].inputs) silent_consumers[p].push_back(t);
  }
  enum class Colour { white, grey, black };
  std::vector<Colour> colour(transitions.size(), Colour::white);
  for (TransitionIndex root = 0; root < transitions.size(); ++root) {
    if (!transitions[root].silent() || colour[root] != Colour::white) continue;
    std::vector<std::pair<TransitionIndex, std::size_t>> stack{{root, 0}};
    colour[root] = Colour::grey;
    while (!stack.empty()) {
      auto& [t, next] = stack.back();
      std::vector<TransitionIndex> succ;
      for (const auto p : transitions[t].outputs) {
        succ.insert(succ.end(), silent_consumers[p].begin(), silent_consumers[p].end());
      }
      if (next < succ.size()) {
        const auto u = succ[next++];
        if (colour[u] == Colour::grey) return true;
        if (colour[u] == Colour::white) {
          colour[u] = Colour::grey;
          stack.emplace_back(u, 0);
        }
      } else {
        colour[t] = Colour::black;
        stack.pop_back();
      }
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::sync:
      return "sync";
    case MoveKind::model_silent:
      return "model_silent";
    case MoveKind::model_visible:
      return "model_visible";
    case MoveKind::log:
      return "log";
  }
  return "?";
}

void CostScheme::validate() const {
  if (sync != 0.0) throw ContractError("synchronous moves must cost 0");
  if (model_silent != 0.0) throw ContractError("silent model moves must cost 0");
  if (!(log_move > 0.0) || !(model_visible > 0.0)) {
    throw ContractError("log moves and visible model moves must cost more than 0");
  }
}

std::size_t Alignment::count(MoveKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(moves.begin(), moves.end(), [&](const Move& m) { return m.kind == kind; }));
}

std::vector<std::string> trace_labels(const Trace& trace) {
  std::vector<std::string> labels;
  labels.reserve(trace.size());
  for (const auto& event : trace.events()) labels.push_back(trimmed(event.activity));
  return labels;
}

// Aligner ----------------------------------------------------------------------

Aligner::Aligner(const PetriNet& net, CostScheme costs, AlignOptions options)
    : net_(&net), costs_(costs), options_(options) {
  costs_.validate();
  if (has_silent_cycle(net)) {
    throw ModelError("net contains a cycle of silent transitions; alignment search would not terminate");
  }
  for (const auto& label : net.visible_labels()) visible_labels_.push_back(trimmed(label));
  std::sort(visible_labels_.begin(), visible_labels_.end());
  const auto& transitions = net.transitions();
  consumers_.resize(net.places().size());
  transition_labels_.resize(transitions.size());
  for (TransitionIndex t = 0; t < transitions.size(); ++t) {
    for (const auto p : transitions[t].inputs) consumers_[p].push_back(t);
    if (transitions[t].label) transition_labels_[t] = trimmed(*transitions[t].label);
  }
  const auto model_only = search({}, std::numeric_limits<std::size_t>::max());
  min_model_cost_ = model_only.total_cost;
}

Alignment Aligner::align(const Trace& trace) const { return align(trace_labels(trace)); }

Alignment Aligner::align(std::span<const std::string> raw_labels) const {
  std::vector<std::string> labels;
  labels.reserve(raw_labels.size());
  for (const auto& label : raw_labels) labels.push_back(trimmed(label));

  Alignment result = search(labels, options_.state_budget);
  result.reference_cost = static_cast<double>(labels.size()) * costs_.log_move + min_model_cost_;
  result.trace_fitness =
      result.reference_cost > 0.0 ? std::clamp(1.0 - result.total_cost / result.reference_cost, 0.0, 1.0) : 1.0;
  verify_alignment(*net_, labels, result, costs_);
  return result;
}

Alignment Aligner::search(std::span<const std::string> labels, std::size_t state_budget) const {
  const PetriNet& net = *net_;
  const auto& transitions = net.transitions();
  const auto n = static_cast<std::uint32_t>(labels.size());


  // Lower bound on the remaining cost: events no transition can match.
  std::vector<double> h(n + 1, 0.0);
  if (options_.use_heuristic) {
    for (std::uint32_t i = n; i-- > 0;) {
      const bool unknown = !std::binary_search(visible_labels_.begin(), visible_labels_.end(), labels[i]);
      h[i] = h[i + 1] + (unknown ? costs_.log_move : 0.0);
    }
  }

  const SparseMarking goal = to_sparse(net.final_marking());
  std::vector<StateKey> keys;
  std::vector<SearchNode> nodes;
  std::unordered_map<StateKey, std::uint32_t, StateKeyHash> index;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  std::uint64_t sequence = 0;

  auto relax = [&](StateKey key, double g, std::uint32_t parent, MoveKind kind, TransitionIndex t) {
    const auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(nodes.size()));
    if (inserted) {
      if (nodes.size() >= state_budget) {
        throw ResourceError(fmt::format("alignment search exceeded its budget of {} states", state_budget),
                            state_budget);
      }
      nodes.push_back({parent, t, kind, g});
      keys.push_back(std::move(key));
    } else {
      auto& node = nodes[it->second];
      if (!(g < node.g)) return;
      node = {parent, t, kind, g, false};
    }
    const auto id = it->second;
    open.push({g + h[keys[id].position], sequence++, id, g});
  };

  relax({to_sparse(net.initial_marking()), 0}, 0.0, kNoParent, MoveKind::log, 0);

  std::vector<TransitionIndex> candidates;
  while (!open.empty()) {
    const auto entry = open.top();
    open.pop();
    auto& node = nodes[entry.node];
    if (node.closed || entry.g > node.g) continue;
    node.closed = true;
    const double g = node.g;
    const SparseMarking marking = keys[entry.node].marking;
    const std::uint32_t pos = keys[entry.node].position;

    if (pos == n && marking == goal) {
      Alignment result;
      for (auto id = entry.node; nodes[id].parent != kNoParent; id = nodes[id].parent) {
        const auto& step = nodes[id];
        Move move;
        move.kind = step.kind;
        const auto event_pos = keys[step.parent].position;
        switch (step.kind) {
          case MoveKind::sync:
            move.event_index = event_pos;
            move.transition = step.transition;
            move.label = labels[event_pos];
            move.cost = costs_.sync;
            break;
          case MoveKind::log:
            move.event_index = event_pos;
            move.label = labels[event_pos];
            move.cost = costs_.log_move;
            break;
          case MoveKind::model_visible:
            move.transition = step.transition;
            move.label = transition_labels_[step.transition];
            move.cost = costs_.model_visible;
            break;
          case MoveKind::model_silent:
            move.transition = step.transition;
            move.cost = costs_.model_silent;
            break;
        }
        result.moves.push_back(std::move(move));
      }
      std::reverse(result.moves.begin(), result.moves.end());
      result.total_cost = g;
      return result;
    }

    candidates.clear();
    for (std::size_t i = 0; i < marking.size(); ++i) {
      if (i > 0 && marking[i] == marking[i - 1]) continue;
      for (const auto t : consumers_[marking[i]]) {
        const auto& inputs = transitions[t].inputs;
        if (std::all_of(inputs.begin(), inputs.end(),
                        [&](PlaceIndex p) { return std::binary_search(marking.begin(), marking.end(), p); })) {
          candidates.push_back(t);
        }
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    auto fired = [&](TransitionIndex t) {
      SparseMarking next = marking;
      for (const auto p : transitions[t].inputs) next.erase(std::lower_bound(next.begin(), next.end(), p));
      for (const auto p : transitions[t].outputs) next.insert(std::upper_bound(next.begin(), next.end(), p), p);
      return next;
    };

    const auto id = entry.node;
    if (pos < n) {
      for (const auto t : candidates) {
        if (!transitions[t].silent() && transition_labels_[t] == labels[pos]) {
          relax({fired(t), pos + 1}, g + costs_.sync, id, MoveKind::sync, t);
        }
      }
    }
    for (const auto t : candidates) {
      if (transitions[t].silent()) relax({fired(t), pos}, g + costs_.model_silent, id, MoveKind::model_silent, t);
    }
    for (const auto t : candidates) {
      if (!transitions[t].silent()) relax({fired(t), pos}, g + costs_.model_visible, id, MoveKind::model_visible, t);
    }
    if (pos < n) relax({marking, pos + 1}, g + costs_.log_move, id, MoveKind::log, 0);
  }
  throw ModelError("final marking is unreachable from the initial marking; the net is not sound");
}

Alignment optimal_alignment(const PetriNet& net, const Trace& trace, const CostScheme& costs,
                            const AlignOptions& options) {
  return Aligner{net, costs, options}.align(trace);
}

// Verification -----------------------------------------------------------------

void verify_alignment(const PetriNet& net, std::span<const std::string> labels, const Alignment& alignment,
                      const CostScheme& costs) {
  auto fail = [](std::size_t i, const std::string& what) {
    throw ContractError(fmt::format("alignment move {}: {}", i, what));
  };
  petri::Marking marking = net.initial_marking();
  std::size_t next_event = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < alignment.moves.size(); ++i) {
    const auto& move = alignment.moves[i];
    total += move.cost;
    const bool has_event = move.event_index.has_value();
    const bool has_transition = move.transition.has_value();
    double expected_cost = 0.0;
    switch (move.kind) {
      case MoveKind::sync:
        if (!has_event || !has_transition) fail(i, "sync move needs an event and a transition");
        expected_cost = costs.sync;
        break;
      case MoveKind::log:
        if (!has_event || has_transition) fail(i, "log move must reference an event only");
        expected_cost = costs.log_move;
        break;
      case MoveKind::model_visible:
      case MoveKind::model_silent:
        if (has_event || !has_transition) fail(i, "model move must reference a transition only");
        expected_cost = move.kind == MoveKind::model_silent ? costs.model_silent : costs.model_visible;
        break;
    }
    if (move.cost != expected_cost) fail(i, "move cost does not match the cost scheme");
    if (has_event) {
      if (*move.event_index != next_event) fail(i, "events are not consumed in trace order");
      if (next_event >= labels.size()) fail(i, "event index beyond the trace");
      ++next_event;
    }
    if (has_transition) {
      if (*move.transition >= net.transitions().size()) fail(i, "unknown transition");
      const auto& t = net.transition(*move.transition);
      if ((move.kind == MoveKind::model_silent) != t.silent()) fail(i, "silent/visible kind mismatch");
      if (move.kind == MoveKind::sync &&
          (t.silent() || trimmed(*t.label) != trimmed(labels[*move.event_index]))) {
        fail(i, "sync move pairs different labels");
      }
      if (!petri::is_enabled(net, marking, *move.transition)) fail(i, fmt::format("transition '{}' not enabled", t.id));
      marking = petri::fire(net, marking, *move.transition);
    }
  }
  if (next_event != labels.size()) throw ContractError("alignment does not consume the whole trace");
  if (!petri::is_final(net, marking)) throw ContractError("model projection does not reach the final marking");
  if (std::abs(total - alignment.total_cost) > 1e-9) throw ContractError("total cost differs from the sum of moves");
}

// Log-level conformance --------------------------------------------------------

std::size_t ConformanceResult::failed_count() const {
  return static_cast<std::size_t>(
      std::count_if(per_trace.begin(), per_trace.end(), [](const TraceResult& r) { return !r.alignment; }));
}

ConformanceResult align_log(const PetriNet& net, const EventLog& log, const CostScheme& costs,
                            const AlignOptions& options, unsigned threads) {
  const Aligner aligner{net, costs, options};

  std::map<std::vector<std::string>, std::size_t> variant_slot;
  std::vector<std::vector<std::string>> variant_labels;
  std::vector<std::size_t> slot_of_trace;
  for (const auto& trace : log.traces()) {
    auto labels = trace_labels(trace);
    const auto [it, inserted] = variant_slot.try_emplace(labels, variant_labels.size());
    if (inserted) variant_labels.push_back(std::move(labels));
    slot_of_trace.push_back(it->second);
  }

  struct Outcome {
    std::optional<Alignment> alignment;
    std::string error;
  };
  std::vector<Outcome> outcomes(variant_labels.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < variant_labels.size(); i = next++) {
      try {
        outcomes[i].alignment = aligner.align(variant_labels[i]);
      } catch (const ResourceError& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, variant_labels.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  ConformanceResult result;
  result.model_labels = net.visible_labels();
  double fitness_sum = 0.0;
  double cost_sum = 0.0;
  double reference_sum = 0.0;
  std::size_t aligned = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& outcome = outcomes[slot_of_trace[i]];
    result.per_trace.push_back({log.traces()[i].case_id(), outcome.alignment, outcome.error});
    if (!outcome.alignment) continue;
    ++aligned;
    fitness_sum += outcome.alignment->trace_fitness;
    cost_sum += outcome.alignment->total_cost;
    reference_sum += outcome.alignment->reference_cost;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.log_fitness_average = aligned == 0 ? nan : fitness_sum / static_cast<double>(aligned);
  result.log_fitness_cost_based =
      aligned == 0 ? nan : (reference_sum > 0.0 ? 1.0 - cost_sum / reference_sum : 1.0);
  return result;
}

// Output -----------------------------------------------------------------------

void write_alignment_dump(const PetriNet& net, const Alignment& alignment, std::ostream& out) {
  for (const auto& move : alignment.moves) {
    out << to_string(move.kind) << '\t' << (move.kind == MoveKind::model_silent ? "tau" : move.label) << '\t';
    if (move.event_index) {
      out << *move.event_index;
    } else {
      out << '-';
    }
    out << '\t';
    if (move.transition) {
      out << net.transition(*move.transition).id;
    } else {
      out << '-';
    }
    out << '\t' << fmt::format("{}", move.cost) << '\n';
  }
}

void write_conformance_json(const PetriNet& net, const ConformanceResult& result, std::ostream& out) {
  auto number = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::ordered_json doc;
  doc["trace_count"] = result.per_trace.size();
  doc["failed_count"] = result.failed_count();
  doc["log_fitness_average"] = number(result.log_fitness_average);
  doc["log_fitness_cost_based"] = number(result.log_fitness_cost_based);
  auto& traces = doc["traces"] = nlohmann::ordered_json::array();
  for (const auto& trace : result.per_trace) {
    nlohmann::ordered_json record;
    record["case_id"] = trace.case_id;
    if (!trace.alignment) {
      record["status"] = "failed";
      record["error"] = trace.error;
      traces.push_back(std::move(record));
      continue;
    }
    const auto& a = *trace.alignment;
    record["status"] = "ok";
    record["total_cost"] = a.total_cost;
    record["reference_cost"] = a.reference_cost;
    record["fitness"] = a.trace_fitness;
    auto& moves = record["moves"] = nlohmann::ordered_json::array();
    for (const auto& move : a.moves) {
      nlohmann::ordered_json m;
      m["kind"] = to_string(move.kind);
      m["label"] = move.label;
      m["event_index"] = move.event_index ? nlohmann::ordered_json(*move.event_index) : nlohmann::ordered_json(nullptr);
      m["transition_id"] =
          move.transition ? nlohmann::ordered_json(net.transition(*move.transition).id) : nlohmann::ordered_json(nullptr);
      m["cost"] = move.cost;
      moves.push_back(std::move(m));
    }
    traces.push_back(std::move(record));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace guidecheck::alignment
