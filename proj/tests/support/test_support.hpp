#pragma once

#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "guidecheck/bpmn.hpp"
#include "guidecheck/event_log.hpp"
#include "guidecheck/petri.hpp"
#include "guidecheck/random.hpp"

namespace guidecheck::testing {

inline std::filesystem::path data_dir() { return GUIDECHECK_DATA_DIR; }

inline std::filesystem::path stakob_path() { return data_dir() / "stakob" / "stakob_covid19.bpmn"; }

inline bpmn::Model load_stakob() {
  std::ifstream in{stakob_path()};
  if (!in) throw std::runtime_error("missing fixture " + stakob_path().string());
  return bpmn::parse(in);
}

inline const petri::PetriNet& stakob_net() {
  static const petri::PetriNet net = petri::compile(load_stakob());
  return net;
}

/// start -> labels[0] -> ... -> end
inline petri::PetriNet sequence_net(const std::vector<std::string>& labels) {
  bpmn::Builder b;
  b.start("s").end("e");
  std::string previous = "s";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = fmt::format("t{}", i);
    b.task(id, labels[i]).flow(previous, id);
    previous = id;
  }
  b.flow(previous, "e");
  return petri::compile(std::move(b).build());
}

/// start -> gateway split over one task per label -> join -> end
inline petri::PetriNet choice_net(bpmn::GatewayKind kind, const std::vector<std::string>& labels) {
  bpmn::Builder b;
  b.start("s").end("e").gateway("split", kind).gateway("join", kind).flow("s", "split").flow("join", "e");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = fmt::format("t{}", i);
    b.task(id, labels[i]).flow("split", id).flow(id, "join");
  }
  return petri::compile(std::move(b).build());
}

inline Trace make_trace(const std::string& case_id, const std::vector<std::string>& labels,
                        Date first = Date{std::chrono::year{2020} / 3 / 1}) {
  std::vector<Event> events;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    events.push_back({case_id, labels[i], first + std::chrono::days{static_cast<long>(i)}, i});
  }
  return Trace{case_id, std::move(events)};
}

inline EventLog playout_log(const petri::PetriNet& net, std::size_t n, std::uint64_t seed,
                            std::size_t max_steps = 500) {
  std::vector<Trace> traces;
  for (std::size_t i = 0; i < n; ++i) {
    auto result = petri::random_playout(net, mix_seed(seed, i), max_steps, fmt::format("case_{:04}", i + 1));
    if (auto* trace = std::get_if<Trace>(&result)) traces.push_back(std::move(*trace));
  }
  return EventLog{"playout", std::move(traces)};
}

/// Random block-structured BPMN models: sequences, XOR (possibly with one empty
/// branch), AND, two-branch OR and loops whose body always holds a task.
class RandomModelGenerator {
 public:
  explicit RandomModelGenerator(std::uint64_t seed, std::vector<std::string> alphabet = {"a", "b", "c", "d", "e"})
      : rng_(seed), alphabet_(std::move(alphabet)) {}

  bpmn::Model generate(int depth = 3) {
    bpmn::Builder b;
    counter_ = 0;
    b.start("start").end("end");
    const auto [first, last] = block(b, depth, false);
    b.flow("start", first).flow(last, "end");
    return std::move(b).build();
  }

  /// Retries until the compiled net has between 1 and max_transitions transitions.
  std::pair<bpmn::Model, petri::PetriNet> generate_small(std::size_t max_transitions, int depth = 3,
                                                         std::size_t min_transitions = 4) {
    for (;;) {
      auto model = generate(depth);
      auto net = petri::compile(model);
      const auto n = net.transitions().size();
      if (n >= min_transitions && n <= max_transitions) return {std::move(model), std::move(net)};
    }
  }

 private:
  using Span = std::pair<std::string, std::string>;

  std::string fresh(const char* prefix) { return fmt::format("{}{}", prefix, counter_++); }

  Span task(bpmn::Builder& b) {
    const auto id = fresh("t");
    b.task(id, alphabet_[rng_.below(alphabet_.size())]);
    return {id, id};
  }

  Span block(bpmn::Builder& b, int depth, bool in_loop) {
    if (depth <= 0) return task(b);
    switch (rng_.below(6)) {
      case 0:
        return task(b);
      case 1: {
        const auto first = block(b, depth - 1, in_loop);
        const auto second = block(b, depth - 1, in_loop);
        b.flow(first.second, second.first);
        return {first.first, second.second};
      }
      case 2:
      case 3: {
        const auto kind = rng_.below(2) == 0 ? bpmn::GatewayKind::exclusive : bpmn::GatewayKind::parallel;
        const auto split = fresh("g");
        const auto join = fresh("g");
        b.gateway(split, kind).gateway(join, kind);
        const std::size_t k = 2 + rng_.below(2);
        for (std::size_t i = 0; i < k; ++i) {
          if (kind == bpmn::GatewayKind::exclusive && i == 0 && !in_loop && rng_.below(3) == 0) {
            b.flow(split, join);
            continue;
          }
          const auto branch = block(b, depth - 1, in_loop);
          b.flow(split, branch.first).flow(branch.second, join);
        }
        return {split, join};
      }
      case 4: {
        const auto split = fresh("g");
        const auto join = fresh("g");
        b.gateway(split, bpmn::GatewayKind::inclusive).gateway(join, bpmn::GatewayKind::inclusive);
        for (int i = 0; i < 2; ++i) {
          const auto branch = block(b, depth - 1, in_loop);
          b.flow(split, branch.first).flow(branch.second, join);
        }
        return {split, join};
      }
      default: {
        const auto entry = fresh("g");
        const auto exit = fresh("g");
        b.gateway(entry, bpmn::GatewayKind::exclusive).gateway(exit, bpmn::GatewayKind::exclusive);
        const auto body = block(b, depth - 1, true);
        b.flow(entry, body.first).flow(body.second, exit).flow(exit, entry);
        return {entry, exit};
      }
    }
  }

  Rng rng_;
  std::vector<std::string> alphabet_;
  int counter_ = 0;
};

}  // namespace guidecheck::testing
