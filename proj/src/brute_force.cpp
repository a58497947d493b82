#include <fmt/format.h>

#include <limits>
#include <unordered_map>

#include "guidecheck/alignment.hpp"
#include "guidecheck/error.hpp"

namespace guidecheck::alignment {

namespace {

struct Key {
  petri::Marking marking;
  std::size_t position;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept { return petri::MarkingHash{}(k.marking) * 31 + k.position; }
};

class Enumerator {
 public:
  Enumerator(const petri::PetriNet& net, std::vector<std::string> labels, const CostScheme& costs,
             std::size_t depth_bound)
      : net_(net), labels_(std::move(labels)), costs_(costs), depth_bound_(depth_bound) {}

  std::optional<Alignment> run() {
    visit(net_.initial_marking(), 0, 0.0);
    return best_;
  }

 private:
  void visit(const petri::Marking& m, std::size_t pos, double cost) {
    if (best_ && cost >= best_->total_cost) return;
    if (pos == labels_.size() && petri::is_final(net_, m)) {
      best_ = Alignment{path_, cost, 1.0, 0.0};
      return;
    }
    if (path_.size() == depth_bound_) return;

    // Skip states already explored at no higher cost with at least as much depth left.
    auto& seen = memo_[Key{m, pos}];
    for (const auto& [c, d] : seen) {
      if (c <= cost && d <= path_.size()) return;
    }
    seen.emplace_back(cost, path_.size());

    for (const auto t : petri::enabled(net_, m)) {
      const auto& tr = net_.transition(t);
      const auto next = petri::fire(net_, m, t);
      if (tr.silent()) {
        step({MoveKind::model_silent, std::nullopt, t, {}, costs_.model_silent}, next, pos, cost);
        continue;
      }
      if (pos < labels_.size() && *tr.label == labels_[pos]) {
        step({MoveKind::sync, pos, t, labels_[pos], costs_.sync}, next, pos + 1, cost);
      }
      step({MoveKind::model_visible, std::nullopt, t, *tr.label, costs_.model_visible}, next, pos, cost);
    }
    if (pos < labels_.size()) {
      step({MoveKind::log, pos, std::nullopt, labels_[pos], costs_.log_move}, m, pos + 1, cost);
    }
  }

  void step(Move move, const petri::Marking& next, std::size_t pos, double cost) {
    const double c = cost + move.cost;
    path_.push_back(std::move(move));
    visit(next, pos, c);
    path_.pop_back();
  }

  const petri::PetriNet& net_;
  std::vector<std::string> labels_;
  CostScheme costs_;
  std::size_t depth_bound_;
  std::vector<Move> path_;
  std::optional<Alignment> best_;
  std::unordered_map<Key, std::vector<std::pair<double, std::size_t>>, KeyHash> memo_;
};

}  // namespace

Alignment brute_force_alignment(const petri::PetriNet& net, const Trace& trace, const CostScheme& costs,
                                std::size_t depth_bound) {
  costs.validate();
  auto best = Enumerator{net, trace_labels(trace), costs, depth_bound}.run();
  if (!best) {
    throw OracleInconclusive(fmt::format("no complete alignment of at most {} moves exists", depth_bound));
  }
  return *best;
}

}  // namespace guidecheck::alignment
