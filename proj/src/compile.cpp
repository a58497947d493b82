#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "guidecheck/error.hpp"
#include "guidecheck/petri.hpp"

namespace guidecheck::petri {

namespace {

using bpmn::Direction;
using bpmn::GatewayKind;
using bpmn::NodeKind;

/// Flow-level view of one scope: node adjacency by flow index.
struct ScopeGraph {
  const bpmn::Model& model;
  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<std::vector<std::size_t>> in_flows;
  std::vector<std::vector<std::size_t>> out_flows;

  explicit ScopeGraph(const bpmn::Model& m) : model(m), in_flows(m.nodes.size()), out_flows(m.nodes.size()) {
    for (std::size_t i = 0; i < m.nodes.size(); ++i) index.emplace(m.nodes[i].id, i);
    for (std::size_t f = 0; f < m.flows.size(); ++f) {
      out_flows[index.at(m.flows[f].source)].push_back(f);
      in_flows[index.at(m.flows[f].target)].push_back(f);
    }
  }

  std::size_t source_of(std::size_t flow) const { return index.at(model.flows[flow].source); }
  std::size_t target_of(std::size_t flow) const { return index.at(model.flows[flow].target); }
  std::size_t size() const { return model.nodes.size(); }
};

/// Post-dominator sets over nodes plus a virtual exit (index = size()) fed by end events.
std::vector<std::vector<bool>> post_dominators(const ScopeGraph& g) {
  const std::size_t n = g.size();
  const std::size_t exit = n;
  std::vector<std::vector<bool>> pdom(n + 1, std::vector<bool>(n + 1, true));
  pdom[exit].assign(n + 1, false);
  pdom[exit][exit] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<bool> next(n + 1, true);
      std::vector<std::size_t> succ;
      for (const auto f : g.out_flows[v]) succ.push_back(g.target_of(f));
      if (g.model.nodes[v].kind == NodeKind::end_event) succ.push_back(exit);
      if (succ.empty()) next.assign(n + 1, false);
      for (const auto s : succ) {
        for (std::size_t k = 0; k <= n; ++k) next[k] = next[k] && pdom[s][k];
      }
      next[v] = true;
      if (next != pdom[v]) {
        pdom[v] = std::move(next);
        changed = true;
      }
    }
  }
  return pdom;
}

std::optional<std::size_t> immediate_post_dominator(const std::vector<std::vector<bool>>& pdom, std::size_t v) {
  const auto count = [](const std::vector<bool>& s) { return std::count(s.begin(), s.end(), true); };
  const auto own = count(pdom[v]);
  for (std::size_t d = 0; d < pdom.size(); ++d) {
    if (d != v && pdom[v][d] && count(pdom[d]) == own - 1) return d;
  }
  return std::nullopt;
}

class Compiler {
 public:
  Compiler(PetriNet& net, const CompileOptions& options) : net_(net), options_(options) {}

  void compile_scope(const bpmn::Model& scope, PlaceIndex entry, PlaceIndex exit) {
    const ScopeGraph g{scope};
    std::vector<PlaceIndex> place(scope.flows.size(), 0);
    std::vector<bool> assigned(scope.flows.size(), false);

    std::vector<std::size_t> ends;
    for (std::size_t v = 0; v < g.size(); ++v) {
      const auto& node = scope.nodes[v];
      if (node.kind == NodeKind::start_event) {
        place[g.out_flows[v].at(0)] = entry;
        assigned[g.out_flows[v][0]] = true;
      } else if (node.kind == NodeKind::end_event) {
        ends.push_back(v);
      }
    }
    if (ends.size() == 1 && !assigned[g.in_flows[ends[0]].at(0)]) {
      place[g.in_flows[ends[0]][0]] = exit;
      assigned[g.in_flows[ends[0]][0]] = true;
    }
    for (std::size_t f = 0; f < scope.flows.size(); ++f) {
      if (!assigned[f]) place[f] = net_.add_place(fmt::format("p{}", net_.places().size()), scope.flows[f].id);
    }

    auto places_of = [&](const std::vector<std::size_t>& flows) {
      std::vector<PlaceIndex> out;
      for (const auto f : flows) out.push_back(place[f]);
      return out;
    };

    const auto pdom = post_dominators(g);
    std::unordered_set<std::size_t> matched_or_joins;

    for (std::size_t v = 0; v < g.size(); ++v) {
      const auto& node = scope.nodes[v];
      switch (node.kind) {
        case NodeKind::start_event:
          break;
        case NodeKind::end_event:
          if (place[g.in_flows[v][0]] != exit) silent({place[g.in_flows[v][0]]}, {exit});
          break;
        case NodeKind::task: {
          const auto t = net_.add_transition(unique_transition_id("t_" + node.id), node.label);
          net_.add_input_arc(place[g.in_flows[v][0]], t);
          net_.add_output_arc(t, place[g.out_flows[v][0]]);
          break;
        }
        case NodeKind::subprocess:
          compile_scope(*node.children, place[g.in_flows[v][0]], place[g.out_flows[v][0]]);
          break;
        case NodeKind::gateway:
          if (node.direction != Direction::split && node.direction != Direction::join) {
            throw CompilationError(fmt::format("gateway '{}' is neither a split nor a join", node.id));
          }
          switch (node.gateway_kind) {
            case GatewayKind::exclusive:
              for (const auto in : g.in_flows[v]) {
                for (const auto out : g.out_flows[v]) silent({place[in]}, {place[out]});
              }
              break;
            case GatewayKind::parallel:
              silent(places_of(g.in_flows[v]), places_of(g.out_flows[v]));
              break;
            case GatewayKind::inclusive:
              if (node.direction == Direction::split) {
                const auto join = compile_inclusive_block(g, pdom, v, place);
                if (!matched_or_joins.insert(join).second) {
                  throw CompilationError(
                      fmt::format("inclusive join '{}' is matched by more than one split", scope.nodes[join].id));
                }
              }
              break;
          }
          break;
      }
    }

    for (std::size_t v = 0; v < g.size(); ++v) {
      const auto& node = scope.nodes[v];
      if (node.kind == NodeKind::gateway && node.gateway_kind == GatewayKind::inclusive &&
          node.direction == Direction::join && !matched_or_joins.contains(v)) {
        throw CompilationError(fmt::format(
            "inclusive join '{}' has no block-structured matching inclusive split", node.id));
      }
    }
  }

 private:
  TransitionIndex silent(const std::vector<PlaceIndex>& inputs, const std::vector<PlaceIndex>& outputs) {
    const auto t = net_.add_transition(fmt::format("tau_{}", silent_count_++), std::nullopt);
    for (const auto p : inputs) net_.add_input_arc(p, t);
    for (const auto p : outputs) net_.add_output_arc(t, p);
    return t;
  }

  std::string unique_transition_id(std::string id) {
    if (!net_.find_transition(id)) return id;
    for (std::size_t k = 2;; ++k) {
      auto candidate = fmt::format("{}_{}", id, k);
      if (!net_.find_transition(candidate)) return candidate;
    }
  }

  /// Emits both sides of an inclusive split/join block; returns the join node.
  std::size_t compile_inclusive_block(const ScopeGraph& g, const std::vector<std::vector<bool>>& pdom,
                                      std::size_t split, const std::vector<PlaceIndex>& place) {
    const auto& split_node = g.model.nodes[split];
    const auto& branches = g.out_flows[split];
    const std::size_t k = branches.size();
    if (k > options_.max_inclusive_branches) {
      throw CompilationError(fmt::format(
          "inclusive split '{}' has {} branches; at most {} are supported (2^k-1 subset expansion guard)",
          split_node.id, k, options_.max_inclusive_branches));
    }
    const auto no_join = [&] {
      return CompilationError(fmt::format(
          "inclusive split '{}' is not closed by a block-structured matching inclusive join", split_node.id));
    };
    const auto join_opt = immediate_post_dominator(pdom, split);
    if (!join_opt || *join_opt >= g.size()) throw no_join();
    const std::size_t join = *join_opt;
    const auto& join_node = g.model.nodes[join];
    if (join_node.kind != NodeKind::gateway || join_node.gateway_kind != GatewayKind::inclusive ||
        join_node.direction != Direction::join || g.in_flows[join].size() != k) {
      throw no_join();
    }

    // Each branch must reach exactly one join input, and no two branches the same one.
    std::vector<std::size_t> join_input_of(k);
    std::unordered_set<std::size_t> used;
    for (std::size_t b = 0; b < k; ++b) {
      std::unordered_set<std::size_t> reached_inputs;
      if (g.target_of(branches[b]) == join) {
        reached_inputs.insert(branches[b]);
      } else {
        std::vector<std::size_t> stack{g.target_of(branches[b])};
        std::unordered_set<std::size_t> seen{stack.back()};
        while (!stack.empty()) {
          const auto v = stack.back();
          stack.pop_back();
          for (const auto f : g.out_flows[v]) {
            const auto w = g.target_of(f);
            if (w == join) {
              reached_inputs.insert(f);
            } else if (w != split && seen.insert(w).second) {
              stack.push_back(w);
            }
          }
        }
      }
      if (reached_inputs.size() != 1 || !used.insert(*reached_inputs.begin()).second) throw no_join();
      join_input_of[b] = *reached_inputs.begin();
    }
    // Join inputs must not be reachable from outside the block.
    for (const auto f : g.in_flows[join]) {
      std::vector<std::size_t> stack{g.source_of(f)};
      std::unordered_set<std::size_t> seen{stack.back()};
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        if (g.model.nodes[v].kind == NodeKind::start_event) throw no_join();
        for (const auto in : g.in_flows[v]) {
          const auto u = g.source_of(in);
          if (u != split && seen.insert(u).second) stack.push_back(u);
        }
      }
    }

    const PlaceIndex split_input = place[g.in_flows[split][0]];
    const PlaceIndex join_output = place[g.out_flows[join][0]];
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
      const auto memory = net_.add_place(fmt::format("p{}", net_.places().size()),
                                         fmt::format("{}/{}", split_node.id, mask));
      std::vector<PlaceIndex> fork_outputs{memory};
      std::vector<PlaceIndex> join_inputs{memory};
      for (std::size_t b = 0; b < k; ++b) {
        if (mask & (1u << b)) {
          fork_outputs.push_back(place[branches[b]]);
          join_inputs.push_back(place[join_input_of[b]]);
        }
      }
      silent({split_input}, fork_outputs);
      silent(join_inputs, {join_output});
    }
    return join;
  }

  PetriNet& net_;
  const CompileOptions& options_;
  std::size_t silent_count_ = 0;
};

}  // namespace

PetriNet compile(const bpmn::Model& model, const CompileOptions& options) {
  const auto diagnostics = bpmn::validate(model);
  if (bpmn::has_errors(diagnostics)) {
    std::vector<std::string> messages;
    for (const auto& d : diagnostics) {
      if (d.severity == bpmn::Severity::error) messages.push_back(d.message);
    }
    throw CompilationError(fmt::format("model is not valid: {}", fmt::join(messages, "; ")));
  }

  PetriNet net;
  const auto source = net.add_place("source", "source");
  const auto sink = net.add_place("sink", "sink");
  Compiler{net, options}.compile_scope(model, source, sink);

  Marking initial = net.empty_marking();
  initial.add(source);
  Marking final_marking = net.empty_marking();
  final_marking.add(sink);
  net.set_initial_marking(std::move(initial));
  net.set_final_marking(std::move(final_marking));
  return net;
}

}  // namespace guidecheck::petri
