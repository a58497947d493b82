#include "guidecheck/bpmn.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "guidecheck/error.hpp"
#include "guidecheck/xml.hpp"

namespace guidecheck::bpmn {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::start_event:
      return "start_event";
    case NodeKind::end_event:
      return "end_event";
    case NodeKind::task:
      return "task";
    case NodeKind::gateway:
      return "gateway";
    case NodeKind::subprocess:
      return "subprocess";
  }
  return "?";
}

std::string_view to_string(GatewayKind kind) {
  switch (kind) {
    case GatewayKind::exclusive:
      return "XOR";
    case GatewayKind::parallel:
      return "AND";
    case GatewayKind::inclusive:
      return "OR";
  }
  return "?";
}

std::string_view to_string(Direction direction) {
  switch (direction) {
    case Direction::none:
      return "none";
    case Direction::split:
      return "split";
    case Direction::join:
      return "join";
    case Direction::invalid:
      return "invalid";
  }
  return "?";
}

const Node* Model::find(std::string_view id) const {
  const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

std::size_t Model::in_degree(std::string_view id) const {
  return static_cast<std::size_t>(
      std::count_if(flows.begin(), flows.end(), [&](const SequenceFlow& f) { return f.target == id; }));
}

std::size_t Model::out_degree(std::string_view id) const {
  return static_cast<std::size_t>(
      std::count_if(flows.begin(), flows.end(), [&](const SequenceFlow& f) { return f.source == id; }));
}

// Builder ----------------------------------------------------------------------

namespace {

Node make_node(std::string id, NodeKind kind, std::string label = {}) {
  Node node;
  node.id = std::move(id);
  node.kind = kind;
  node.label = std::move(label);
  return node;
}

}  // namespace

Builder& Builder::start(std::string id) {
  model_.nodes.push_back(make_node(std::move(id), NodeKind::start_event));
  return *this;
}

Builder& Builder::end(std::string id) {
  model_.nodes.push_back(make_node(std::move(id), NodeKind::end_event));
  return *this;
}

Builder& Builder::task(std::string id, std::string label) {
  model_.nodes.push_back(make_node(std::move(id), NodeKind::task, std::move(label)));
  return *this;
}

Builder& Builder::gateway(std::string id, GatewayKind kind) {
  Node node = make_node(std::move(id), NodeKind::gateway);
  node.gateway_kind = kind;
  model_.nodes.push_back(std::move(node));
  return *this;
}

Builder& Builder::subprocess(std::string id, Model inner, std::string label) {
  Node node = make_node(std::move(id), NodeKind::subprocess, std::move(label));
  node.children = std::make_shared<const Model>(std::move(inner));
  model_.nodes.push_back(std::move(node));
  return *this;
}

Builder& Builder::flow(std::string source, std::string target, std::string id) {
  if (id.empty()) id = fmt::format("flow_{}", model_.flows.size() + 1);
  model_.flows.push_back({std::move(id), std::move(source), std::move(target)});
  return *this;
}

Builder& Builder::warn(std::string message) {
  model_.warnings.push_back(std::move(message));
  return *this;
}

Model Builder::build() && {
  std::unordered_set<std::string> ids;
  for (const auto& node : model_.nodes) ids.insert(node.id);
  std::vector<std::string> dangling;
  for (const auto& flow : model_.flows) {
    if (!ids.contains(flow.source)) dangling.push_back(fmt::format("{} (source {})", flow.id, flow.source));
    if (!ids.contains(flow.target)) dangling.push_back(fmt::format("{} (target {})", flow.id, flow.target));
  }
  if (!dangling.empty()) {
    throw StructuralError(fmt::format("dangling sequence flow reference(s) in scope '{}': {}", model_.name,
                                      fmt::join(dangling, ", ")));
  }

  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> degree;
  for (const auto& flow : model_.flows) {
    ++degree[flow.source].second;
    ++degree[flow.target].first;
  }
  for (auto& node : model_.nodes) {
    if (node.kind != NodeKind::gateway) continue;
    const auto [in, out] = degree[node.id];
    if (in == 1 && out >= 2) {
      node.direction = Direction::split;
    } else if (in >= 2 && out == 1) {
      node.direction = Direction::join;
    } else {
      node.direction = Direction::invalid;
    }
  }
  return std::move(model_);
}

// Parsing ----------------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>> kTaskElements{"task",         "userTask",         "serviceTask",
                                                        "manualTask",   "scriptTask",       "businessRuleTask",
                                                        "sendTask",     "receiveTask"};

const std::set<std::string, std::less<>> kUnsupportedFlowNodes{
    "intermediateCatchEvent", "intermediateThrowEvent", "boundaryEvent", "complexGateway",
    "eventBasedGateway",      "callActivity",           "transaction",   "adHocSubProcess"};

const std::set<std::string, std::less<>> kSilentlyIgnored{"incoming", "outgoing", "documentation",
                                                          "extensionElements", "ioSpecification",
                                                          "property"};

std::string normalize_label(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (const char c : raw) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool has_event_definition(const xml::Element& event) {
  return std::any_of(event.children.begin(), event.children.end(), [](const xml::Element& c) {
    return c.name.size() > 15 && c.name.ends_with("EventDefinition");
  });
}

bool holds_flow_nodes(const xml::Element& process) {
  return std::any_of(process.children.begin(), process.children.end(), [](const xml::Element& c) {
    return c.ns == kNamespace && (c.name == "startEvent" || c.name == "sequenceFlow");
  });
}

Model parse_scope(const xml::Element& scope, std::string name) {
  Builder builder{std::move(name)};
  std::map<std::string, std::string, std::less<>> unsupported;  // id -> element name
  std::vector<const xml::Element*> flows;

  for (const auto& child : scope.children) {
    if (child.ns != kNamespace || kSilentlyIgnored.contains(child.name)) continue;
    const std::string id = child.attribute_or("id", "");
    const std::string& kind = child.name;
    if (kind == "sequenceFlow") {
      flows.push_back(&child);
    } else if (kind == "startEvent" || kind == "endEvent") {
      if (id.empty()) throw ParseError(fmt::format("<{}> without id", kind), child.line, child.column);
      if (has_event_definition(child)) {
        builder.warn(fmt::format("{} '{}' has an event definition; treated as a plain event", kind, id));
      }
      kind == "startEvent" ? builder.start(id) : builder.end(id);
    } else if (kTaskElements.contains(kind)) {
      if (id.empty()) throw ParseError(fmt::format("<{}> without id", kind), child.line, child.column);
      builder.task(id, normalize_label(child.attribute_or("name", "")));
    } else if (kind == "exclusiveGateway" || kind == "parallelGateway" || kind == "inclusiveGateway") {
      if (id.empty()) throw ParseError(fmt::format("<{}> without id", kind), child.line, child.column);
      const auto gateway_kind = kind == "exclusiveGateway" ? GatewayKind::exclusive
                                : kind == "parallelGateway" ? GatewayKind::parallel
                                                            : GatewayKind::inclusive;
      builder.gateway(id, gateway_kind);
    } else if (kind == "subProcess") {
      if (id.empty()) throw ParseError("<subProcess> without id", child.line, child.column);
      const std::string label = normalize_label(child.attribute_or("name", ""));
      builder.subprocess(id, parse_scope(child, label.empty() ? id : label), label);
    } else if (kUnsupportedFlowNodes.contains(kind)) {
      unsupported.emplace(id, kind);
      builder.warn(fmt::format("unsupported element <{}> '{}' ignored", kind, id));
    } else {
      builder.warn(fmt::format("unsupported element <{}>{} ignored", kind, id.empty() ? "" : " '" + id + "'"));
    }
  }

  for (const auto* flow : flows) {
    const std::string source = flow->attribute_or("sourceRef", "");
    const std::string target = flow->attribute_or("targetRef", "");
    for (const auto* end : {&source, &target}) {
      if (const auto it = unsupported.find(*end); it != unsupported.end()) {
        throw StructuralError(fmt::format("unsupported element <{}> '{}' carries sequence flow '{}'",
                                          it->second, it->first, flow->attribute_or("id", "")));
      }
    }
    builder.flow(source, target, flow->attribute_or("id", ""));
  }
  return std::move(builder).build();
}

void reject_pass_through_gateways(const Model& model) {
  for (const auto& node : model.nodes) {
    if (node.kind == NodeKind::gateway && model.in_degree(node.id) == 1 && model.out_degree(node.id) == 1) {
      throw StructuralError(
          fmt::format("gateway '{}' has one incoming and one outgoing flow (neither split nor join)", node.id));
    }
    if (node.children) reject_pass_through_gateways(*node.children);
  }
}

}  // namespace

Model parse(std::istream& in) {
  const auto root = xml::parse(in);
  if (root.ns != kNamespace) {
    throw ParseError(fmt::format("root element is not in the BPMN 2.0 namespace ({})", kNamespace), root.line,
                     root.column);
  }
  const xml::Element* chosen = nullptr;
  std::vector<std::string> notes;
  if (root.name == "process") {
    chosen = &root;
  } else {
    for (const auto& child : root.children) {
      if (child.ns != kNamespace) continue;
      if (child.name == "process" && holds_flow_nodes(child)) {
        if (chosen == nullptr) {
          chosen = &child;
        } else {
          notes.push_back(fmt::format("additional process '{}' ignored", child.attribute_or("id", "")));
        }
      } else if (child.name == "collaboration") {
        notes.push_back("collaboration (pools, message flows) ignored");
      }
    }
  }
  if (chosen == nullptr) throw ParseError("no BPMN process with flow nodes found", root.line, root.column);

  std::string name = chosen->attribute_or("name", "");
  if (name.empty()) name = root.attribute_or("name", "");
  if (name.empty()) name = chosen->attribute_or("id", "process");
  Model model = parse_scope(*chosen, normalize_label(name));
  model.warnings.insert(model.warnings.end(), notes.begin(), notes.end());
  reject_pass_through_gateways(model);
  return model;
}

Model parse(std::string_view text) {
  std::istringstream in{std::string{text}};
  return parse(in);
}

// Statistics -------------------------------------------------------------------

Stats& Stats::operator+=(const Stats& other) {
  tasks += other.tasks;
  exclusive_gateways += other.exclusive_gateways;
  parallel_gateways += other.parallel_gateways;
  inclusive_gateways += other.inclusive_gateways;
  subprocesses += other.subprocesses;
  flows += other.flows;
  return *this;
}

Stats scope_stats(const Model& model) {
  Stats s;
  s.flows = model.flows.size();
  for (const auto& node : model.nodes) {
    switch (node.kind) {
      case NodeKind::task:
        ++s.tasks;
        break;
      case NodeKind::subprocess:
        ++s.subprocesses;
        break;
      case NodeKind::gateway:
        switch (node.gateway_kind) {
          case GatewayKind::exclusive:
            ++s.exclusive_gateways;
            break;
          case GatewayKind::parallel:
            ++s.parallel_gateways;
            break;
          case GatewayKind::inclusive:
            ++s.inclusive_gateways;
            break;
        }
        break;
      default:
        break;
    }
  }
  return s;
}

Stats stats(const Model& model) {
  Stats s = scope_stats(model);
  for (const auto& node : model.nodes) {
    if (node.children) s += stats(*node.children);
  }
  return s;
}

// Validation -------------------------------------------------------------------

namespace {

void validate_scope(const Model& model, const std::string& scope_id, std::vector<Diagnostic>& diagnostics) {
  auto error = [&](std::string id, std::string message) {
    diagnostics.push_back({Severity::error, std::move(id), std::move(message)});
  };

  std::unordered_set<std::string> ids;
  for (const auto& node : model.nodes) {
    if (!ids.insert(node.id).second) error(node.id, fmt::format("duplicate node id '{}'", node.id));
  }
  for (const auto& flow : model.flows) {
    if (!ids.contains(flow.source) || !ids.contains(flow.target)) {
      error(flow.id, fmt::format("sequence flow '{}' references a node outside scope '{}'", flow.id, scope_id));
    }
  }

  const auto starts = std::count_if(model.nodes.begin(), model.nodes.end(),
                                    [](const Node& n) { return n.kind == NodeKind::start_event; });
  const auto ends = std::count_if(model.nodes.begin(), model.nodes.end(),
                                  [](const Node& n) { return n.kind == NodeKind::end_event; });
  if (starts != 1) error(scope_id, fmt::format("scope '{}' has {} start events (expected 1)", scope_id, starts));
  if (ends < 1) error(scope_id, fmt::format("scope '{}' has no end event", scope_id));

  std::unordered_map<std::string, std::vector<std::string>> succ;
  std::unordered_map<std::string, std::vector<std::string>> pred;
  for (const auto& flow : model.flows) {
    succ[flow.source].push_back(flow.target);
    pred[flow.target].push_back(flow.source);
  }
  auto sweep = [](const std::vector<std::string>& seeds, auto& edges) {
    std::unordered_set<std::string> seen(seeds.begin(), seeds.end());
    std::deque<std::string> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const auto id = queue.front();
      queue.pop_front();
      for (const auto& next : edges[id]) {
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
    return seen;
  };
  std::vector<std::string> start_ids;
  std::vector<std::string> end_ids;
  for (const auto& node : model.nodes) {
    if (node.kind == NodeKind::start_event) start_ids.push_back(node.id);
    if (node.kind == NodeKind::end_event) end_ids.push_back(node.id);
  }
  const auto reachable = sweep(start_ids, succ);
  const auto coreachable = sweep(end_ids, pred);

  for (const auto& node : model.nodes) {
    const std::size_t in = model.in_degree(node.id);
    const std::size_t out = model.out_degree(node.id);
    std::string problem;
    switch (node.kind) {
      case NodeKind::start_event:
        if (in != 0 || out != 1) problem = fmt::format("start event needs 0 incoming / 1 outgoing flow, has {}/{}", in, out);
        break;
      case NodeKind::end_event:
        if (in != 1 || out != 0) problem = fmt::format("end event needs 1 incoming / 0 outgoing flow, has {}/{}", in, out);
        break;
      case NodeKind::task:
      case NodeKind::subprocess:
        if (node.kind == NodeKind::task && node.label.empty()) {
          problem = "task has an empty label";
        } else if (out > 1) {
          problem = fmt::format("{} '{}' has {} outgoing flows; implicit splits need an explicit gateway",
                                to_string(node.kind), node.id, out);
        } else if (in > 1) {
          problem = fmt::format("{} '{}' has {} incoming flows; implicit merges need an explicit gateway",
                                to_string(node.kind), node.id, in);
        } else if (in == 0 || out == 0) {
          problem = fmt::format("{} '{}' has {} incoming / {} outgoing flows (expected 1/1)", to_string(node.kind),
                                node.id, in, out);
        } else if (node.kind == NodeKind::subprocess && !node.children) {
          problem = fmt::format("sub-process '{}' has no content", node.id);
        }
        break;
      case NodeKind::gateway:
        if (in >= 2 && out >= 2) {
          problem = fmt::format("mixed gateway '{}' ({} in, {} out): split and join must be separate", node.id, in, out);
        } else if (in == 1 && out == 1) {
          problem = fmt::format("gateway '{}' has one incoming and one outgoing flow", node.id);
        } else if (in == 0 || out == 0) {
          problem = fmt::format("gateway '{}' has {} incoming / {} outgoing flows", node.id, in, out);
        }
        break;
    }
    if (problem.empty() && (!reachable.contains(node.id) || !coreachable.contains(node.id))) {
      problem = fmt::format("{} '{}' is not on a path from the start event to an end event", to_string(node.kind),
                            node.id);
    }
    if (!problem.empty()) error(node.id, std::move(problem));
    if (node.children) validate_scope(*node.children, node.id, diagnostics);
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Model& model) {
  std::vector<Diagnostic> out;
  validate_scope(model, model.name.empty() ? "process" : model.name, out);
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

}  // namespace guidecheck::bpmn
