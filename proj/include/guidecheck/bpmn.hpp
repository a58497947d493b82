#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace guidecheck::bpmn {

inline constexpr std::string_view kNamespace = "http://www.omg.org/spec/BPMN/20100524/MODEL";

enum class NodeKind { start_event, end_event, task, gateway, subprocess };
enum class GatewayKind { exclusive, parallel, inclusive };
/// Inferred from arc degrees: split (in=1, out>=2), join (in>=2, out=1);
/// anything else is `invalid` and reported by validate().
enum class Direction { none, split, join, invalid };

std::string_view to_string(NodeKind kind);
std::string_view to_string(GatewayKind kind);
std::string_view to_string(Direction direction);

struct Model;

struct Node {
  std::string id;
  NodeKind kind = NodeKind::task;
  std::string label;
  GatewayKind gateway_kind = GatewayKind::exclusive;  // meaningful for gateways only
  Direction direction = Direction::none;              // meaningful for gateways only
  std::shared_ptr<const Model> children;              // set for sub-processes
};

struct SequenceFlow {
  std::string id;
  std::string source;
  std::string target;
};

/// One process or sub-process scope. Immutable once built.
struct Model {
  std::string name;
  std::vector<Node> nodes;
  std::vector<SequenceFlow> flows;
  std::vector<std::string> warnings;  // unsupported content that was skipped

  const Node* find(std::string_view id) const;
  std::size_t in_degree(std::string_view id) const;
  std::size_t out_degree(std::string_view id) const;
};

/// Assembles a Model scope; build() infers gateway directions and rejects
/// dangling flow references with StructuralError.
class Builder {
 public:
  explicit Builder(std::string name = {}) { model_.name = std::move(name); }

  Builder& start(std::string id);
  Builder& end(std::string id);
  Builder& task(std::string id, std::string label);
  Builder& gateway(std::string id, GatewayKind kind);
  Builder& subprocess(std::string id, Model inner, std::string label = {});
  Builder& flow(std::string source, std::string target, std::string id = {});
  Builder& warn(std::string message);

  Model build() &&;

 private:
  Model model_;
};

/// Parses the supported BPMN 2.0 subset from the first process holding flow
/// nodes. Throws ParseError (malformed XML, missing process) or
/// StructuralError (dangling flow, pass-through gateway, unsupported element
/// carrying sequence flow).
Model parse(std::istream& in);
Model parse(std::string_view text);

struct Stats {
  std::size_t tasks = 0;
  std::size_t exclusive_gateways = 0;
  std::size_t parallel_gateways = 0;
  std::size_t inclusive_gateways = 0;
  std::size_t subprocesses = 0;
  std::size_t flows = 0;

  std::size_t gateways() const noexcept {
    return exclusive_gateways + parallel_gateways + inclusive_gateways;
  }
  Stats& operator+=(const Stats& other);
  bool operator==(const Stats&) const = default;
};

/// Counts over all nesting levels.
Stats stats(const Model& model);
/// Counts of this scope only.
Stats scope_stats(const Model& model);

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string element_id;
  std::string message;
};

/// Empty iff every scope has one start event, at least one end event, valid
/// node degrees and labels, and every node lies on a start-to-end path.
std::vector<Diagnostic> validate(const Model& model);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace guidecheck::bpmn
