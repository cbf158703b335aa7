#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "manip/common.hpp"

namespace manip::dsl {

enum class Primitive {
  Grasp,
  MoveGraspedObject,
  RotateGraspedObject,
  PushDown,
  PushForward,
  Release,
};

const char* primitive_name(Primitive p);

enum class Direction { Up, Down, Forward, Out };

const char* direction_name(Direction d);
std::optional<Direction> direction_from_string(const std::string& word);

/// A free-text object description, a reference to a previously bound
/// variable, or one of the closed direction words.
struct TextQuery {
  std::string text;
  bool operator==(const TextQuery&) const = default;
};
struct VarRef {
  std::string name;
  bool operator==(const VarRef&) const = default;
};
using ObjectRef = std::variant<TextQuery, VarRef, Direction>;

struct PlanStep {
  Primitive primitive = Primitive::Release;
  std::optional<ObjectRef> object;
  std::optional<ObjectRef> target;
  std::vector<std::string> exclusions;  // from not=[...]
  std::optional<std::string> binds;     // left-hand side of the assignment
  int line = 0;
};

struct Plan {
  std::string query;
  std::vector<PlanStep> steps;
};

/// Positioned parse failure (1-based line/column).
class ParseError : public Error {
public:
  ParseError(ErrorCode code, int line, int column, const std::string& what)
      : Error(code, what), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

struct Violation {
  int step = 0;  // 0-based step index
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// A step with variable references resolved to the index of the step that
/// bound them; what the episode runner consumes.
struct StepRef {
  int step_index = 0;
};
using ResolvedRef = std::variant<TextQuery, StepRef, Direction>;

struct ResolvedStep {
  Primitive primitive = Primitive::Release;
  std::optional<ResolvedRef> object;
  std::optional<ResolvedRef> target;
  std::vector<int> exclusion_steps;  // indices of the binding steps to exclude
  bool binds = false;
};

/// Parse the planner output format: optional `# query: ...` comment, then
/// `var = primitive(kwargs)` or `primitive(kwargs)` lines. Throws ParseError.
Plan parse_plan(const std::string& source);

/// Simulate the gripper state machine and variable scoping; violations are
/// report entries, never exceptions.
ValidationReport validate_plan(const Plan& plan);

/// Resolve variables to binding steps. Throws UnvalidatedPlan when the plan
/// has violations.
std::vector<ResolvedStep> lower_plan(const Plan& plan);

/// Canonical text form; parse(format(p)) is structurally equal to p.
std::string format_plan(const Plan& plan);

bool plans_equal(const Plan& a, const Plan& b);

}  // namespace manip::dsl
