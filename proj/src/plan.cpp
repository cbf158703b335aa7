#include "manip/plan.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace manip::dsl {

const char* primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Grasp: return "grasp";
    case Primitive::MoveGraspedObject: return "move_grasped_object";
    case Primitive::RotateGraspedObject: return "rotate_grasped_object";
    case Primitive::PushDown: return "push_down";
    case Primitive::PushForward: return "push_forward";
    case Primitive::Release: return "release";
  }
  return "?";
}

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Forward: return "forward";
    case Direction::Out: return "out";
  }
  return "?";
}

std::optional<Direction> direction_from_string(const std::string& word) {
  if (word == "up") return Direction::Up;
  if (word == "down") return Direction::Down;
  if (word == "forward") return Direction::Forward;
  if (word == "out") return Direction::Out;
  return std::nullopt;
}

namespace {

std::optional<Primitive> primitive_from_string(const std::string& word) {
  static const std::unordered_map<std::string, Primitive> table = {
      {"grasp", Primitive::Grasp},
      {"move_grasped_object", Primitive::MoveGraspedObject},
      {"rotate_grasped_object", Primitive::RotateGraspedObject},
      {"push_down", Primitive::PushDown},
      {"push_forward", Primitive::PushForward},
      {"release", Primitive::Release},
  };
  auto it = table.find(word);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// Line-oriented recursive-descent parser over a single statement.
class LineParser {
public:
  LineParser(const std::string& text, int line_no) : text_(text), line_(line_no) {}

  [[noreturn]] void fail(ErrorCode code, const std::string& what) const {
    throw ParseError(code, line_, int(pos_) + 1,
                     "line " + std::to_string(line_) + ":" + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(ErrorCode::Syntax, std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ >= text_.size() || !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      fail(ErrorCode::Syntax, "expected identifier");
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string quoted_string() {
    // opening quote already consumed by caller check
    ++pos_;
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == '"') return out;
      out.push_back(c);
    }
    fail(ErrorCode::UnterminatedString, "unterminated string literal");
  }

  ObjectRef value() {
    skip_ws();
    if (peek() == '"') {
      std::size_t quote_pos = pos_;
      std::string text = quoted_string();
      if (text.empty()) {
        pos_ = quote_pos;
        fail(ErrorCode::Syntax, "empty string query");
      }
      if (auto dir = direction_from_string(text)) return *dir;
      return TextQuery{text};
    }
    if (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_') {
      std::string word = identifier();
      if (auto dir = direction_from_string(word)) return *dir;
      return VarRef{word};
    }
    fail(ErrorCode::Syntax, "expected quoted text, identifier, or direction");
  }

  PlanStep statement() {
    PlanStep step;
    step.line = line_;
    std::string first = identifier();
    skip_ws();
    std::string callee = first;
    if (peek() == '=') {
      ++pos_;
      step.binds = first;
      callee = identifier();
    }
    auto prim = primitive_from_string(callee);
    if (!prim) fail(ErrorCode::UnknownPrimitive, "unknown primitive '" + callee + "'");
    step.primitive = *prim;
    expect('(');
    bool first_arg = true;
    while (!accept(')')) {
      if (!first_arg) {
        expect(',');
        skip_ws();
      }
      first_arg = false;
      std::string kw = identifier();
      expect('=');
      if (kw == "object") {
        if (step.object) fail(ErrorCode::BadKeyword, "duplicate keyword 'object'");
        step.object = value();
      } else if (kw == "target") {
        if (step.target) fail(ErrorCode::BadKeyword, "duplicate keyword 'target'");
        step.target = value();
      } else if (kw == "not") {
        expect('[');
        if (!accept(']')) {
          while (true) {
            step.exclusions.push_back(identifier());
            if (accept(']')) break;
            expect(',');
          }
        }
      } else {
        fail(ErrorCode::BadKeyword, "unknown keyword '" + kw + "' (expected object, target, not)");
      }
    }
    if (!at_end()) fail(ErrorCode::Syntax, "trailing characters after statement");
    return step;
  }

private:
  const std::string& text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string render_ref(const ObjectRef& ref) {
  if (const auto* q = std::get_if<TextQuery>(&ref)) return "\"" + q->text + "\"";
  if (const auto* v = std::get_if<VarRef>(&ref)) return v->name;
  return "\"" + std::string(direction_name(std::get<Direction>(ref))) + "\"";
}

}  // namespace

Plan parse_plan(const std::string& source) {
  Plan plan;
  std::istringstream in(source);
  std::string raw;
  int line_no = 0;
  bool have_query = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = strip(line.substr(1));
      if (!have_query && body.rfind("query:", 0) == 0) {
        plan.query = strip(body.substr(6));
        have_query = true;
      }
      continue;
    }
    LineParser parser(line, line_no);
    plan.steps.push_back(parser.statement());
  }
  return plan;
}

namespace {

struct Arity {
  bool object_required;
  bool object_allowed;
  bool target_required;
  bool target_allowed;
};

Arity arity_for(Primitive p) {
  switch (p) {
    case Primitive::Grasp: return {true, true, false, false};
    case Primitive::MoveGraspedObject: return {false, false, true, true};
    case Primitive::RotateGraspedObject: return {false, false, false, false};
    case Primitive::PushDown: return {true, true, false, false};
    case Primitive::PushForward: return {true, true, false, true};
    case Primitive::Release: return {false, false, false, false};
  }
  return {};
}

}  // namespace

ValidationReport validate_plan(const Plan& plan) {
  ValidationReport report;
  auto violate = [&](int step, const std::string& code, const std::string& message) {
    report.violations.push_back(Violation{step, code, message});
  };

  std::unordered_set<std::string> bound;
  bool holding = false;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& step = plan.steps[i];
    int idx = int(i);
    const Arity arity = arity_for(step.primitive);
    const std::string prim = primitive_name(step.primitive);

    if (arity.object_required && !step.object)
      violate(idx, "MissingObject", prim + " requires object=");
    if (!arity.object_allowed && step.object)
      violate(idx, "UnexpectedArgument", prim + " takes no object argument");
    if (arity.target_required && !step.target)
      violate(idx, "MissingTarget", prim + " requires target=");
    if (!arity.target_allowed && step.target)
      violate(idx, "UnexpectedArgument", prim + " takes no target argument");

    auto check_ref = [&](const std::optional<ObjectRef>& ref, const char* slot) {
      if (!ref) return;
      if (const auto* var = std::get_if<VarRef>(&*ref)) {
        if (!bound.count(var->name))
          violate(idx, "UseBeforeDef",
                  std::string(slot) + " references undefined variable '" + var->name + "'");
      }
    };
    check_ref(step.object, "object");
    check_ref(step.target, "target");
    for (const std::string& ex : step.exclusions) {
      if (!bound.count(ex))
        violate(idx, "UnboundExclusion", "not=[...] references undefined variable '" + ex + "'");
    }

    switch (step.primitive) {
      case Primitive::Grasp:
        if (holding) violate(idx, "GraspWhileHolding", "grasp requires an open, empty gripper");
        holding = true;
        break;
      case Primitive::MoveGraspedObject:
        if (!holding) violate(idx, "MoveWhileEmpty", "move_grasped_object requires a held object");
        break;
      case Primitive::RotateGraspedObject:
        if (!holding) violate(idx, "RotateWhileEmpty", "rotate_grasped_object requires a held object");
        break;
      case Primitive::Release:
        if (!holding) violate(idx, "ReleaseWhileEmpty", "release requires a held object");
        holding = false;
        break;
      case Primitive::PushDown:
      case Primitive::PushForward:
        break;  // allowed in any gripper state
    }

    if (step.binds) bound.insert(*step.binds);
  }
  return report;
}

std::vector<ResolvedStep> lower_plan(const Plan& plan) {
  ValidationReport report = validate_plan(plan);
  if (!report.ok())
    raise(ErrorCode::UnvalidatedPlan,
          "lower_plan: plan has " + std::to_string(report.violations.size()) + " violation(s)");

  std::unordered_map<std::string, int> binding_step;
  std::vector<ResolvedStep> out;
  out.reserve(plan.steps.size());
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& step = plan.steps[i];
    ResolvedStep resolved;
    resolved.primitive = step.primitive;
    resolved.binds = step.binds.has_value();
    auto resolve = [&](const ObjectRef& ref) -> ResolvedRef {
      if (const auto* q = std::get_if<TextQuery>(&ref)) return *q;
      if (const auto* v = std::get_if<VarRef>(&ref)) return StepRef{binding_step.at(v->name)};
      return std::get<Direction>(ref);
    };
    if (step.object) resolved.object = resolve(*step.object);
    if (step.target) resolved.target = resolve(*step.target);
    for (const std::string& ex : step.exclusions)
      resolved.exclusion_steps.push_back(binding_step.at(ex));
    if (step.binds) binding_step[*step.binds] = int(i);
    out.push_back(std::move(resolved));
  }
  return out;
}

std::string format_plan(const Plan& plan) {
  std::ostringstream out;
  if (!plan.query.empty()) out << "# query: " << plan.query << "\n";
  for (const PlanStep& step : plan.steps) {
    if (step.binds) out << *step.binds << " = ";
    out << primitive_name(step.primitive) << "(";
    bool first = true;
    auto emit = [&](const std::string& text) {
      if (!first) out << ", ";
      first = false;
      out << text;
    };
    if (step.object) emit("object=" + render_ref(*step.object));
    if (step.target) emit("target=" + render_ref(*step.target));
    if (!step.exclusions.empty()) {
      std::string list = "not=[";
      for (std::size_t i = 0; i < step.exclusions.size(); ++i) {
        if (i) list += ", ";
        list += step.exclusions[i];
      }
      list += "]";
      emit(list);
    }
    out << ")\n";
  }
  return out.str();
}

bool plans_equal(const Plan& a, const Plan& b) {
  if (a.query != b.query || a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const PlanStep& x = a.steps[i];
    const PlanStep& y = b.steps[i];
    if (x.primitive != y.primitive || x.object != y.object || x.target != y.target ||
        x.exclusions != y.exclusions || x.binds != y.binds)
      return false;
  }
  return true;
}

}  // namespace manip::dsl
