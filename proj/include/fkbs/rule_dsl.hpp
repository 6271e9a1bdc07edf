#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fkbs {

// Declaration order is the canonical serialization order.
enum class Action { kNoAction, kCallNurses, kRecordData };
enum class Expression { kNeutral, kSmile };
enum class Connective { kAnd, kOr };

std::string_view to_string(Action action);
std::string_view to_string(Expression expression);
std::string_view to_string(Connective op);
std::optional<Action> parse_action(std::string_view name);
std::optional<Expression> parse_expression(std::string_view name);

struct SourcePos {
  int line = 0;
  int column = 0;
};

/// Antecedent tree. Leaves are `variable IS term` atoms; inner nodes are
/// binary AND/OR. Nodes are immutable and shared between copies.
class Condition {
 public:
  static Condition atom(std::string variable, std::string term, SourcePos pos = {});
  static Condition binary(Connective op, Condition lhs, Condition rhs);

  bool is_atom() const;
  const std::string& variable() const;
  const std::string& term() const;
  Connective op() const;
  const Condition& lhs() const;
  const Condition& rhs() const;
  SourcePos pos() const;
  std::size_t depth() const;

  /// Structural equality; source positions are ignored.
  bool operator==(const Condition& other) const;

 private:
  struct Node;
  explicit Condition(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Consequent {
  std::set<Action> actions;
  std::optional<Expression> expression;

  bool empty() const { return actions.empty() && !expression; }
  bool operator==(const Consequent&) const = default;
};

struct Rule {
  int id = 0;
  Condition antecedent = Condition::atom("", "");
  Consequent consequent;
  double weight = 1.0;
  SourcePos pos;

  /// Structural equality; source positions are ignored.
  bool operator==(const Rule& other) const {
    return id == other.id && antecedent == other.antecedent && consequent == other.consequent &&
           weight == other.weight;
  }
};

/// A declared input variable: the term names rules may reference. The
/// membership functions behind the terms come from the engine configuration.
struct VariableDecl {
  std::string name;
  std::vector<std::string> terms;
  SourcePos pos;

  bool has_term(std::string_view term) const;
  bool operator==(const VariableDecl& other) const {
    return name == other.name && terms == other.terms;
  }
};

/// Validated, immutable after construction by the parser. Rules are kept in
/// ascending id order.
struct RuleBase {
  std::vector<VariableDecl> variables;
  std::vector<Rule> rules;

  const VariableDecl* find_variable(std::string_view name) const;
  const Rule* find_rule(int id) const;
  bool operator==(const RuleBase&) const = default;
};

/// Parses one `RULE <id>: IF <cond> THEN <items> [WEIGHT <w>]` statement and
/// checks it against `context`. Throws Error carrying syntax (positioned) or
/// semantic diagnostics.
Rule parse_rule(std::string_view text, std::span<const VariableDecl> context);

/// Parses a whole rule file. All problems are collected before throwing.
RuleBase parse_rulebase(std::string_view text);

/// Checks a programmatically built rule base with the same rules the parser
/// applies; throws Error with every violation.
void validate_rulebase(const RuleBase& rb);

std::string serialize_condition(const Condition& cond);
std::string serialize_rule(const Rule& rule);
std::string serialize_rulebase(const RuleBase& rb);

std::string_view default_rulebase_text();
const RuleBase& default_rulebase();

}  // namespace fkbs
