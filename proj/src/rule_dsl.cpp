#include "fkbs/rule_dsl.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>
#include <variant>

#include "fkbs/error.hpp"

namespace fkbs {

namespace {

constexpr std::array<std::string_view, 3> kActionNames = {"no_action", "call_nurses",
                                                          "record_data"};
constexpr std::array<std::string_view, 2> kExpressionNames = {"neutral", "smile"};
constexpr std::array<std::string_view, 8> kKeywords = {"RULE", "IF",  "THEN", "IS",
                                                       "AND",  "OR",  "VAR",  "WEIGHT"};

// Parenthesis nesting and atom count are bounded so that hostile input cannot
// exhaust the stack while building or walking the tree.
constexpr int kMaxNesting = 64;
constexpr int kMaxAtoms = 512;

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

std::string_view to_string(Action action) { return kActionNames[static_cast<std::size_t>(action)]; }

std::string_view to_string(Expression expression) {
  return kExpressionNames[static_cast<std::size_t>(expression)];
}

std::string_view to_string(Connective op) { return op == Connective::kAnd ? "AND" : "OR"; }

std::optional<Action> parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<Action>(i);
  }
  return std::nullopt;
}

std::optional<Expression> parse_expression(std::string_view name) {
  for (std::size_t i = 0; i < kExpressionNames.size(); ++i) {
    if (kExpressionNames[i] == name) return static_cast<Expression>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Condition

struct Condition::Node {
  bool atom = true;
  std::string variable;
  std::string term;
  Connective op = Connective::kAnd;
  // Empty for atoms; (lhs, rhs) otherwise.
  std::vector<Condition> children;
  SourcePos pos;
  std::size_t depth = 1;
};

Condition Condition::atom(std::string variable, std::string term, SourcePos pos) {
  auto node = std::make_shared<Node>();
  node->variable = std::move(variable);
  node->term = std::move(term);
  node->pos = pos;
  return Condition(std::move(node));
}

Condition Condition::binary(Connective op, Condition lhs, Condition rhs) {
  auto node = std::make_shared<Node>();
  node->atom = false;
  node->op = op;
  node->pos = lhs.pos();
  node->depth = 1 + std::max(lhs.node_->depth, rhs.node_->depth);
  node->children.push_back(std::move(lhs));
  node->children.push_back(std::move(rhs));
  return Condition(std::move(node));
}

bool Condition::is_atom() const { return node_->atom; }
const std::string& Condition::variable() const { return node_->variable; }
const std::string& Condition::term() const { return node_->term; }
Connective Condition::op() const { return node_->op; }
SourcePos Condition::pos() const { return node_->pos; }
std::size_t Condition::depth() const { return node_->depth; }

const Condition& Condition::lhs() const { return node_->children.at(0); }
const Condition& Condition::rhs() const { return node_->children.at(1); }

bool Condition::operator==(const Condition& other) const {
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (&a == &b) return true;
  if (a.atom != b.atom) return false;
  if (a.atom) return a.variable == b.variable && a.term == b.term;
  return a.op == b.op && lhs() == other.lhs() && rhs() == other.rhs();
}

bool VariableDecl::has_term(std::string_view term) const {
  return std::find(terms.begin(), terms.end(), term) != terms.end();
}

const VariableDecl* RuleBase::find_variable(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const Rule* RuleBase::find_rule(int id) const {
  for (const auto& r : rules) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { kIdent, kInteger, kNumber, kColon, kComma, kLParen, kRParen, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string_view text;
  int column = 1;
};

struct SyntaxAbort {
  Diagnostic diagnostic;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::kEnd: return "end of line";
    case Tok::kIdent:
      return (is_keyword(t.text) ? "keyword '" : "identifier '") + std::string(t.text) + "'";
    default: return "'" + std::string(t.text) + "'";
  }
}

std::string printable(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
  static const char* kHex = "0123456789abcdef";
  return std::string("byte 0x") + kHex[u >> 4] + kHex[u & 0xf];
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](std::size_t at, std::string message) {
    throw SyntaxAbort{Diagnostic{ErrorKind::kSyntax, line_no, static_cast<int>(at) + 1,
                                 std::move(message)}};
  };
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    const std::size_t start = i;
    Token t;
    t.column = static_cast<int>(start) + 1;
    if (ident_start(c)) {
      while (i < line.size() && ident_char(line[i])) ++i;
      t.kind = Tok::kIdent;
    } else if (digit(c)) {
      t.kind = Tok::kInteger;
      while (i < line.size() && digit(line[i])) ++i;
      if (i < line.size() && line[i] == '.') {
        t.kind = Tok::kNumber;
        ++i;
        if (i >= line.size() || !digit(line[i])) fail(i, "expected digits after decimal point");
        while (i < line.size() && digit(line[i])) ++i;
      }
      if (i < line.size() && (line[i] == 'e' || line[i] == 'E')) {
        t.kind = Tok::kNumber;
        ++i;
        if (i < line.size() && (line[i] == '+' || line[i] == '-')) ++i;
        if (i >= line.size() || !digit(line[i])) fail(i, "expected exponent digits");
        while (i < line.size() && digit(line[i])) ++i;
      }
      if (i < line.size() && ident_char(line[i])) fail(i, "malformed number");
    } else {
      ++i;
      switch (c) {
        case ':': t.kind = Tok::kColon; break;
        case ',': t.kind = Tok::kComma; break;
        case '(': t.kind = Tok::kLParen; break;
        case ')': t.kind = Tok::kRParen; break;
        default: fail(start, "unexpected character " + printable(c));
      }
    }
    t.text = line.substr(start, i - start);
    out.push_back(t);
  }
  Token end;
  end.column = static_cast<int>(line.size()) + 1;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

struct ConsequentItem {
  std::string name;
  SourcePos pos;
};

struct ParsedRule {
  Rule rule;
  std::vector<ConsequentItem> items;
};

using Statement = std::variant<std::monostate, VariableDecl, ParsedRule>;

class LineParser {
 public:
  LineParser(std::string_view line, int line_no) : line_no_(line_no), tokens_(lex_line(line, line_no)) {}

  Statement statement() {
    if (peek().kind == Tok::kEnd) return std::monostate{};
    if (at_keyword("VAR")) return variable_decl();
    if (at_keyword("RULE")) return rule();
    fail(peek(), "expected 'RULE' or 'VAR', found " + describe(peek()));
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token next() {
    Token t = tokens_[pos_];
    if (t.kind != Tok::kEnd) ++pos_;
    return t;
  }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == Tok::kIdent && peek().text == kw;
  }
  SourcePos here(const Token& t) const { return SourcePos{line_no_, t.column}; }

  [[noreturn]] void fail(const Token& t, std::string message) const {
    throw SyntaxAbort{Diagnostic{ErrorKind::kSyntax, line_no_, t.column, std::move(message)}};
  }

  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail(peek(), "expected '" + std::string(kw) + "', found " + describe(peek()));
    next();
  }

  void expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
    next();
  }

  Token identifier(std::string_view what) {
    if (peek().kind != Tok::kIdent || is_keyword(peek().text)) {
      fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
    }
    return next();
  }

  void expect_end() {
    if (peek().kind != Tok::kEnd) fail(peek(), "unexpected " + describe(peek()) + " at end of statement");
  }

  VariableDecl variable_decl() {
    VariableDecl decl;
    decl.pos = here(peek());
    next();
    decl.name = std::string(identifier("variable name").text);
    expect(Tok::kColon, "':'");
    decl.terms.emplace_back(identifier("term name").text);
    while (peek().kind == Tok::kComma) {
      next();
      decl.terms.emplace_back(identifier("term name").text);
    }
    expect_end();
    return decl;
  }

  ParsedRule rule() {
    ParsedRule out;
    out.rule.pos = here(peek());
    next();
    const Token id = peek();
    if (id.kind != Tok::kInteger) fail(id, "expected rule id, found " + describe(id));
    next();
    int value = 0;
    auto res = std::from_chars(id.text.data(), id.text.data() + id.text.size(), value);
    if (res.ec != std::errc{} || value <= 0) fail(id, "rule id must be a positive integer");
    out.rule.id = value;
    expect(Tok::kColon, "':'");
    expect_keyword("IF");
    out.rule.antecedent = or_expr(0);
    expect_keyword("THEN");
    do {
      if (!out.items.empty()) next();
      const Token item = identifier("action or expression");
      out.items.push_back(ConsequentItem{std::string(item.text), here(item)});
    } while (peek().kind == Tok::kComma);
    if (at_keyword("WEIGHT")) {
      next();
      const Token w = peek();
      if (w.kind != Tok::kInteger && w.kind != Tok::kNumber) fail(w, "expected weight, found " + describe(w));
      next();
      double weight = 0.0;
      auto wres = std::from_chars(w.text.data(), w.text.data() + w.text.size(), weight);
      if (wres.ec != std::errc{}) fail(w, "weight out of range");
      out.rule.weight = weight;
    }
    expect_end();
    return out;
  }

  Condition or_expr(int nesting) {
    Condition lhs = and_expr(nesting);
    while (at_keyword("OR")) {
      next();
      lhs = Condition::binary(Connective::kOr, std::move(lhs), and_expr(nesting));
    }
    return lhs;
  }

  Condition and_expr(int nesting) {
    Condition lhs = primary(nesting);
    while (at_keyword("AND")) {
      next();
      lhs = Condition::binary(Connective::kAnd, std::move(lhs), primary(nesting));
    }
    return lhs;
  }

  Condition primary(int nesting) {
    if (peek().kind == Tok::kLParen) {
      if (nesting >= kMaxNesting) fail(peek(), "parentheses nested too deeply");
      next();
      Condition inner = or_expr(nesting + 1);
      expect(Tok::kRParen, "')'");
      return inner;
    }
    const Token var = identifier("variable name or '('");
    expect_keyword("IS");
    const Token term = identifier("term name");
    if (++atoms_ > kMaxAtoms) fail(var, "condition has too many atoms");
    return Condition::atom(std::string(var.text), std::string(term.text), here(var));
  }

  int line_no_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int atoms_ = 0;
};

// ---------------------------------------------------------------------------
// Semantic checks

void check_condition(const Condition& cond, const std::map<std::string_view, const VariableDecl*>& vars,
                     int rule_id, std::vector<Diagnostic>& diags) {
  if (!cond.is_atom()) {
    check_condition(cond.lhs(), vars, rule_id, diags);
    check_condition(cond.rhs(), vars, rule_id, diags);
    return;
  }
  const SourcePos p = cond.pos();
  auto it = vars.find(cond.variable());
  if (it == vars.end()) {
    diags.push_back({ErrorKind::kSemantic, p.line, p.column,
                     "rule " + std::to_string(rule_id) + ": unknown variable '" + cond.variable() + "'"});
  } else if (!it->second->has_term(cond.term())) {
    diags.push_back({ErrorKind::kSemantic, p.line, p.column,
                     "rule " + std::to_string(rule_id) + ": unknown term '" + cond.term() +
                         "' for variable '" + cond.variable() + "'"});
  }
}

Consequent build_consequent(const ParsedRule& parsed, std::vector<Diagnostic>& diags) {
  Consequent out;
  const std::string who = "rule " + std::to_string(parsed.rule.id) + ": ";
  for (const auto& item : parsed.items) {
    const SourcePos p = item.pos;
    if (auto action = parse_action(item.name)) {
      if (!out.actions.insert(*action).second) {
        diags.push_back({ErrorKind::kSemantic, p.line, p.column, who + "duplicate action '" + item.name + "'"});
      }
    } else if (auto expr = parse_expression(item.name)) {
      if (out.expression) {
        diags.push_back({ErrorKind::kSemantic, p.line, p.column, who + "more than one expression"});
      }
      out.expression = expr;
    } else {
      diags.push_back({ErrorKind::kSemantic, p.line, p.column, who + "unknown action '" + item.name + "'"});
    }
  }
  return out;
}

void check_rule(const Rule& rule, const std::map<std::string_view, const VariableDecl*>& vars,
                std::vector<Diagnostic>& diags) {
  const std::string who = "rule " + std::to_string(rule.id) + ": ";
  if (rule.id <= 0) {
    diags.push_back({ErrorKind::kSemantic, rule.pos.line, rule.pos.column, who + "id must be positive"});
  }
  check_condition(rule.antecedent, vars, rule.id, diags);
  if (rule.consequent.empty()) {
    diags.push_back({ErrorKind::kSemantic, rule.pos.line, rule.pos.column, who + "empty consequent"});
  }
  if (!(rule.weight > 0.0 && rule.weight <= 1.0)) {
    diags.push_back({ErrorKind::kSemantic, rule.pos.line, rule.pos.column,
                     who + "weight must lie in (0, 1], got " + format_number(rule.weight)});
  }
}

std::map<std::string_view, const VariableDecl*> index_variables(std::span<const VariableDecl> decls,
                                                                std::vector<Diagnostic>& diags) {
  std::map<std::string_view, const VariableDecl*> vars;
  for (const auto& decl : decls) {
    const SourcePos p = decl.pos;
    if (!vars.emplace(decl.name, &decl).second) {
      diags.push_back({ErrorKind::kSemantic, p.line, p.column, "duplicate variable '" + decl.name + "'"});
    }
    if (decl.terms.empty()) {
      diags.push_back({ErrorKind::kSemantic, p.line, p.column, "variable '" + decl.name + "' has no terms"});
    }
    for (std::size_t i = 0; i < decl.terms.size(); ++i) {
      if (std::find(decl.terms.begin(), decl.terms.begin() + i, decl.terms[i]) != decl.terms.begin() + i) {
        diags.push_back({ErrorKind::kSemantic, p.line, p.column,
                         "variable '" + decl.name + "' declares term '" + decl.terms[i] + "' twice"});
      }
    }
  }
  return vars;
}

void check_rulebase(const RuleBase& rb, std::vector<Diagnostic>& diags) {
  const auto vars = index_variables(rb.variables, diags);
  std::map<int, SourcePos> ids;
  for (const auto& rule : rb.rules) {
    if (auto [it, inserted] = ids.emplace(rule.id, rule.pos); !inserted) {
      diags.push_back({ErrorKind::kSemantic, rule.pos.line, rule.pos.column,
                       "duplicate rule id " + std::to_string(rule.id) + " (first defined on line " +
                           std::to_string(it->second.line) + ")"});
    }
    check_rule(rule, vars, diags);
  }
  if (rb.rules.empty()) diags.push_back({ErrorKind::kSemantic, 0, 0, "rule base contains no rules"});
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.line, a.column) < std::tie(b.line, b.column);
  });
}

}  // namespace

Rule parse_rule(std::string_view text, std::span<const VariableDecl> context) {
  std::vector<Diagnostic> diags;
  // Allow a trailing newline but nothing beyond one statement.
  std::string_view line = text;
  if (auto nl = line.find('\n'); nl != std::string_view::npos) {
    if (line.find_first_not_of(" \t\r\n", nl) != std::string_view::npos) {
      throw Error({Diagnostic{ErrorKind::kSyntax, 2, 1, "expected a single statement"}});
    }
    line = line.substr(0, nl);
  }
  Statement st;
  try {
    st = LineParser(line, 1).statement();
  } catch (const SyntaxAbort& abort) {
    throw Error({abort.diagnostic});
  }
  auto* parsed = std::get_if<ParsedRule>(&st);
  if (parsed == nullptr) throw Error({Diagnostic{ErrorKind::kSyntax, 1, 1, "expected a RULE statement"}});
  parsed->rule.consequent = build_consequent(*parsed, diags);
  std::vector<Diagnostic> ignored;
  check_rule(parsed->rule, index_variables(context, ignored), diags);
  if (!diags.empty()) {
    sort_diagnostics(diags);
    throw Error(std::move(diags));
  }
  return parsed->rule;
}

RuleBase parse_rulebase(std::string_view text) {
  std::vector<Diagnostic> diags;
  RuleBase rb;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = text.substr(start, end - start);
    try {
      Statement st = LineParser(line, line_no).statement();
      if (auto* decl = std::get_if<VariableDecl>(&st)) {
        rb.variables.push_back(std::move(*decl));
      } else if (auto* parsed = std::get_if<ParsedRule>(&st)) {
        parsed->rule.consequent = build_consequent(*parsed, diags);
        rb.rules.push_back(std::move(parsed->rule));
      }
    } catch (const SyntaxAbort& abort) {
      diags.push_back(abort.diagnostic);
    }
    start = end + 1;
  }
  // Semantic checks only make sense once the whole file is known; skip the
  // "no rules" complaint when syntax errors already explain it.
  std::vector<Diagnostic> semantic;
  check_rulebase(rb, semantic);
  for (auto& d : semantic) {
    if (d.line == 0 && !diags.empty()) continue;
    if (d.line == 0) d.line = d.column = 1;
    diags.push_back(std::move(d));
  }
  if (!diags.empty()) {
    sort_diagnostics(diags);
    throw Error(std::move(diags));
  }
  std::stable_sort(rb.rules.begin(), rb.rules.end(),
                   [](const Rule& a, const Rule& b) { return a.id < b.id; });
  return rb;
}

void validate_rulebase(const RuleBase& rb) {
  std::vector<Diagnostic> diags;
  check_rulebase(rb, diags);
  if (!diags.empty()) throw Error(std::move(diags));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

int precedence(Connective op) { return op == Connective::kAnd ? 2 : 1; }

void write_condition(std::ostringstream& out, const Condition& cond) {
  if (cond.is_atom()) {
    out << cond.variable() << " IS " << cond.term();
    return;
  }
  const int prec = precedence(cond.op());
  const Condition& lhs = cond.lhs();
  const Condition& rhs = cond.rhs();
  // Connectives are left-associative, so a right operand of equal precedence
  // needs parentheses to keep its grouping.
  const bool wrap_lhs = !lhs.is_atom() && precedence(lhs.op()) < prec;
  const bool wrap_rhs = !rhs.is_atom() && precedence(rhs.op()) <= prec;
  if (wrap_lhs) out << '(';
  write_condition(out, lhs);
  if (wrap_lhs) out << ')';
  out << ' ' << to_string(cond.op()) << ' ';
  if (wrap_rhs) out << '(';
  write_condition(out, rhs);
  if (wrap_rhs) out << ')';
}

}  // namespace

std::string serialize_condition(const Condition& cond) {
  std::ostringstream out;
  write_condition(out, cond);
  return out.str();
}

std::string serialize_rule(const Rule& rule) {
  std::ostringstream out;
  out << "RULE " << rule.id << ": IF " << serialize_condition(rule.antecedent) << " THEN ";
  bool first = true;
  for (Action a : rule.consequent.actions) {
    if (!first) out << ", ";
    out << to_string(a);
    first = false;
  }
  if (rule.consequent.expression) {
    if (!first) out << ", ";
    out << to_string(*rule.consequent.expression);
  }
  if (rule.weight != 1.0) out << " WEIGHT " << format_number(rule.weight);
  return out.str();
}

std::string serialize_rulebase(const RuleBase& rb) {
  std::ostringstream out;
  for (const auto& decl : rb.variables) {
    out << "VAR " << decl.name << ": ";
    for (std::size_t i = 0; i < decl.terms.size(); ++i) {
      if (i != 0) out << ", ";
      out << decl.terms[i];
    }
    out << '\n';
  }
  if (!rb.variables.empty()) out << '\n';
  std::vector<const Rule*> ordered;
  for (const auto& r : rb.rules) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Rule* a, const Rule* b) { return a->id < b->id; });
  for (const Rule* r : ordered) out << serialize_rule(*r) << '\n';
  return out.str();
}

std::string_view default_rulebase_text() {
  return R"(# Patient-monitoring rule base.
VAR emotion: negative, neutral, positive
VAR sound: low, normal, high
VAR head_angle: normal, low, high

RULE 1: IF emotion IS negative THEN no_action, call_nurses, record_data
RULE 2: IF emotion IS neutral THEN record_data
RULE 3: IF emotion IS positive THEN smile, record_data
RULE 4: IF sound IS low AND head_angle IS low THEN no_action, call_nurses, record_data
RULE 5: IF sound IS normal THEN record_data
RULE 6: IF sound IS high AND emotion IS negative THEN no_action, call_nurses, record_data
RULE 7: IF head_angle IS low THEN no_action, call_nurses, record_data
RULE 8: IF head_angle IS normal THEN record_data
RULE 9: IF head_angle IS high AND sound IS low THEN no_action, call_nurses, record_data
)";
}

const RuleBase& default_rulebase() {
  static const RuleBase rb = parse_rulebase(default_rulebase_text());
  return rb;
}

}  // namespace fkbs
