#pragma once

#include <array>
#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kbir/ontology.hpp"

namespace kbir::query {

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Term {
  enum class Kind { Variable, Constant, String };
  Kind kind = Kind::Constant;
  std::string text;  // variable name without '$', bare token, or unquoted string
  SourcePos pos;

  bool is_variable() const noexcept { return kind == Kind::Variable; }
  friend bool operator==(const Term& a, const Term& b) noexcept {
    return a.kind == b.kind && a.text == b.text;
  }
};

/// `term : role`
struct Member {
  Term term;
  std::string role;
  SourcePos role_pos;
};

/// `Pred(term : role, term : role)`
struct AssociationAtom {
  std::string predicate;
  std::array<Member, 2> members;
  SourcePos pos;
};

/// `name(term, ...)`: a rule call or a positional built-in.
struct RuleAtom {
  std::string predicate;
  std::vector<Term> args;
  SourcePos pos;
};

/// `term = term`
struct EqualityAtom {
  Term lhs;
  Term rhs;
  SourcePos pos;
};

struct Disjunction;
using Goal = std::variant<AssociationAtom, RuleAtom, EqualityAtom, Disjunction>;
using Conjunction = std::vector<Goal>;

/// `{ conj | conj | ... }` with at least two branches.
struct Disjunction {
  std::vector<Conjunction> branches;
  SourcePos pos;
};

struct Rule {
  std::string name;
  std::vector<std::string> params;
  Conjunction body;
  SourcePos pos;
};

struct Diagnostic {
  std::string message;
  SourcePos pos;
};

struct Program {
  std::map<std::string, Rule> rules;  // prelude plus user rules
  Conjunction query;
  std::vector<std::string> select;  // explicit, or every body variable in order
  bool explicit_select = false;
  std::vector<Diagnostic> warnings;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// The predefined narrower-term / broader-term rule block, verbatim.
std::string_view prelude_text() noexcept;

/// Parsed prelude rules, in source order.
const std::vector<Rule>& prelude_rules();

/// Parses `name(params) :- body .` definitions plus `import` lines.
/// Throws Error{SyntaxError} or Error{DuplicateRule}.
std::vector<Rule> parse_rules(std::string_view text,
                              std::vector<Diagnostic>* warnings = nullptr);

struct ParseOptions {
  bool include_prelude = true;
};

/// Parses a query (optionally preceded by rules and import lines) together
/// with a separate rule text. User rules shadow prelude rules of the same
/// name. Throws Error{SyntaxError}, Error{DuplicateRule} or
/// Error{UnknownSelectVariable}.
Program parse_program(std::string_view query_text, std::string_view rules_text = {},
                      const ParseOptions& options = {});

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct BindingRow {
  std::vector<EntityId> values;  // aligned with QueryResult::variables
};

struct QueryResult {
  std::vector<std::string> variables;
  std::vector<BindingRow> rows;

  /// Column position of `$name` (without '$'); throws std::out_of_range.
  std::size_t column(std::string_view name) const;
  /// Values of one column, in row order.
  std::vector<EntityId> column_values(std::string_view name) const;
};

struct EvalOptions {
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// All satisfying assignments of the selected variables: distinct, ordered by
/// the case-folded preferred labels of the selected variables in turn.
/// Throws Error{UnknownPredicate, UnknownRole, UnboundEquality, UnsafeRule,
/// ConstantNotFound, Timeout}.
QueryResult evaluate(const KnowledgeBase& kb, const Program& program,
                     const EvalOptions& options = {});

/// Convenience: parse_program + evaluate with the prelude.
QueryResult run_query(const KnowledgeBase& kb, std::string_view query_text,
                      std::string_view rules_text = {});

}  // namespace kbir::query
