#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "kbir/query.hpp"

namespace kbir::query {

std::size_t QueryResult::column(std::string_view name) const {
  auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end())
    throw std::out_of_range("no column $" + std::string(name));
  return static_cast<std::size_t>(it - variables.begin());
}

std::vector<EntityId> QueryResult::column_values(std::string_view name) const {
  auto c = column(name);
  std::vector<EntityId> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.values[c]);
  return out;
}

namespace {

constexpr EntityIndex kUnbound = std::numeric_limits<EntityIndex>::max();
constexpr std::string_view kStartsWith = "value-starts-with";

using Row = std::vector<EntityIndex>;

struct RowHash {
  std::size_t operator()(const Row& r) const noexcept {
    std::size_t h = r.size();
    for (auto v : r) h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// ---------------------------------------------------------------------------
// Compiled form: variables become slots, constants become entity indices.
// ---------------------------------------------------------------------------

struct Slot {
  bool variable = false;
  std::uint32_t index = 0;  // slot number, or entity index for constants
};

struct CGoal;
using CConj = std::vector<CGoal>;

struct CGoal {
  enum class Kind { Association, Call, Equality, Disjunction, StartsWith };
  Kind kind = Kind::Equality;
  SourcePos pos;
  // Association: edges of one type, or of a whole category for the
  // built-in hierarchy predicates.
  const RelationType* type = nullptr;
  std::optional<RelationCategory> category;
  Slot source, target;  // also lhs / rhs of Equality
  // Call
  std::size_t rule = 0;
  std::vector<Slot> args;
  // StartsWith
  std::string prefix;
  // Disjunction
  std::vector<CConj> branches;
};

struct CRule {
  std::string name;
  std::size_t slots = 0;
  std::vector<std::uint32_t> params;
  CConj body;
};

CGoal make_goal(CGoal::Kind kind, SourcePos pos) {
  CGoal g;
  g.kind = kind;
  g.pos = pos;
  return g;
}

using Scope = std::unordered_map<std::string, std::uint32_t>;

class Compiler {
 public:
  Compiler(const KnowledgeBase& kb, const Program& program) : kb_(kb), program_(program) {}

  std::vector<CRule> take_rules() {
    while (!worklist_.empty()) {
      auto id = worklist_.front();
      worklist_.pop_front();
      const Rule& src = program_.rules.at(rules_[id].name);
      Scope scope;
      std::vector<std::uint32_t> params;
      for (const auto& p : src.params) params.push_back(slot_for(scope, p));
      auto body = conj(src.body, scope);
      rules_[id].params = std::move(params);
      rules_[id].body = std::move(body);
      rules_[id].slots = scope.size();
    }
    return std::move(rules_);
  }

  CConj conj(const Conjunction& goals, Scope& scope) {
    CConj out;
    out.reserve(goals.size());
    for (const auto& g : goals) out.push_back(goal(g, scope));
    return out;
  }

  Slot term(const Term& t, Scope& scope) {
    if (t.is_variable()) return {true, slot_for(scope, t.text)};
    try {
      return {false, resolve_index(kb_, t.text)};
    } catch (const Error& e) {
      throw Error(ErrorKind::ConstantNotFound,
                  "topic '" + t.text + "' not found (" + e.what() + ")", t.pos);
    }
  }

  static std::uint32_t slot_for(Scope& scope, const std::string& name) {
    auto [it, fresh] = scope.emplace(name, static_cast<std::uint32_t>(scope.size()));
    return it->second;
  }

 private:
  CGoal goal(const Goal& g, Scope& scope) {
    return std::visit(
        [&](const auto& goal) -> CGoal {
          using T = std::decay_t<decltype(goal)>;
          if constexpr (std::is_same_v<T, AssociationAtom>) return association(goal, scope);
          else if constexpr (std::is_same_v<T, RuleAtom>) return call(goal, scope);
          else if constexpr (std::is_same_v<T, EqualityAtom>) {
            CGoal out = make_goal(CGoal::Kind::Equality, goal.pos);
            out.source = term(goal.lhs, scope);
            out.target = term(goal.rhs, scope);
            return out;
          } else {
            CGoal out = make_goal(CGoal::Kind::Disjunction, goal.pos);
            for (const auto& branch : goal.branches) out.branches.push_back(conj(branch, scope));
            return out;
          }
        },
        g);
  }

  CGoal association(const AssociationAtom& atom, Scope& scope) {
    const RelationType* type = kb_.relation_type(atom.predicate);
    if (!type)
      throw Error(ErrorKind::UnknownPredicate,
                  "unknown association predicate '" + atom.predicate + "'", atom.pos);
    CGoal out = make_goal(CGoal::Kind::Association, atom.pos);
    out.type = type;
    if (atom.predicate == kHierarchicalRelation) out.category = RelationCategory::GenericHierarchy;
    if (atom.predicate == kPartitiveRelation) out.category = RelationCategory::WholePartHierarchy;

    bool have_source = false, have_target = false;
    for (const auto& m : atom.members) {
      if (m.role == type->source_role && !have_source) {
        out.source = term(m.term, scope);
        have_source = true;
      } else if (m.role == type->target_role && !have_target) {
        out.target = term(m.term, scope);
        have_target = true;
      } else {
        throw Error(ErrorKind::UnknownRole,
                    "'" + m.role + "' is not a role of '" + type->name + "' (expected " +
                        type->source_role + " and " + type->target_role + ")",
                    m.role_pos);
      }
    }
    return out;
  }

  CGoal call(const RuleAtom& atom, Scope& scope) {
    if (atom.predicate == kStartsWith) {
      if (atom.args.size() != 2 || atom.args[1].is_variable())
        throw Error(ErrorKind::InvalidArgument,
                    "value-starts-with expects a term and a prefix string", atom.pos);
      CGoal out = make_goal(CGoal::Kind::StartsWith, atom.pos);
      out.source = term(atom.args[0], scope);
      out.prefix = atom.args[1].text;
      return out;
    }
    auto it = program_.rules.find(atom.predicate);
    if (it == program_.rules.end()) {
      if (kb_.relation_type(atom.predicate))
        throw Error(ErrorKind::UnknownRole,
                    "association predicate '" + atom.predicate + "' needs role-tagged members",
                    atom.pos);
      throw Error(ErrorKind::UnknownPredicate, "unknown predicate '" + atom.predicate + "'",
                  atom.pos);
    }
    if (it->second.params.size() != atom.args.size())
      throw Error(ErrorKind::UnknownPredicate,
                  "rule '" + atom.predicate + "' takes " +
                      std::to_string(it->second.params.size()) + " arguments, not " +
                      std::to_string(atom.args.size()),
                  atom.pos);

    CGoal out = make_goal(CGoal::Kind::Call, atom.pos);
    out.rule = rule_id(atom.predicate);
    for (const auto& a : atom.args) out.args.push_back(term(a, scope));
    return out;
  }

  std::size_t rule_id(const std::string& name) {
    auto [it, fresh] = ids_.emplace(name, rules_.size());
    if (fresh) {
      rules_.push_back(CRule{name, 0, {}, {}});
      worklist_.push_back(it->second);
    }
    return it->second;
  }

  const KnowledgeBase& kb_;
  const Program& program_;
  std::vector<CRule> rules_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::deque<std::size_t> worklist_;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct CallKey {
  std::size_t rule;
  Row args;  // kUnbound marks a free argument
  friend bool operator==(const CallKey&, const CallKey&) = default;
};

struct CallKeyHash {
  std::size_t operator()(const CallKey& k) const noexcept {
    return RowHash{}(k.args) * 31 + k.rule;
  }
};

struct Table {
  std::vector<Row> answers;
  std::unordered_set<Row, RowHash> seen;
  bool complete = false;
  bool on_stack = false;
  std::size_t stack_pos = 0;
  std::size_t low = 0;
  std::uint64_t evaluated_in = 0;
};

class Evaluator {
 public:
  Evaluator(const KnowledgeBase& kb, const std::vector<CRule>& rules, const EvalOptions& options)
      : kb_(kb), rules_(rules), options_(options) {}

  /// Goals run in the order their bindings allow: at each step the most
  /// bound goal goes next, ties keep source order. An `=` with both sides
  /// free waits until nothing else is left.
  std::vector<Row> conj(const CConj& goals, std::vector<Row> rows) {
    std::vector<std::size_t> todo(goals.size());
    std::iota(todo.begin(), todo.end(), std::size_t{0});
    return conj(goals, std::move(todo), std::move(rows));
  }

 private:
  std::vector<Row> conj(const CConj& goals, std::vector<std::size_t> todo, std::vector<Row> rows) {
    std::vector<Row> tail;
    while (!todo.empty() && !rows.empty()) {
      // Rows with another binding pattern get their own ordering.
      const Row probe = rows.front();
      auto split = std::stable_partition(rows.begin(), rows.end(),
                                         [&](const Row& r) { return same_pattern(r, probe); });
      if (split != rows.end()) {
        std::vector<Row> other(std::make_move_iterator(split), std::make_move_iterator(rows.end()));
        rows.erase(split, rows.end());
        auto done = conj(goals, todo, std::move(other));
        tail.insert(tail.end(), std::make_move_iterator(done.begin()),
                    std::make_move_iterator(done.end()));
      }

      auto best = todo.begin();
      int best_score = readiness(goals[*best], probe);
      for (auto it = std::next(todo.begin()); it != todo.end(); ++it) {
        int score = readiness(goals[*it], probe);
        if (score > best_score) {
          best = it;
          best_score = score;
        }
      }
      const CGoal& g = goals[*best];
      todo.erase(best);

      std::vector<Row> next;
      for (const auto& row : rows) apply(g, row, next);
      if (g.kind == CGoal::Kind::Call || g.kind == CGoal::Kind::Disjunction) dedupe(next);
      rows = std::move(next);
    }
    rows.insert(rows.end(), std::make_move_iterator(tail.begin()),
                std::make_move_iterator(tail.end()));
    return rows;
  }

  static bool same_pattern(const Row& a, const Row& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if ((a[i] == kUnbound) != (b[i] == kUnbound)) return false;
    return true;
  }

  static bool any_bound(const CGoal& g, const Row& row) {
    auto bound = [&](Slot s) { return value(row, s) != kUnbound; };
    switch (g.kind) {
      case CGoal::Kind::Association:
      case CGoal::Kind::Equality: return bound(g.source) || bound(g.target);
      case CGoal::Kind::StartsWith: return bound(g.source);
      case CGoal::Kind::Call: return std::any_of(g.args.begin(), g.args.end(), bound);
      case CGoal::Kind::Disjunction:
        for (const auto& branch : g.branches)
          for (const auto& sub : branch)
            if (any_bound(sub, row)) return true;
        return false;
    }
    return false;
  }

  /// 3 filters or binds from known values, 1 has some input, 0 has none,
  /// -1 cannot run yet.
  static int readiness(const CGoal& g, const Row& row) {
    auto bound = [&](Slot s) { return value(row, s) != kUnbound; };
    switch (g.kind) {
      case CGoal::Kind::Equality: return any_bound(g, row) ? 3 : -1;
      case CGoal::Kind::StartsWith: return bound(g.source) ? 3 : 0;
      case CGoal::Kind::Association:
        return bound(g.source) && bound(g.target) ? 3 : any_bound(g, row) ? 1 : 0;
      case CGoal::Kind::Call:
        return std::all_of(g.args.begin(), g.args.end(), bound) ? 3 : any_bound(g, row) ? 1 : 0;
      case CGoal::Kind::Disjunction: return any_bound(g, row) ? 1 : 0;
    }
    return 0;
  }

  static void dedupe(std::vector<Row>& rows) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  }

  static EntityIndex value(const Row& row, Slot s) {
    return s.variable ? row[s.index] : s.index;
  }

  static bool bind(Row& row, Slot s, EntityIndex v) {
    if (!s.variable) return s.index == v;
    auto& cell = row[s.index];
    if (cell == kUnbound) {
      cell = v;
      return true;
    }
    return cell == v;
  }

  void tick() {
    if (!options_.deadline || (++ticks_ & 0x3ff) != 0) return;
    if (std::chrono::steady_clock::now() > *options_.deadline)
      throw Error(ErrorKind::Timeout, "query evaluation exceeded its time budget");
  }

  void apply(const CGoal& g, const Row& row, std::vector<Row>& out) {
    tick();
    switch (g.kind) {
      case CGoal::Kind::Association: return association(g, row, out);
      case CGoal::Kind::Equality: return equality(g, row, out);
      case CGoal::Kind::StartsWith: return starts_with(g, row, out);
      case CGoal::Kind::Disjunction:
        for (const auto& branch : g.branches) {
          auto rows = conj(branch, {row});
          out.insert(out.end(), std::make_move_iterator(rows.begin()),
                     std::make_move_iterator(rows.end()));
        }
        return;
      case CGoal::Kind::Call: return call(g, row, out);
    }
  }

  std::span<const EntityIndex> neighbors(const CGoal& g, Direction d, EntityIndex v) const {
    return g.category ? kb_.neighbors(*g.category, d, v) : kb_.neighbors(*g.type, d, v);
  }

  void association(const CGoal& g, const Row& row, std::vector<Row>& out) {
    auto s = value(row, g.source);
    auto t = value(row, g.target);
    auto emit = [&](EntityIndex src, EntityIndex dst) {
      Row r = row;
      if (bind(r, g.source, src) && bind(r, g.target, dst)) out.push_back(std::move(r));
    };
    if (s != kUnbound && t != kUnbound) {
      auto n = neighbors(g, Direction::Forward, s);
      if (std::binary_search(n.begin(), n.end(), t)) out.push_back(row);
    } else if (s != kUnbound) {
      for (auto dst : neighbors(g, Direction::Forward, s)) emit(s, dst);
    } else if (t != kUnbound) {
      for (auto src : neighbors(g, Direction::Inverse, t)) emit(src, t);
    } else {
      auto edges = g.category ? kb_.edges(*g.category) : kb_.edges(*g.type);
      for (const auto& e : edges) emit(e.source, e.target);
    }
  }

  void equality(const CGoal& g, const Row& row, std::vector<Row>& out) {
    auto l = value(row, g.source);
    auto r = value(row, g.target);
    if (l == kUnbound && r == kUnbound)
      throw Error(ErrorKind::UnboundEquality,
                  "both sides of '=' are unbound at line " + std::to_string(g.pos.line) +
                      ", column " + std::to_string(g.pos.column),
                  g.pos);
    Row next = row;
    if (l == kUnbound ? bind(next, g.source, r) : bind(next, g.target, l))
      out.push_back(std::move(next));
  }

  bool has_prefix(EntityIndex i, const std::string& prefix) const {
    const auto& e = kb_.entity(i);
    auto starts = [&](std::string_view s) { return normalize_label(s).starts_with(prefix); };
    if (starts(e.id.str()) || starts(e.preferred_label)) return true;
    return std::any_of(e.synonyms.begin(), e.synonyms.end(), starts);
  }

  void starts_with(const CGoal& g, const Row& row, std::vector<Row>& out) {
    auto prefix = normalize_label(g.prefix);
    auto v = value(row, g.source);
    if (v != kUnbound) {
      if (has_prefix(v, prefix)) out.push_back(row);
      return;
    }
    for (EntityIndex i = 0; i < kb_.entity_count(); ++i) {
      if (!has_prefix(i, prefix)) continue;
      Row r = row;
      if (bind(r, g.source, i)) out.push_back(std::move(r));
    }
  }

  void call(const CGoal& g, const Row& row, std::vector<Row>& out) {
    CallKey key{g.rule, Row(g.args.size())};
    for (std::size_t i = 0; i < g.args.size(); ++i) key.args[i] = value(row, g.args[i]);
    const Table& table = solve(std::move(key));
    for (const auto& answer : table.answers) {
      Row r = row;
      bool ok = true;
      for (std::size_t i = 0; i < g.args.size() && ok; ++i) ok = bind(r, g.args[i], answer[i]);
      if (ok) out.push_back(std::move(r));
    }
  }

  void evaluate_body(const CRule& rule, const Row& key_args, Table& table) {
    Row init(rule.slots, kUnbound);
    for (std::size_t i = 0; i < rule.params.size(); ++i) {
      if (key_args[i] == kUnbound) continue;
      auto& cell = init[rule.params[i]];
      if (cell != kUnbound && cell != key_args[i]) return;
      cell = key_args[i];
    }
    for (const auto& row : conj(rule.body, {std::move(init)})) {
      Row answer(rule.params.size());
      for (std::size_t i = 0; i < rule.params.size(); ++i) {
        answer[i] = row[rule.params[i]];
        if (answer[i] == kUnbound)
          throw Error(ErrorKind::UnsafeRule,
                      "rule '" + rule.name + "' leaves a parameter unbound for this call");
      }
      if (table.seen.insert(answer).second) {
        table.answers.push_back(std::move(answer));
        ++total_answers_;
      }
    }
  }

  /// Tabled call. A call re-entered while it is still being evaluated
  /// returns its current answers; the oldest such call (the leader of the
  /// dependency cycle) re-evaluates until no table grows, then completes
  /// every table evaluated under it.
  const Table& solve(CallKey key) {
    auto [it, fresh] = tables_.try_emplace(key);
    if (fresh) it->second = std::make_unique<Table>();
    Table& t = *it->second;
    if (t.complete) return t;
    if (t.on_stack) {
      lower(t.stack_pos);
      return t;
    }
    if (!fresh && t.evaluated_in == pass_) {
      lower(t.low);
      return t;
    }

    const CRule& rule = rules_[key.rule];
    const std::size_t pos = stack_.size();
    stack_.push_back(pos);
    t.on_stack = true;
    t.stack_pos = pos;
    const std::size_t pending_mark = pending_.size();
    const std::uint64_t outer_pass = pass_;

    for (;;) {
      const std::size_t before = total_answers_;
      evaluate_body(rule, key.args, t);
      if (stack_[pos] < pos || total_answers_ == before) break;
      pass_ = ++pass_counter_;
    }
    pass_ = outer_pass;

    const std::size_t low = stack_[pos];
    stack_.pop_back();
    t.on_stack = false;
    t.low = low;
    t.evaluated_in = pass_;
    if (low == pos) {
      t.complete = true;
      for (std::size_t i = pending_mark; i < pending_.size(); ++i) pending_[i]->complete = true;
      pending_.resize(pending_mark);
    } else {
      pending_.push_back(&t);
      lower(low);
    }
    return t;
  }

  void lower(std::size_t low) {
    if (!stack_.empty()) stack_.back() = std::min(stack_.back(), low);
  }

  const KnowledgeBase& kb_;
  const std::vector<CRule>& rules_;
  const EvalOptions& options_;
  std::unordered_map<CallKey, std::unique_ptr<Table>, CallKeyHash> tables_;
  std::vector<std::size_t> stack_;  // lowest stack position each frame depends on
  std::vector<Table*> pending_;     // evaluated but not yet complete
  std::size_t total_answers_ = 0;
  std::uint64_t pass_ = 0;
  std::uint64_t pass_counter_ = 0;
  std::uint64_t ticks_ = 0;
};

}  // namespace

QueryResult evaluate(const KnowledgeBase& kb, const Program& program, const EvalOptions& options) {
  if (program.query.empty()) throw Error(ErrorKind::SyntaxError, "empty query", SourcePos{});

  Compiler compiler(kb, program);
  Scope scope;
  CConj query = compiler.conj(program.query, scope);
  std::vector<std::uint32_t> selected;
  for (const auto& v : program.select) selected.push_back(Compiler::slot_for(scope, v));
  auto rules = compiler.take_rules();

  Evaluator evaluator(kb, rules, options);
  auto rows = evaluator.conj(query, {Row(scope.size(), kUnbound)});

  std::vector<Row> projected;
  projected.reserve(rows.size());
  for (const auto& row : rows) {
    Row p;
    p.reserve(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) {
      auto v = row[selected[i]];
      if (v == kUnbound)
        throw Error(ErrorKind::UnsafeRule,
                    "variable $" + program.select[i] + " is not bound by the query");
      p.push_back(v);
    }
    projected.push_back(std::move(p));
  }
  std::sort(projected.begin(), projected.end());
  projected.erase(std::unique(projected.begin(), projected.end()), projected.end());

  std::unordered_map<EntityIndex, std::string> folded;
  auto label_key = [&](EntityIndex i) -> const std::string& {
    auto [it, fresh] = folded.try_emplace(i);
    if (fresh) it->second = fold_case(kb.entity(i).preferred_label);
    return it->second;
  };
  std::sort(projected.begin(), projected.end(), [&](const Row& a, const Row& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == b[i]) continue;
      const auto& la = label_key(a[i]);
      const auto& lb = label_key(b[i]);
      if (la != lb) return la < lb;
      return kb.entity(a[i]).id < kb.entity(b[i]).id;
    }
    return false;
  });

  QueryResult result;
  result.variables = program.select;
  result.rows.reserve(projected.size());
  for (const auto& p : projected) {
    BindingRow row;
    row.values.reserve(p.size());
    for (auto v : p) row.values.push_back(kb.entity(v).id);
    result.rows.push_back(std::move(row));
  }
  return result;
}

QueryResult run_query(const KnowledgeBase& kb, std::string_view query_text,
                      std::string_view rules_text) {
  return evaluate(kb, parse_program(query_text, rules_text));
}

}  // namespace kbir::query
