#include <algorithm>
#include <cctype>
#include <set>

#include "kbir/prelude_text.hpp"
#include "kbir/query.hpp"

namespace kbir::query {

namespace {

enum class Tok {
  Variable,
  Ident,
  String,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Colon,
  Implies,  // :-
  Dot,
  Question,
  Pipe,
  Equals,
  End,
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Variable: return "variable";
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Implies: return "':-'";
    case Tok::Dot: return "'.'";
    case Tok::Question: return "'?'";
    case Tok::Pipe: return "'|'";
    case Tok::Equals: return "'='";
    case Tok::End: return "end of input";
  }
  return "token";
}

struct Token {
  Tok type;
  std::string text;
  SourcePos pos;
};

[[noreturn]] void syntax_error(const std::string& message, SourcePos pos) {
  throw Error(ErrorKind::SyntaxError,
              message + " at line " + std::to_string(pos.line) + ", column " +
                  std::to_string(pos.column),
              pos);
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      SourcePos start = pos_;
      if (at_end()) {
        out.push_back({Tok::End, "", start});
        return out;
      }
      char c = peek();
      if (c == '$') {
        advance();
        std::string name;
        while (!at_end() && is_word(peek())) name.push_back(advance());
        if (name.empty()) syntax_error("expected a variable name after '$'", start);
        out.push_back({Tok::Variable, std::move(name), start});
      } else if (is_word(c)) {
        std::string word;
        while (!at_end() && (is_word(peek()) || peek() == '-')) word.push_back(advance());
        out.push_back({Tok::Ident, std::move(word), start});
      } else if (c == '"') {
        advance();
        std::string value;
        for (;;) {
          if (at_end()) syntax_error("unterminated string", start);
          char ch = advance();
          if (ch == '"') break;
          if (ch == '\\' && !at_end()) ch = advance();
          value.push_back(ch);
        }
        out.push_back({Tok::String, std::move(value), start});
      } else if (c == ':') {
        advance();
        if (!at_end() && peek() == '-') {
          advance();
          out.push_back({Tok::Implies, ":-", start});
        } else {
          out.push_back({Tok::Colon, ":", start});
        }
      } else {
        Tok t;
        switch (c) {
          case '(': t = Tok::LParen; break;
          case ')': t = Tok::RParen; break;
          case '{': t = Tok::LBrace; break;
          case '}': t = Tok::RBrace; break;
          case ',': t = Tok::Comma; break;
          case '.': t = Tok::Dot; break;
          case '?': t = Tok::Question; break;
          case '|': t = Tok::Pipe; break;
          case '=': t = Tok::Equals; break;
          default:
            syntax_error(std::string("unexpected character '") + c + "'", start);
        }
        advance();
        out.push_back({t, std::string(1, c), start});
      }
    }
  }

 private:
  static bool is_word(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  }
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }
  char advance() {
    char c = text_[i_++];
    if (c == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    return c;
  }
  void skip_blank() {
    while (!at_end()) {
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        advance();
      } else if (text_.substr(i_, 2) == "/*") {
        SourcePos start = pos_;
        advance();
        advance();
        while (!at_end() && text_.substr(i_, 2) != "*/") advance();
        if (at_end()) syntax_error("unterminated comment", start);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

class Parser {
 public:
  Parser(std::string_view text, std::vector<Diagnostic>& warnings)
      : tokens_(Lexer(text).run()), warnings_(warnings) {}

  /// Rules and imports until end of input.
  std::vector<Rule> rules_only() {
    std::vector<Rule> rules;
    while (peek().type != Tok::End) {
      if (try_import()) continue;
      auto head = parse_goal();
      rules.push_back(finish_rule(std::move(head)));
    }
    return rules;
  }

  /// Leading rules and imports, then `[select ... from] body ?`.
  void query(std::vector<Rule>& rules, Program& program) {
    if (peek().type == Tok::End) syntax_error("expected a query", peek().pos);
    for (;;) {
      if (try_import()) continue;
      if (is_keyword(peek(), "select")) {
        next();
        program.explicit_select = true;
        for (;;) {
          auto v = expect(Tok::Variable, "a variable in the select list");
          program.select.push_back(v.text);
          select_pos_.push_back(v.pos);
          if (peek().type != Tok::Comma) break;
          next();
        }
        if (!is_keyword(peek(), "from")) syntax_error("expected 'from'", peek().pos);
        next();
        program.query = parse_conjunction();
        break;
      }
      if (peek().type == Tok::End) syntax_error("expected a query", peek().pos);
      auto first = parse_goal();
      if (peek().type == Tok::Implies) {
        rules.push_back(finish_rule(std::move(first)));
        continue;
      }
      program.query.push_back(std::move(first));
      while (peek().type == Tok::Comma) {
        next();
        program.query.push_back(parse_goal());
      }
      break;
    }
    expect(Tok::Question, "'?' at the end of the query");
    if (peek().type != Tok::End) syntax_error("unexpected input after '?'", peek().pos);
  }

  const std::vector<SourcePos>& select_positions() const { return select_pos_; }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  static bool is_keyword(const Token& t, std::string_view word) {
    return t.type == Tok::Ident && t.text == word;
  }

  const Token& expect(Tok type, std::string_view what) {
    if (peek().type != type)
      syntax_error("expected " + std::string(what) + ", found " +
                       std::string(describe(peek().type)),
                   peek().pos);
    return next();
  }

  bool try_import() {
    if (!is_keyword(peek(), "import") || peek(1).type != Tok::String) return false;
    SourcePos at = next().pos;
    std::string uri = next().text;
    if (is_keyword(peek(), "as")) {
      next();
      expect(Tok::Ident, "a prefix name after 'as'");
    }
    warnings_.push_back({"import of \"" + uri + "\" ignored; string modules are not supported", at});
    return true;
  }

  Term parse_term() {
    const auto& t = peek();
    switch (t.type) {
      case Tok::Variable: next(); return {Term::Kind::Variable, t.text, t.pos};
      case Tok::Ident: next(); return {Term::Kind::Constant, t.text, t.pos};
      case Tok::String: next(); return {Term::Kind::String, t.text, t.pos};
      default:
        syntax_error("expected a variable, topic or string, found " +
                         std::string(describe(t.type)),
                     t.pos);
    }
  }

  Conjunction parse_conjunction() {
    Conjunction goals;
    goals.push_back(parse_goal());
    while (peek().type == Tok::Comma) {
      next();
      goals.push_back(parse_goal());
    }
    return goals;
  }

  Goal parse_goal() {
    const auto& t = peek();
    if (t.type == Tok::LBrace) {
      SourcePos at = next().pos;
      Disjunction d{{}, at};
      d.branches.push_back(parse_conjunction());
      while (peek().type == Tok::Pipe) {
        next();
        d.branches.push_back(parse_conjunction());
      }
      if (d.branches.size() < 2)
        syntax_error("a disjunction needs at least two branches separated by '|'", peek().pos);
      expect(Tok::RBrace, "'}' or '|'");
      return d;
    }
    if (t.type == Tok::Ident && peek(1).type == Tok::LParen) return parse_atom();

    Term lhs = parse_term();
    if (peek().type != Tok::Equals)
      syntax_error("expected '=' or a predicate call, found " +
                       std::string(describe(peek().type)),
                   peek().pos);
    SourcePos at = next().pos;
    Term rhs = parse_term();
    return EqualityAtom{std::move(lhs), std::move(rhs), at};
  }

  Goal parse_atom() {
    const Token& name = next();
    SourcePos at = name.pos;
    std::string predicate = name.text;
    expect(Tok::LParen, "'('");

    std::vector<Term> terms;
    std::vector<std::pair<std::string, SourcePos>> roles;
    bool tagged = false;
    if (peek().type != Tok::RParen) {
      for (;;) {
        terms.push_back(parse_term());
        if (terms.size() == 1) tagged = peek().type == Tok::Colon;
        if (tagged) {
          if (peek().type != Tok::Colon)
            syntax_error("expected ':' and a role after '" + terms.back().text + "'", peek().pos);
          next();
          const auto& role = expect(Tok::Ident, "a role name after ':'");
          roles.emplace_back(role.text, role.pos);
        } else if (peek().type == Tok::Colon) {
          syntax_error("role-tagged and positional arguments cannot be mixed", peek().pos);
        }
        if (peek().type != Tok::Comma) break;
        next();
      }
    }
    const auto& close = expect(Tok::RParen, "',' or ')'");

    if (!tagged) return RuleAtom{std::move(predicate), std::move(terms), at};
    if (terms.size() != 2)
      syntax_error("association '" + predicate + "' needs exactly two role-tagged members",
                   close.pos);
    if (roles[0].first == roles[1].first)
      syntax_error("association '" + predicate + "' uses role '" + roles[0].first + "' twice",
                   roles[1].second);
    AssociationAtom atom{std::move(predicate), {}, at};
    for (std::size_t i = 0; i < 2; ++i)
      atom.members[i] = Member{std::move(terms[i]), roles[i].first, roles[i].second};
    return atom;
  }

  Rule finish_rule(Goal head) {
    auto* atom = std::get_if<RuleAtom>(&head);
    SourcePos at = peek().pos;
    if (!atom) syntax_error("expected a rule head 'name($A, ...)'", at);
    if (peek().type != Tok::Implies)
      syntax_error("expected ':-' after rule head '" + atom->predicate + "'", at);
    next();
    Rule rule{atom->predicate, {}, {}, atom->pos};
    for (const auto& arg : atom->args) {
      if (!arg.is_variable())
        syntax_error("rule parameters must be variables", arg.pos);
      rule.params.push_back(arg.text);
    }
    rule.body = parse_conjunction();
    expect(Tok::Dot, "'.' at the end of rule '" + rule.name + "'");
    return rule;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& warnings_;
  std::vector<SourcePos> select_pos_;
};

void collect_variables(const Conjunction& body, std::vector<std::string>& out);

void collect_term(const Term& t, std::vector<std::string>& out) {
  if (t.is_variable() && std::find(out.begin(), out.end(), t.text) == out.end())
    out.push_back(t.text);
}

void collect_goal(const Goal& g, std::vector<std::string>& out) {
  std::visit(
      [&out](const auto& goal) {
        using T = std::decay_t<decltype(goal)>;
        if constexpr (std::is_same_v<T, AssociationAtom>) {
          for (const auto& m : goal.members) collect_term(m.term, out);
        } else if constexpr (std::is_same_v<T, RuleAtom>) {
          for (const auto& a : goal.args) collect_term(a, out);
        } else if constexpr (std::is_same_v<T, EqualityAtom>) {
          collect_term(goal.lhs, out);
          collect_term(goal.rhs, out);
        } else {
          for (const auto& branch : goal.branches) collect_variables(branch, out);
        }
      },
      g);
}

void collect_variables(const Conjunction& body, std::vector<std::string>& out) {
  for (const auto& g : body) collect_goal(g, out);
}

void add_user_rules(std::vector<Rule> rules, std::set<std::string>& user_names,
                    std::map<std::string, Rule>& into) {
  for (auto& r : rules) {
    if (!user_names.insert(r.name).second)
      throw Error(ErrorKind::DuplicateRule, "rule '" + r.name + "' is defined more than once",
                  r.pos);
    into.insert_or_assign(r.name, std::move(r));
  }
}

}  // namespace

std::string_view prelude_text() noexcept { return detail::kPreludeText; }

const std::vector<Rule>& prelude_rules() {
  static const std::vector<Rule> rules = parse_rules(prelude_text());
  return rules;
}

std::vector<Rule> parse_rules(std::string_view text, std::vector<Diagnostic>* warnings) {
  std::vector<Diagnostic> local;
  Parser parser(text, warnings ? *warnings : local);
  auto rules = parser.rules_only();
  std::set<std::string> names;
  for (const auto& r : rules)
    if (!names.insert(r.name).second)
      throw Error(ErrorKind::DuplicateRule, "rule '" + r.name + "' is defined more than once",
                  r.pos);
  return rules;
}

Program parse_program(std::string_view query_text, std::string_view rules_text,
                      const ParseOptions& options) {
  Program program;
  if (options.include_prelude)
    for (const auto& r : prelude_rules()) program.rules.emplace(r.name, r);

  std::set<std::string> user_names;
  {
    Parser parser(rules_text, program.warnings);
    add_user_rules(parser.rules_only(), user_names, program.rules);
  }

  Parser parser(query_text, program.warnings);
  std::vector<Rule> inline_rules;
  parser.query(inline_rules, program);
  add_user_rules(std::move(inline_rules), user_names, program.rules);

  std::vector<std::string> body_vars;
  collect_variables(program.query, body_vars);
  if (program.explicit_select) {
    for (std::size_t i = 0; i < program.select.size(); ++i) {
      const auto& v = program.select[i];
      if (std::find(body_vars.begin(), body_vars.end(), v) == body_vars.end())
        throw Error(ErrorKind::UnknownSelectVariable,
                    "selected variable $" + v + " does not occur in the query",
                    parser.select_positions()[i]);
    }
  } else {
    program.select = std::move(body_vars);
  }
  return program;
}

}  // namespace kbir::query
