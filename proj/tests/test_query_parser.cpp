#include <gtest/gtest.h>

#include "kbir/query.hpp"
#include "support.hpp"

namespace kbir::query {
namespace {

SourcePos syntax_error_at(std::string_view query, std::string_view rules = {}) {
  try {
    parse_program(query, rules);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError) << e.what();
    EXPECT_TRUE(e.position().has_value());
    return e.position().value_or(SourcePos{0, 0});
  }
  ADD_FAILURE() << "no syntax error for: " << query;
  return {0, 0};
}

TEST(Prelude, VerbatimBlock) {
  auto text = prelude_text();
  EXPECT_TRUE(text.starts_with("direct-narrower-term($A, $B) :-"));
  EXPECT_EQ(text, test::read_file(test::data_path("prelude.tolog")));
  const auto& rules = prelude_rules();
  ASSERT_EQ(rules.size(), 12u);
  EXPECT_EQ(rules.front().name, "direct-narrower-term");
  EXPECT_EQ(rules.back().name, "broader-term-3");
}

TEST(Parser, AssociationAtom) {
  auto p = parse_program("Methodology($TOPIC : isMethodOf, indexing : isAdopting)?");
  ASSERT_EQ(p.query.size(), 1u);
  const auto& a = std::get<AssociationAtom>(p.query[0]);
  EXPECT_EQ(a.predicate, "Methodology");
  EXPECT_EQ(a.members[0].term.text, "TOPIC");
  EXPECT_TRUE(a.members[0].term.is_variable());
  EXPECT_EQ(a.members[0].role, "isMethodOf");
  EXPECT_EQ(a.members[1].term.text, "indexing");
  EXPECT_EQ(a.members[1].role, "isAdopting");
  EXPECT_EQ(p.select, std::vector<std::string>{"TOPIC"});
  EXPECT_FALSE(p.explicit_select);
}

TEST(Parser, ImplicitSelectInFirstAppearanceOrder) {
  auto p = parse_program(
      "Production($TOPIC : isProducing, $PRODUCT :\nisProductOf),\n"
      "narrower-term(controlled_vocabularies, $PRODUCT)?");
  EXPECT_EQ(p.select, (std::vector<std::string>{"TOPIC", "PRODUCT"}));
  EXPECT_EQ(p.query.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<RuleAtom>(p.query[1]));
}

TEST(Parser, ExplicitSelect) {
  auto p = parse_program("select $B from narrower-term($A, $B), $A = indexing?");
  EXPECT_TRUE(p.explicit_select);
  EXPECT_EQ(p.select, std::vector<std::string>{"B"});
}

TEST(Parser, UnknownSelectVariable) {
  try {
    parse_program("select $C from narrower-term($A, $B)?");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownSelectVariable);
    EXPECT_EQ(e.position(), (SourcePos{1, 8}));
  }
}

TEST(Parser, ImportLineIsWarnedAndSkipped) {
  auto p = parse_program(
      "import \"http://psi.ontopia.net/tolog/string/\" as s\n"
      "Usage($TOPIC : isInstrumentOf, indexing : isUsing)?");
  ASSERT_EQ(p.warnings.size(), 1u);
  EXPECT_EQ(p.warnings[0].pos, (SourcePos{1, 1}));
  EXPECT_EQ(p.query.size(), 1u);
}

TEST(Parser, InlineRulesAndDisjunction) {
  auto p = parse_program(
      "above($A, $B) :- { direct-narrower-term($B, $A) | $A = $B }.\n"
      "above($X, thesauri)?");
  ASSERT_TRUE(p.rules.count("above"));
  const auto& body = p.rules.at("above").body;
  ASSERT_EQ(body.size(), 1u);
  EXPECT_EQ(std::get<Disjunction>(body[0]).branches.size(), 2u);
}

TEST(Parser, UserRulesShadowPrelude) {
  auto p = parse_program("narrower-term($A, $B)?", "narrower-term($A, $B) :- $A = $B.");
  EXPECT_EQ(p.rules.at("narrower-term").body.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<EqualityAtom>(p.rules.at("narrower-term").body[0]));
  EXPECT_TRUE(p.rules.count("broader-term-3"));
}

TEST(Parser, DuplicateUserRule) {
  try {
    parse_program("r($A)?", "r($A) :- $A = a.\nr($A) :- $A = b.");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateRule);
  }
}

TEST(Parser, PreludeAsRulesTextIsNotADuplicate) {
  auto p = parse_program("narrower-term(controlled_vocabularies, $P)?", prelude_text());
  EXPECT_EQ(p.rules.size(), 12u);
}

TEST(Parser, WithoutPrelude) {
  ParseOptions options;
  options.include_prelude = false;
  auto p = parse_program("Usage($T : isInstrumentOf, indexing : isUsing)?", {}, options);
  EXPECT_TRUE(p.rules.empty());
}

TEST(Parser, Comments) {
  auto p = parse_program("/* tools */ Usage($T : isInstrumentOf, /* x */ indexing : isUsing)?");
  EXPECT_EQ(p.query.size(), 1u);
}

TEST(SyntaxErrors, MissingRoleReportsClosingParen) {
  EXPECT_EQ(syntax_error_at("Methodology($TOPIC : isMethodOf, indexing)?"), (SourcePos{1, 42}));
}

TEST(SyntaxErrors, MissingParenOnSecondLine) {
  EXPECT_EQ(syntax_error_at("Usage($TOPIC : isInstrumentOf,\n  indexing : isUsing?"),
            (SourcePos{2, 21}));
}

TEST(SyntaxErrors, StrayCharacterOnThirdLine) {
  EXPECT_EQ(syntax_error_at("select $A from\n  narrower-term($A, indexing)\n  & broader-term($A, $B)?"),
            (SourcePos{3, 3}));
}

TEST(SyntaxErrors, MissingQuestionMark) {
  EXPECT_EQ(syntax_error_at("Usage($T : isInstrumentOf, indexing : isUsing)"), (SourcePos{1, 47}));
}

TEST(SyntaxErrors, Others) {
  EXPECT_EQ(syntax_error_at(""), (SourcePos{1, 1}));
  EXPECT_EQ(syntax_error_at("value-starts-with($A, \"ind)?"), (SourcePos{1, 23}));
  EXPECT_EQ(syntax_error_at("r($A) :- $A = x\nr($B)?"), (SourcePos{2, 1}));
  EXPECT_EQ(syntax_error_at("{ a($X) }?"), (SourcePos{1, 9}));
  EXPECT_EQ(syntax_error_at("Usage($T : isUsing, $U : isUsing)?"), (SourcePos{1, 26}));
  EXPECT_EQ(syntax_error_at("a($X)? b($Y)?"), (SourcePos{1, 8}));
  EXPECT_EQ(syntax_error_at("ok($X)?", "r(a) :- $A = a."), (SourcePos{1, 3}));
}

TEST(SyntaxErrors, MessageCarriesLineAndColumn) {
  try {
    parse_program("Usage($T : isInstrumentOf,\n  indexing : isUsing?");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2, column 21"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace kbir::query
