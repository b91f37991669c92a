#include <gtest/gtest.h>

#include <thread>

#include "kbir/inference.hpp"
#include "kbir/query.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace kbir::query {
namespace {

std::vector<std::string> column(const QueryResult& r, const char* var) {
  std::vector<std::string> out;
  for (const auto& v : r.column_values(var)) out.push_back(v.str());
  return out;
}

ErrorKind failure(const KnowledgeBase& kb, std::string_view q, std::string_view rules = {}) {
  try {
    run_query(kb, q, rules);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "query succeeded: " << q;
  return ErrorKind::InvalidArgument;
}

using Strings = std::vector<std::string>;

TEST(Evaluate, MethodologySample) {
  auto r = run_query(test::asist(), "Methodology($TOPIC : isMethodOf, indexing : isAdopting)?");
  EXPECT_EQ(column(r, "TOPIC"),
            (Strings{"facet_analysis", "index_languages", "literary_warrant", "weighting"}));
}

TEST(Evaluate, UsageSample) {
  auto r = run_query(test::asist(), "Usage($TOPIC : isInstrumentOf, indexing : isUsing)?");
  EXPECT_EQ(column(r, "TOPIC"),
            (Strings{"authority_files", "classification", "classification_schemes", "index_terms"}));
}

TEST(Evaluate, MemberOrderDoesNotMatter) {
  auto r = run_query(test::asist(), "Usage(indexing : isUsing, $TOPIC : isInstrumentOf)?");
  EXPECT_EQ(r.rows.size(), 4u);
}

TEST(Evaluate, ProductionWithHierarchicalInference) {
  auto r = run_query(test::asist(),
                     "Production($TOPIC : isProducing, $PRODUCT :\nisProductOf),\n"
                     "narrower-term(controlled_vocabularies, $PRODUCT)?",
                     prelude_text());
  std::set<std::string> topics;
  for (const auto& v : column(r, "TOPIC")) topics.insert(v);
  EXPECT_EQ(topics, (std::set<std::string>{"automatic_indexing", "index_language_construction",
                                           "subject_heading_lists", "subject_headings",
                                           "vocabulary_control"}));
}

TEST(Evaluate, InverseProduction) {
  auto r = run_query(test::asist(),
                     "select $TOPIC from Production($TOPIC : isProductOf, $PRODUCT : isProducing),\n"
                     "narrower-term(controlled_vocabularies, $PRODUCT)?");
  EXPECT_EQ(column(r, "TOPIC"), (Strings{"authority_files", "thesauri"}));
}

TEST(Evaluate, RowsAreDistinctAndOrderedByLabel) {
  auto r = run_query(test::asist(), "select $B from narrower-term($A, $B), $A = thesauri?");
  EXPECT_EQ(column(r, "B"), (Strings{"faceted_thesauri", "multilingual_thesauri", "thesauri"}));
}

TEST(Evaluate, AllPairsOfAType) {
  auto r = run_query(test::asist(), "Production($A : isProducing, $B : isProductOf)?");
  EXPECT_EQ(r.rows.size(), 7u);
  EXPECT_EQ(r.variables, (Strings{"A", "B"}));
}

TEST(Evaluate, BuiltinHierarchicalRelation) {
  auto r = run_query(test::asist(),
                     "HierarchicalRelation(thesauri : broaderTermMember, $N : narrowerTermMember)?");
  EXPECT_EQ(column(r, "N"), (Strings{"faceted_thesauri", "multilingual_thesauri"}));
}

TEST(Evaluate, ConstantsResolveThroughLabels) {
  auto r = run_query(test::asist(), "Usage($T : isInstrumentOf, \"subject indexing\" : isUsing)?");
  EXPECT_EQ(r.rows.size(), 4u);
}

TEST(Evaluate, ValueStartsWith) {
  auto r = run_query(test::asist(), "narrower-term(controlled_vocabularies, $T), value-starts-with($T, \"index\")?");
  EXPECT_EQ(column(r, "T"), (Strings{"index_terms"}));
  auto all = run_query(test::asist(), "value-starts-with($T, \"Subject Ind\")?");
  EXPECT_EQ(column(all, "T"), (Strings{"indexing"}));
}

TEST(Evaluate, EqualityBindsEitherSide) {
  EXPECT_EQ(column(run_query(test::asist(), "$A = indexing?"), "A"), Strings{"indexing"});
  EXPECT_EQ(column(run_query(test::asist(), "indexing = $A?"), "A"), Strings{"indexing"});
  EXPECT_TRUE(run_query(test::asist(), "$A = indexing, $A = thesauri?").rows.empty());
}

TEST(Evaluate, LeftRecursiveRuleTerminates) {
  const char* rules =
      "reach($A, $B) :- { reach($A, $C), direct-narrower-term($C, $B) | "
      "direct-narrower-term($A, $B) }.";
  auto r = run_query(test::asist(), "reach(controlled_vocabularies, $X)?", rules);
  auto expected = descendants(test::asist(), EntityId("controlled_vocabularies"), false);
  EXPECT_EQ(r.rows.size(), expected.size());
}

TEST(Evaluate, MutualRecursion) {
  const char* rules =
      "even($A, $B) :- { $A = $B | direct-narrower-term($A, $C), odd($C, $B) }.\n"
      "odd($A, $B) :- direct-narrower-term($A, $C), even($C, $B).";
  auto r = run_query(test::songbirds(), "even(animals, $X)?", rules);
  auto values = column(r, "X");
  std::set<std::string> got(values.begin(), values.end());
  std::set<std::string> expected;
  auto kb_depth = [&](const std::string& id) {
    return ancestors(test::songbirds(), EntityId(id), false).size();
  };
  for (const auto& e : test::songbirds().data().entities)
    if (e.facet == "taxonomy" && kb_depth(e.id.str()) % 2 == 0) expected.insert(e.id.str());
  EXPECT_EQ(got, expected);
}

TEST(Errors, UnboundEquality) {
  EXPECT_EQ(failure(test::asist(), "$A = $B?"), ErrorKind::UnboundEquality);
  EXPECT_EQ(failure(test::asist(), "Usage($T : isInstrumentOf, indexing : isUsing), $A = $B?"),
            ErrorKind::UnboundEquality);
  EXPECT_EQ(failure(test::asist(), "r($A)?", "r($A) :- $A = $B."), ErrorKind::UnboundEquality);
}

TEST(Errors, UnboundEqualityThroughRules) {
  // Neither argument bound, so the reflexive branch has nothing to copy.
  EXPECT_EQ(failure(test::asist(), "narrower-term($A, $B)?"), ErrorKind::UnboundEquality);
}

TEST(Evaluate, GoalOrderFollowsBindings) {
  const auto& kb = test::asist();
  auto written = run_query(kb, "select $B from narrower-term($A, $B), $A = thesauri?");
  auto natural = run_query(kb, "narrower-term(thesauri, $B)?");
  EXPECT_EQ(column(written, "B"), column(natural, "B"));
  // Called with only the second argument bound.
  auto up = run_query(kb, "broader-term-2(faceted_thesauri, $X)?");
  EXPECT_EQ(column(up, "X"),
            (Strings{"controlled_vocabularies", "faceted_thesauri", "thesauri"}));
}

TEST(Errors, UnknownPredicate) {
  EXPECT_EQ(failure(test::asist(), "Teleportation($A : x, indexing : y)?"),
            ErrorKind::UnknownPredicate);
  EXPECT_EQ(failure(test::asist(), "narrowest-term($A, $B)?"), ErrorKind::UnknownPredicate);
  EXPECT_EQ(failure(test::asist(), "r($A)?", "r($A) :- undefined-rule($A)."),
            ErrorKind::UnknownPredicate);
  EXPECT_EQ(failure(test::asist(), "narrower-term($A)?"), ErrorKind::UnknownPredicate);
}

TEST(Errors, UnknownRole) {
  EXPECT_EQ(failure(test::asist(), "Usage($T : isProductOf, indexing : isUsing)?"),
            ErrorKind::UnknownRole);
  EXPECT_EQ(failure(test::asist(), "Usage($T, indexing)?"), ErrorKind::UnknownRole);
}

TEST(Errors, ConstantNotFound) {
  try {
    run_query(test::asist(), "Usage($T : isInstrumentOf,\n  quantum_chromodynamics : isUsing)?");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConstantNotFound);
    EXPECT_EQ(e.position(), (SourcePos{2, 3}));
  }
}

TEST(Errors, UnsafeRule) {
  EXPECT_EQ(failure(test::asist(), "r($A, $B)?", "r($A, $B) :- $A = indexing."),
            ErrorKind::UnsafeRule);
}

TEST(Errors, Timeout) {
  auto program = parse_program("strictly-narrower-term($A, $B)?");
  EvalOptions options;
  options.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  // A deep tree so evaluation runs long enough to hit the check.
  oracle::Forest chain;
  for (int i = 0; i < 3000; ++i) chain.parent.push_back(i - 1);
  auto kb = build_kb(oracle::forest_kb(chain));
  try {
    evaluate(kb, program, options);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Timeout);
  }
}

TEST(Prelude, MatchesReachabilityOracle) {
  std::mt19937 rng(7);
  const std::vector<std::tuple<const char*, int, int, bool>> variants = {
      {"direct-narrower-term", 1, 1, true},  {"strictly-narrower-term", 1, 1 << 20, true},
      {"narrower-term", 0, 1 << 20, true},   {"narrower-term-1", 0, 1, true},
      {"narrower-term-2", 0, 2, true},       {"narrower-term-3", 0, 3, true},
      {"direct-broader-term", 1, 1, false},  {"strictly-broader-term", 1, 1 << 20, false},
      {"broader-term", 0, 1 << 20, false},   {"broader-term-1", 0, 1, false},
      {"broader-term-2", 0, 2, false},       {"broader-term-3", 0, 3, false}};
  for (int round = 0; round < 8; ++round) {
    auto forest = oracle::random_forest(rng, 60);
    auto kb = build_kb(oracle::forest_kb(forest));
    for (const auto& [rule, lo, hi, down] : variants) {
      for (int a = 0; a < int(forest.parent.size()); ++a) {
        auto q = std::string(rule) + "(" + oracle::node_id(a) + ", $X)?";
        auto values = column(run_query(kb, q), "X");
        std::set<std::string> got(values.begin(), values.end());
        auto want = down ? oracle::below(forest, a, lo, hi) : oracle::above(forest, a, lo, hi);
        ASSERT_EQ(got, want) << q;
      }
    }
  }
}

TEST(Prelude, AgreesWithDescendants) {
  const auto& kb = test::asist();
  for (const auto& e : kb.data().entities) {
    auto r = run_query(kb, "narrower-term(" + e.id.str() + ", $X)?");
    auto values = r.column_values("X");
    std::set<EntityId> got(values.begin(), values.end());
    EXPECT_EQ(got, descendants(kb, e.id, true)) << e.id;
  }
}

TEST(Evaluate, ConcurrentEvaluationIsDeterministic) {
  const auto& kb = test::asist();
  auto program = parse_program("Production($T : isProducing, $P : isProductOf), narrower-term(controlled_vocabularies, $P)?");
  auto reference = evaluate(kb, program);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&] {
      for (int k = 0; k < 20; ++k)
        if (evaluate(kb, program).column_values("T") != reference.column_values("T")) ++mismatches;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

}  // namespace
}  // namespace kbir::query
