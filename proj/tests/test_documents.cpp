#include <gtest/gtest.h>

#include "kbir/documents.hpp"
#include "kbir/query.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace kbir {
namespace {

DocumentRecord doc(std::string id, std::vector<std::string> subjects, std::optional<int> year = {}) {
  return DocumentRecord{std::move(id), "t", year, {}, std::move(subjects)};
}

const PostingIndex& corpus() {
  static const PostingIndex index =
      build_postings(test::asist(), test::load_fixture("asist.kb.json").documents);
  return index;
}

std::size_t count(const char* id) {
  return corpus().doc_count(test::asist().index_of(EntityId(id)));
}

TEST(Postings, Empty) {
  auto index = build_postings(test::asist(), {});
  EXPECT_EQ(index.document_count(), 0u);
  EXPECT_EQ(index.doc_count(0), 0u);
  EXPECT_TRUE(retrieve(index, test::asist(), {}).topics.empty());
}

TEST(Postings, SharedSubject) {
  const auto& kb = test::asist();
  auto index = build_postings(kb, {doc("x1", {"indexing"}), doc("x2", {"indexing"})});
  EXPECT_EQ(index.postings(kb.index_of(EntityId("indexing"))), (std::vector<std::string>{"x1", "x2"}));
}

TEST(Postings, SynonymSubject) {
  const auto& kb = test::asist();
  auto index = build_postings(kb, {doc("x1", {"subject indexing"})});
  EXPECT_EQ(index.postings(kb.index_of(EntityId("indexing"))), std::vector<std::string>{"x1"});
}

TEST(Postings, Errors) {
  const auto& kb = test::asist();
  try {
    build_postings(kb, {doc("x1", {"indexing"}), doc("x1", {"thesauri"})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateDocId);
  }
  try {
    build_postings(kb, {doc("x1", {"astrology"})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownSubject);
  }
}

TEST(Postings, CountsMatchLinearScan) {
  auto expected = oracle::scan_corpus(test::read_file(test::data_path("asist.kb.json")),
                                      test::read_file(test::data_path("asist_corpus.jsonl")));
  const auto& kb = test::asist();
  for (const auto& e : kb.data().entities) {
    auto it = expected.find(e.id.str());
    std::vector<std::string> want;
    if (it != expected.end()) want.assign(it->second.begin(), it->second.end());
    EXPECT_EQ(corpus().postings(kb.index_of(e.id)), want) << e.id;
  }
}

TEST(Retrieve, MethodologyTopics) {
  const auto& kb = test::asist();
  auto rows = query::run_query(kb, "Methodology($T : isMethodOf, indexing : isAdopting)?");
  auto values = rows.column_values("T");
  auto rs = retrieve(corpus(), kb, {values.begin(), values.end()});
  ASSERT_EQ(rs.topics.size(), 4u);
  EXPECT_EQ(rs.topics[0].label, "facet analysis");
  EXPECT_EQ(rs.topics[1].doc_count, 0u);
  std::size_t sum = 0;
  std::set<std::string> naive;
  for (const auto& t : rs.topics) {
    sum += t.doc_count;
    const auto& p = corpus().postings(kb.index_of(t.id));
    naive.insert(p.begin(), p.end());
  }
  EXPECT_LE(rs.documents.size(), sum);
  std::set<std::string> got;
  for (const auto* d : rs.documents) got.insert(d->doc_id);
  EXPECT_EQ(got, naive);
  EXPECT_EQ(rs.documents.size(), 12u);
}

TEST(Retrieve, InclusionExclusion) {
  const auto& kb = test::asist();
  auto rs = retrieve(corpus(), kb, {EntityId("facet_analysis"), EntityId("weighting")});
  EXPECT_EQ(rs.documents.size(), count("facet_analysis") + count("weighting") - 1);
  auto three = retrieve(corpus(), kb,
                        {EntityId("facet_analysis"), EntityId("weighting"), EntityId("literary_warrant")});
  EXPECT_EQ(three.documents.size(),
            count("facet_analysis") + count("weighting") + count("literary_warrant") - 2);
}

TEST(Retrieve, DocumentOrder) {
  const auto& kb = test::asist();
  auto index = build_postings(kb, {doc("b", {"indexing"}, 1990), doc("a", {"indexing"}, 1990),
                                   doc("c", {"indexing"}), doc("d", {"indexing"}, 2001)});
  auto rs = retrieve(index, kb, {EntityId("indexing")});
  std::vector<std::string> order;
  for (const auto* d : rs.documents) order.push_back(d->doc_id);
  EXPECT_EQ(order, (std::vector<std::string>{"d", "a", "b", "c"}));
}

TEST(Retrieve, UnknownTopic) {
  try {
    retrieve(corpus(), test::asist(), {EntityId("astrology")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownEntity);
  }
}

TEST(Retrieve, AddingADocumentBumpsOnlyItsSubject) {
  const auto& kb = test::asist();
  auto docs = test::load_fixture("asist.kb.json").documents;
  auto before = build_postings(kb, docs);
  docs.push_back(doc("extra", {"weighting"}));
  auto after = build_postings(kb, docs);
  for (EntityIndex i = 0; i < kb.entity_count(); ++i) {
    auto delta = after.doc_count(i) - before.doc_count(i);
    EXPECT_EQ(delta, kb.entity(i).id == EntityId("weighting") ? 1u : 0u);
  }
}

}  // namespace
}  // namespace kbir
