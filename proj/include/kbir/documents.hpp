#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbir/ontology.hpp"

namespace kbir {

struct DocumentRecord {
  std::string doc_id;
  std::string title;
  std::optional<int> year;
  std::vector<std::string> creators;
  std::vector<std::string> subjects;  // entity ids, labels or synonyms
  friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

/// Inverted index from entities to the documents indexed with them.
class PostingIndex {
 public:
  PostingIndex() = default;

  /// Document ids posted under `e`, sorted. Empty for unknown entities.
  const std::vector<std::string>& postings(EntityIndex e) const noexcept;
  std::size_t doc_count(EntityIndex e) const noexcept { return postings(e).size(); }

  const DocumentRecord* document(const std::string& doc_id) const noexcept;
  std::size_t document_count() const noexcept { return documents_.size(); }
  const std::vector<DocumentRecord>& documents() const noexcept { return documents_; }

 private:
  friend PostingIndex build_postings(const KnowledgeBase& kb, std::vector<DocumentRecord> docs);

  std::vector<DocumentRecord> documents_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::vector<std::string>> postings_;
};

/// Resolves every subject through resolve_label. Throws Error{DuplicateDocId}
/// or Error{UnknownSubject}.
PostingIndex build_postings(const KnowledgeBase& kb, std::vector<DocumentRecord> docs);

struct TopicCount {
  EntityId id;
  std::string label;
  std::size_t doc_count = 0;
  friend bool operator==(const TopicCount&, const TopicCount&) = default;
};

struct ResultSet {
  std::vector<TopicCount> topics;                // by case-folded label, then id
  std::vector<const DocumentRecord*> documents;  // union; newest first, then doc_id
};

/// Throws Error{UnknownEntity}.
ResultSet retrieve(const PostingIndex& index, const KnowledgeBase& kb,
                   const std::set<EntityId>& topics);

}  // namespace kbir
