#include "kbir/documents.hpp"

#include <algorithm>

namespace kbir {

const std::vector<std::string>& PostingIndex::postings(EntityIndex e) const noexcept {
  static const std::vector<std::string> kEmpty;
  return e < postings_.size() ? postings_[e] : kEmpty;
}

const DocumentRecord* PostingIndex::document(const std::string& doc_id) const noexcept {
  auto it = by_id_.find(doc_id);
  return it == by_id_.end() ? nullptr : &documents_[it->second];
}

PostingIndex build_postings(const KnowledgeBase& kb, std::vector<DocumentRecord> docs) {
  PostingIndex index;
  index.postings_.resize(kb.entity_count());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& doc = docs[i];
    if (!index.by_id_.emplace(doc.doc_id, i).second)
      throw Error(ErrorKind::DuplicateDocId, "duplicate document id '" + doc.doc_id + "'");
    for (const auto& subject : doc.subjects) {
      EntityIndex e;
      try {
        e = resolve_index(kb, subject);
      } catch (const Error& err) {
        throw Error(ErrorKind::UnknownSubject,
                    "document '" + doc.doc_id + "': subject '" + subject + "': " + err.what());
      }
      index.postings_[e].push_back(doc.doc_id);
    }
  }
  for (auto& p : index.postings_) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  index.documents_ = std::move(docs);
  return index;
}

ResultSet retrieve(const PostingIndex& index, const KnowledgeBase& kb,
                   const std::set<EntityId>& topics) {
  ResultSet out;
  std::set<std::string> union_ids;
  for (const auto& id : topics) {
    auto e = kb.index_of(id);
    const auto& p = index.postings(e);
    out.topics.push_back({id, kb.entity(e).preferred_label, p.size()});
    union_ids.insert(p.begin(), p.end());
  }
  std::sort(out.topics.begin(), out.topics.end(), [](const TopicCount& a, const TopicCount& b) {
    auto fa = fold_case(a.label), fb = fold_case(b.label);
    return fa != fb ? fa < fb : a.id < b.id;
  });

  for (const auto& d : union_ids) out.documents.push_back(index.document(d));
  // Documents without a year go last.
  std::stable_sort(out.documents.begin(), out.documents.end(),
                   [](const DocumentRecord* a, const DocumentRecord* b) {
                     if (a->year.has_value() != b->year.has_value()) return a->year.has_value();
                     return a->year && *a->year != *b->year ? *a->year > *b->year : false;
                   });
  return out;
}

}  // namespace kbir
