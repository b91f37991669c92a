#include "kbir/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

namespace kbir {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::PolyhierarchyViolation: return "PolyhierarchyViolation";
    case ErrorKind::HierarchyCycle: return "HierarchyCycle";
    case ErrorKind::InvalidKnowledgeBase: return "InvalidKnowledgeBase";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::Ambiguous: return "Ambiguous";
    case ErrorKind::UnknownEntity: return "UnknownEntity";
    case ErrorKind::UnknownRelationType: return "UnknownRelationType";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DuplicateRule: return "DuplicateRule";
    case ErrorKind::UnknownSelectVariable: return "UnknownSelectVariable";
    case ErrorKind::UnknownPredicate: return "UnknownPredicate";
    case ErrorKind::UnknownRole: return "UnknownRole";
    case ErrorKind::UnboundEquality: return "UnboundEquality";
    case ErrorKind::UnsafeRule: return "UnsafeRule";
    case ErrorKind::ConstantNotFound: return "ConstantNotFound";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::DuplicateDocId: return "DuplicateDocId";
    case ErrorKind::UnknownSubject: return "UnknownSubject";
    case ErrorKind::XmlMalformed: return "XmlMalformed";
    case ErrorKind::UnresolvedFragmentRef: return "UnresolvedFragmentRef";
    case ErrorKind::AssociationArityNot2: return "AssociationArityNot2";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::InvalidRequest: return "InvalidRequest";
  }
  return "Unknown";
}

std::ostream& operator<<(std::ostream& os, const EntityId& id) { return os << id.str(); }

std::string_view to_string(Direction d) noexcept {
  return d == Direction::Forward ? "forward" : "inverse";
}

// ---------------------------------------------------------------------------

std::string fold_case(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string normalize_label(std::string_view label) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::string out;
  out.reserve(label.size());
  bool pending_gap = false;
  for (char c : label) {
    if (is_space(c)) {
      pending_gap = !out.empty();
      continue;
    }
    if (pending_gap) out.push_back('_');
    pending_gap = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool is_entity_token(std::string_view id) noexcept {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

RelationType hierarchical_relation_type() {
  return RelationType{std::string(kHierarchicalRelation),
                      RelationCategory::GenericHierarchy,
                      std::string(kBroaderTermRole),
                      std::string(kNarrowerTermRole),
                      "Hierarchical Relation",
                      "Broader Term",
                      "Narrower Term"};
}

RelationType partitive_relation_type() {
  return RelationType{std::string(kPartitiveRelation),
                      RelationCategory::WholePartHierarchy,
                      std::string(kWholeRole),
                      std::string(kPartRole),
                      "Partitive Relation",
                      "Whole",
                      "Part"};
}

// ---------------------------------------------------------------------------

Adjacency::Adjacency(std::size_t node_count,
                     std::span<const std::pair<EntityIndex, EntityIndex>> edges) {
  offsets_.assign(node_count + 1, 0);
  for (const auto& [from, to] : edges) ++offsets_[from + 1];
  for (std::size_t i = 1; i <= node_count; ++i) offsets_[i] += offsets_[i - 1];
  targets_.resize(edges.size());
  auto cursor = offsets_;
  for (const auto& [from, to] : edges) targets_[cursor[from]++] = to;
  for (std::size_t i = 0; i < node_count; ++i)
    std::sort(targets_.begin() + offsets_[i], targets_.begin() + offsets_[i + 1]);
}

namespace {

void add_builtin_types(KbData& data) {
  auto has = [&](std::string_view name) {
    return std::any_of(data.relation_types.begin(), data.relation_types.end(),
                       [&](const RelationType& t) { return t.name == name; });
  };
  if (!has(kHierarchicalRelation)) data.relation_types.push_back(hierarchical_relation_type());
  if (!has(kPartitiveRelation)) data.relation_types.push_back(partitive_relation_type());
}

template <typename EdgeList>
std::pair<Adjacency, Adjacency> make_adjacency(std::size_t n, const EdgeList& edges) {
  std::vector<std::pair<EntityIndex, EntityIndex>> fwd, inv;
  fwd.reserve(edges.size());
  inv.reserve(edges.size());
  for (const auto& e : edges) {
    fwd.emplace_back(e.source, e.target);
    inv.emplace_back(e.target, e.source);
  }
  return {Adjacency(n, fwd), Adjacency(n, inv)};
}

}  // namespace

KnowledgeBase KnowledgeBase::index(KbData data) {
  KnowledgeBase kb;
  kb.data_ = std::move(data);
  const auto& d = kb.data_;
  const std::size_t n = d.entities.size();

  for (const auto& o : d.composition_overrides) kb.composition_.apply(o);

  kb.entity_index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!kb.entity_index_.emplace(d.entities[i].id.str(), static_cast<EntityIndex>(i)).second)
      throw Error(ErrorKind::DuplicateId, "duplicate entity id '" + d.entities[i].id.str() + "'");
  }
  for (std::size_t i = 0; i < d.relation_types.size(); ++i) {
    if (!kb.type_index_.emplace(d.relation_types[i].name, i).second)
      throw Error(ErrorKind::DuplicateId,
                  "duplicate relation type '" + d.relation_types[i].name + "'");
  }

  kb.types_.resize(d.relation_types.size());
  for (const auto& r : d.relations) {
    auto t = kb.type_index_.find(r.type);
    if (t == kb.type_index_.end())
      throw Error(ErrorKind::DanglingReference, "unknown relation type '" + r.type + "'");
    auto s = kb.find(r.source);
    auto o = kb.find(r.target);
    if (!s || !o)
      throw Error(ErrorKind::DanglingReference,
                  "relation " + r.type + "(" + r.source.str() + " -> " + r.target.str() +
                      ") references an unknown entity");
    Edge e{*s, *o};
    kb.types_[t->second].edges.push_back(e);
    auto cat = static_cast<std::size_t>(d.relation_types[t->second].category);
    kb.categories_[cat].edges.push_back(e);
  }
  for (auto& t : kb.types_) std::tie(t.forward, t.inverse) = make_adjacency(n, t.edges);
  for (auto& c : kb.categories_)
    if (!c.edges.empty()) std::tie(c.forward, c.inverse) = make_adjacency(n, c.edges);

  auto add_label = [&kb](const std::string& key, EntityIndex i) {
    if (key.empty()) return;
    auto& slot = kb.labels_[key];
    if (std::find(slot.begin(), slot.end(), i) == slot.end()) slot.push_back(i);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = d.entities[i];
    auto idx = static_cast<EntityIndex>(i);
    add_label(normalize_label(e.id.str()), idx);
    add_label(normalize_label(e.preferred_label), idx);
    for (const auto& s : e.synonyms) add_label(normalize_label(s), idx);
  }
  return kb;
}

std::optional<EntityIndex> KnowledgeBase::find(const EntityId& id) const noexcept {
  auto it = entity_index_.find(id.str());
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

EntityIndex KnowledgeBase::index_of(const EntityId& id) const {
  if (auto i = find(id)) return *i;
  throw Error(ErrorKind::UnknownEntity, "unknown entity '" + id.str() + "'");
}

const RelationType* KnowledgeBase::relation_type(std::string_view name) const noexcept {
  auto it = type_index_.find(std::string(name));
  return it == type_index_.end() ? nullptr : &data_.relation_types[it->second];
}

const RelationType& KnowledgeBase::require_relation_type(std::string_view name) const {
  if (const auto* t = relation_type(name)) return *t;
  throw Error(ErrorKind::UnknownRelationType,
              "unknown relation type '" + std::string(name) + "'");
}

std::span<const EntityIndex> KnowledgeBase::neighbors(RelationCategory category,
                                                      Direction dir,
                                                      EntityIndex node) const noexcept {
  const auto& c = categories_[static_cast<std::size_t>(category)];
  return dir == Direction::Forward ? c.forward[node] : c.inverse[node];
}

std::span<const EntityIndex> KnowledgeBase::neighbors(const RelationType& type,
                                                      Direction dir,
                                                      EntityIndex node) const noexcept {
  auto it = type_index_.find(type.name);
  if (it == type_index_.end()) return {};
  const auto& t = types_[it->second];
  return dir == Direction::Forward ? t.forward[node] : t.inverse[node];
}

std::span<const KnowledgeBase::Edge> KnowledgeBase::edges(const RelationType& type) const noexcept {
  auto it = type_index_.find(type.name);
  if (it == type_index_.end()) return {};
  return types_[it->second].edges;
}

std::span<const KnowledgeBase::Edge> KnowledgeBase::edges(RelationCategory category) const noexcept {
  return categories_[static_cast<std::size_t>(category)].edges;
}

std::span<const EntityIndex> KnowledgeBase::lookup_normalized(const std::string& key) const noexcept {
  auto it = labels_.find(key);
  if (it == labels_.end()) return {};
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {

ErrorKind error_kind_for(FindingCode code) noexcept {
  switch (code) {
    case FindingCode::DuplicateId: return ErrorKind::DuplicateId;
    case FindingCode::DanglingReference: return ErrorKind::DanglingReference;
    case FindingCode::PolyhierarchyViolation: return ErrorKind::PolyhierarchyViolation;
    case FindingCode::HierarchyCycle: return ErrorKind::HierarchyCycle;
    default: return ErrorKind::InvalidKnowledgeBase;
  }
}

}  // namespace

KnowledgeBase build_kb(KbData data) {
  add_builtin_types(data);
  auto report = validate(data);
  for (const auto& f : report.findings) {
    if (f.severity != Severity::Error) continue;
    auto kind = error_kind_for(f.code);
    std::string message = f.message;
    throw BuildError(kind, message, std::move(report));
  }
  return KnowledgeBase::index(std::move(data));
}

KnowledgeBase build_kb_permissive(KbData data) {
  add_builtin_types(data);
  return KnowledgeBase::index(std::move(data));
}

ValidationReport validate_kb(const KnowledgeBase& kb) { return validate(kb.data()); }

// ---------------------------------------------------------------------------

EntityIndex resolve_index(const KnowledgeBase& kb, std::string_view label) {
  if (auto exact = kb.find(EntityId(std::string(label)))) return *exact;
  auto key = normalize_label(label);
  auto hits = kb.lookup_normalized(key);
  if (hits.empty())
    throw Error(ErrorKind::NotFound, "no entity matches '" + std::string(label) + "'");
  if (hits.size() > 1) {
    std::string ids;
    for (auto i : hits) ids += (ids.empty() ? "" : ", ") + kb.entity(i).id.str();
    throw Error(ErrorKind::Ambiguous,
                "'" + std::string(label) + "' matches several entities: " + ids);
  }
  return hits.front();
}

EntityId resolve_label(const KnowledgeBase& kb, std::string_view label) {
  return kb.entity(resolve_index(kb, label)).id;
}

}  // namespace kbir
