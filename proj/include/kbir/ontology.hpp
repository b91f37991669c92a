#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbir/error.hpp"

namespace kbir {

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// Token identifying an entity (`controlled_vocabularies`). Compared
/// case-sensitively, exactly as stored.
class EntityId {
 public:
  EntityId() = default;
  explicit EntityId(std::string value) : value_(std::move(value)) {}
  explicit EntityId(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const EntityId&, const EntityId&) = default;
  friend bool operator==(const EntityId&, const EntityId&) = default;

 private:
  std::string value_;
};

std::ostream& operator<<(std::ostream& os, const EntityId& id);

/// Dense position of an entity inside one KnowledgeBase.
using EntityIndex = std::uint32_t;

// ---------------------------------------------------------------------------
// Relation inventory and composition
// ---------------------------------------------------------------------------

enum class RelationCategory : std::uint8_t {
  Equivalence,
  GenericHierarchy,
  WholePartHierarchy,
  ChronoEarlierLater,
  ChronoLaterEarlier,
  UnspecificAssociation,
  RawMaterialProduct,
  Causality,
  ActionProduct,
  PersonActorAction,
  InstitutionActorAction,
  PersonActorProduct,
  InstitutionActorProduct,
  FieldOfApplication,
};

inline constexpr std::size_t kCategoryCount = 14;

/// All categories in declaration order.
const std::array<RelationCategory, kCategoryCount>& all_categories() noexcept;

std::string_view to_string(RelationCategory category) noexcept;
/// Exact variant spelling, e.g. "GenericHierarchy".
std::optional<RelationCategory> parse_category(std::string_view text) noexcept;

/// Generic, whole-part and both chronological directions.
bool is_hierarchical(RelationCategory category) noexcept;
/// UnspecificAssociation plus the eight typed associative categories.
bool is_associative(RelationCategory category) noexcept;

enum class TransitivityVerdict : std::uint8_t {
  Transitive,     // "+"
  NotExpected,    // "-"
  NotApplicable,  // "O"
};

std::string_view to_string(TransitivityVerdict verdict) noexcept;
/// Accepts the variant names and the table symbols "+", "-", "O", "0".
std::optional<TransitivityVerdict> parse_verdict(std::string_view text) noexcept;

struct CompositionOverride {
  RelationCategory first;
  RelationCategory second;
  TransitivityVerdict verdict;
  friend bool operator==(const CompositionOverride&, const CompositionOverride&) = default;
};

/// Verdicts for chaining a relation of category `first` with one of
/// category `second`. Default-constructed tables hold the normative cells;
/// individual cells can be overridden.
class CompositionTable {
 public:
  CompositionTable();

  static const CompositionTable& standard();

  TransitivityVerdict operator()(RelationCategory first,
                                 RelationCategory second) const noexcept {
    return cells_[index(first)][index(second)];
  }

  void apply(const CompositionOverride& o) noexcept {
    cells_[index(o.first)][index(o.second)] = o.verdict;
  }

 private:
  static std::size_t index(RelationCategory c) noexcept {
    return static_cast<std::size_t>(c);
  }
  std::array<std::array<TransitivityVerdict, kCategoryCount>, kCategoryCount> cells_;
};

/// Normative composition, ignoring any per-KB overrides.
TransitivityVerdict compose(RelationCategory first, RelationCategory second) noexcept;

// ---------------------------------------------------------------------------
// Knowledge base inputs
// ---------------------------------------------------------------------------

struct Facet {
  std::string id;
  std::string label;
  friend bool operator==(const Facet&, const Facet&) = default;
};

struct Entity {
  EntityId id;
  std::string preferred_label;
  std::vector<std::string> synonyms;  // access vocabulary only
  std::string facet;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct RelationType {
  std::string name;  // query predicate, e.g. "Methodology"
  RelationCategory category = RelationCategory::UnspecificAssociation;
  std::string source_role;  // e.g. "isAdopting"
  std::string target_role;  // e.g. "isMethodOf"
  // Display names; empty means "use the token".
  std::string label;
  std::string source_role_label;
  std::string target_role_label;
  friend bool operator==(const RelationType&, const RelationType&) = default;
};

struct RelationInstance {
  std::string type;
  EntityId source;  // fills source_role
  EntityId target;  // fills target_role
  friend bool operator==(const RelationInstance&, const RelationInstance&) = default;
};

/// Everything a KnowledgeBase is built from.
struct KbData {
  std::vector<Facet> facets;
  std::vector<Entity> entities;
  std::vector<RelationType> relation_types;
  std::vector<RelationInstance> relations;
  std::vector<CompositionOverride> composition_overrides;
  friend bool operator==(const KbData&, const KbData&) = default;
};

/// Always present: generic hierarchy and whole-part edges under the names the
/// predefined rules use.
inline constexpr std::string_view kHierarchicalRelation = "HierarchicalRelation";
inline constexpr std::string_view kBroaderTermRole = "broaderTermMember";
inline constexpr std::string_view kNarrowerTermRole = "narrowerTermMember";
inline constexpr std::string_view kPartitiveRelation = "PartitiveRelation";
inline constexpr std::string_view kWholeRole = "wholeMember";
inline constexpr std::string_view kPartRole = "partMember";

RelationType hierarchical_relation_type();
RelationType partitive_relation_type();

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class FindingCode {
  DuplicateId,
  DanglingReference,
  PolyhierarchyViolation,
  HierarchyCycle,
  CrossFacetHierarchy,
  DuplicateLabel,
  SynonymConflict,
  InvalidId,
  InvalidRelationType,
  CompositionOverride,
};

std::string_view to_string(FindingCode code) noexcept;

enum class Severity { Error, Warning, Info };

std::string_view to_string(Severity severity) noexcept;

struct Finding {
  FindingCode code;
  Severity severity = Severity::Error;
  std::string message;
  std::vector<std::string> locations;  // ids or "$.relations[3]"-style paths
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const noexcept { return findings.empty(); }
  bool has_errors() const noexcept;
  std::size_t count(FindingCode code) const noexcept;
};

/// Checks every knowledge-base invariant and reports all violations.
ValidationReport validate(const KbData& data);

// ---------------------------------------------------------------------------
// KnowledgeBase
// ---------------------------------------------------------------------------

enum class Direction : std::uint8_t { Forward, Inverse };

std::string_view to_string(Direction d) noexcept;

/// Compressed adjacency list over entity indices.
class Adjacency {
 public:
  Adjacency() = default;
  Adjacency(std::size_t node_count,
            std::span<const std::pair<EntityIndex, EntityIndex>> edges);

  std::span<const EntityIndex> operator[](EntityIndex node) const noexcept {
    if (offsets_.empty()) return {};
    return {targets_.data() + offsets_[node], targets_.data() + offsets_[node + 1]};
  }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<EntityIndex> targets_;
};

class KnowledgeBase;

/// Throws unless every error-severity invariant holds. The first error
/// determines the ErrorKind; the full report is attached.
KnowledgeBase build_kb(KbData data);

/// Builds indices without enforcing hierarchy invariants (cycles,
/// polyhierarchies, labels). References must still resolve.
KnowledgeBase build_kb_permissive(KbData data);

class BuildError : public Error {
 public:
  BuildError(ErrorKind kind, const std::string& message, ValidationReport report)
      : Error(kind, message), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Immutable after construction; safe to share between threads.
class KnowledgeBase {
 public:
  struct Edge {
    EntityIndex source;
    EntityIndex target;
  };

  const KbData& data() const noexcept { return data_; }
  std::size_t entity_count() const noexcept { return data_.entities.size(); }
  const Entity& entity(EntityIndex i) const noexcept { return data_.entities[i]; }
  const Entity& entity(const EntityId& id) const { return entity(index_of(id)); }

  std::optional<EntityIndex> find(const EntityId& id) const noexcept;
  /// Throws Error{UnknownEntity}.
  EntityIndex index_of(const EntityId& id) const;
  bool contains(const EntityId& id) const noexcept { return find(id).has_value(); }

  const RelationType* relation_type(std::string_view name) const noexcept;
  /// Throws Error{UnknownRelationType}.
  const RelationType& require_relation_type(std::string_view name) const;

  const CompositionTable& composition() const noexcept { return composition_; }

  /// Neighbours along every relation of `category`. Forward follows
  /// source→target (broader→narrower for hierarchies).
  std::span<const EntityIndex> neighbors(RelationCategory category, Direction dir,
                                         EntityIndex node) const noexcept;
  std::span<const EntityIndex> neighbors(const RelationType& type, Direction dir,
                                         EntityIndex node) const noexcept;
  std::span<const Edge> edges(const RelationType& type) const noexcept;
  std::span<const Edge> edges(RelationCategory category) const noexcept;

  std::span<const EntityIndex> children(EntityIndex node) const noexcept {
    return neighbors(RelationCategory::GenericHierarchy, Direction::Forward, node);
  }
  std::span<const EntityIndex> parents(EntityIndex node) const noexcept {
    return neighbors(RelationCategory::GenericHierarchy, Direction::Inverse, node);
  }

  /// Entities whose id, preferred label or synonym normalizes to `key`.
  std::span<const EntityIndex> lookup_normalized(const std::string& key) const noexcept;

 private:
  friend KnowledgeBase build_kb(KbData data);
  friend KnowledgeBase build_kb_permissive(KbData data);
  static KnowledgeBase index(KbData data);

  struct TypeIndex {
    std::vector<Edge> edges;
    Adjacency forward;
    Adjacency inverse;
  };
  struct CategoryIndex {
    std::vector<Edge> edges;
    Adjacency forward;
    Adjacency inverse;
  };

  KbData data_;
  CompositionTable composition_;
  std::unordered_map<std::string, EntityIndex> entity_index_;
  std::unordered_map<std::string, std::size_t> type_index_;
  std::vector<TypeIndex> types_;
  std::array<CategoryIndex, kCategoryCount> categories_;
  std::unordered_map<std::string, std::vector<EntityIndex>> labels_;
};

ValidationReport validate_kb(const KnowledgeBase& kb);

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Case-folds, trims and turns internal whitespace runs into one underscore.
std::string normalize_label(std::string_view label);

/// Case-folded copy, used for label ordering.
std::string fold_case(std::string_view text);

/// Resolves an id, preferred label or synonym. An exact id match wins;
/// otherwise the normalized form must identify exactly one entity.
/// Throws Error{NotFound} or Error{Ambiguous}.
EntityId resolve_label(const KnowledgeBase& kb, std::string_view label);

/// Index-level variant of resolve_label.
EntityIndex resolve_index(const KnowledgeBase& kb, std::string_view label);

/// True when `id` is a lowercase token: letters, digits, underscore.
bool is_entity_token(std::string_view id) noexcept;

}  // namespace kbir

template <>
struct std::hash<kbir::EntityId> {
  std::size_t operator()(const kbir::EntityId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
