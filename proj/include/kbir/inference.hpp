#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kbir/ontology.hpp"

namespace kbir {

/// Depth bound for closures; std::nullopt means unbounded.
using MaxDepth = std::optional<std::size_t>;
inline constexpr MaxDepth kUnbounded = std::nullopt;

struct ClosureRequest {
  EntityId start;
  RelationCategory category = RelationCategory::GenericHierarchy;
  Direction direction = Direction::Forward;
  bool include_self = false;
  MaxDepth max_depth = kUnbounded;
};

/// Breadth-first closure over one relation category. Returns indices in
/// discovery order. A bounded max_depth must be at least 1.
std::vector<EntityIndex> closure_indices(const KnowledgeBase& kb, EntityIndex start,
                                         RelationCategory category, Direction direction,
                                         bool include_self, MaxDepth max_depth);

std::set<EntityId> closure(const KnowledgeBase& kb, const ClosureRequest& request);

/// Narrower terms along generic hierarchy edges.
std::set<EntityId> descendants(const KnowledgeBase& kb, const EntityId& e, bool include_self,
                               MaxDepth max_depth = kUnbounded);

/// Broader terms along generic hierarchy edges.
std::set<EntityId> ancestors(const KnowledgeBase& kb, const EntityId& e, bool include_self,
                             MaxDepth max_depth = kUnbounded);

/// A relational path: which categories are chained, in which direction.
class PathSpec {
 public:
  struct Step {
    RelationCategory category;
    Direction direction = Direction::Forward;
  };

  /// Throws Error{InvalidArgument} when empty or when Equivalence appears
  /// after the first step.
  explicit PathSpec(std::vector<Step> steps);
  PathSpec(std::initializer_list<RelationCategory> categories);

  const std::vector<Step>& steps() const noexcept { return steps_; }

 private:
  std::vector<Step> steps_;
};

/// Transitive if every adjacent pair composes to Transitive; NotApplicable
/// if any pair is NotApplicable; NotExpected otherwise. Hierarchy steps
/// that switch between descent and ascent never compose.
TransitivityVerdict check_path(const KnowledgeBase& kb, const PathSpec& spec);

/// Entities carrying relation `rel_type` towards `target`, directly or
/// inherited down the generic hierarchy from a direct carrier.
std::set<EntityId> carriers_of(const KnowledgeBase& kb, std::string_view rel_type,
                               const EntityId& target);

struct InheritedRelation {
  std::string type;
  Direction direction;  // Forward: the entity fills the source role
  EntityId other;
  std::optional<EntityId> inherited_from;  // empty when attached directly

  bool direct() const noexcept { return !inherited_from.has_value(); }
  friend bool operator==(const InheritedRelation&, const InheritedRelation&) = default;
};

/// Typed (non-generic) relations of `e` and of all its ancestors. The
/// nearest attachment wins when the same relation recurs higher up.
std::vector<InheritedRelation> inherited_relations(const KnowledgeBase& kb, const EntityId& e);

/// Layers of the undirected UnspecificAssociation graph around `e`:
/// layer k holds entities first reached at distance k. Keys 1..max_len are
/// always present.
std::map<std::size_t, std::set<EntityId>> rt_neighborhood(const KnowledgeBase& kb,
                                                          const EntityId& e,
                                                          std::size_t max_len);

}  // namespace kbir
