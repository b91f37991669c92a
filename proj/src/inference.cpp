#include "kbir/inference.hpp"

#include <algorithm>
#include <tuple>

namespace kbir {

namespace {

bool is_structural(RelationCategory c) noexcept {
  return c == RelationCategory::GenericHierarchy || c == RelationCategory::WholePartHierarchy;
}

std::set<EntityId> to_ids(const KnowledgeBase& kb, const std::vector<EntityIndex>& indices) {
  std::set<EntityId> out;
  for (auto i : indices) out.insert(kb.entity(i).id);
  return out;
}

}  // namespace

std::vector<EntityIndex> closure_indices(const KnowledgeBase& kb, EntityIndex start,
                                         RelationCategory category, Direction direction,
                                         bool include_self, MaxDepth max_depth) {
  if (max_depth && *max_depth == 0)
    throw Error(ErrorKind::InvalidArgument, "max_depth must be at least 1");

  // Visited guard stays even though validated hierarchies are acyclic.
  std::vector<bool> seen(kb.entity_count(), false);
  std::vector<EntityIndex> out;
  std::vector<EntityIndex> frontier{start}, next;
  seen[start] = true;
  bool start_listed = include_self;
  if (include_self) out.push_back(start);

  for (std::size_t depth = 1; !frontier.empty(); ++depth) {
    if (max_depth && depth > *max_depth) break;
    next.clear();
    for (auto node : frontier) {
      for (auto w : kb.neighbors(category, direction, node)) {
        // Only permissive data can lead back to the start.
        if (w == start && !start_listed) {
          start_listed = true;
          out.push_back(w);
        }
        if (seen[w]) continue;
        seen[w] = true;
        out.push_back(w);
        next.push_back(w);
      }
    }
    frontier.swap(next);
  }
  return out;
}

std::set<EntityId> closure(const KnowledgeBase& kb, const ClosureRequest& request) {
  auto start = kb.index_of(request.start);
  return to_ids(kb, closure_indices(kb, start, request.category, request.direction,
                                    request.include_self, request.max_depth));
}

std::set<EntityId> descendants(const KnowledgeBase& kb, const EntityId& e, bool include_self,
                               MaxDepth max_depth) {
  return closure(kb, {e, RelationCategory::GenericHierarchy, Direction::Forward, include_self,
                      max_depth});
}

std::set<EntityId> ancestors(const KnowledgeBase& kb, const EntityId& e, bool include_self,
                             MaxDepth max_depth) {
  return closure(kb, {e, RelationCategory::GenericHierarchy, Direction::Inverse, include_self,
                      max_depth});
}

// ---------------------------------------------------------------------------

PathSpec::PathSpec(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw Error(ErrorKind::InvalidArgument, "a path needs at least one step");
  for (std::size_t i = 1; i < steps_.size(); ++i)
    if (steps_[i].category == RelationCategory::Equivalence)
      throw Error(ErrorKind::InvalidArgument, "Equivalence may only open a path");
}

PathSpec::PathSpec(std::initializer_list<RelationCategory> categories)
    : PathSpec([&] {
        std::vector<Step> steps;
        for (auto c : categories) steps.push_back({c, Direction::Forward});
        return steps;
      }()) {}

TransitivityVerdict check_path(const KnowledgeBase& kb, const PathSpec& spec) {
  const auto& steps = spec.steps();
  bool not_expected = false;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    const auto& a = steps[i - 1];
    const auto& b = steps[i];
    auto verdict = kb.composition()(a.category, b.category);
    if (verdict == TransitivityVerdict::Transitive && is_structural(a.category) &&
        is_structural(b.category) && a.direction != b.direction)
      verdict = TransitivityVerdict::NotExpected;

    if (verdict == TransitivityVerdict::NotApplicable) return verdict;
    if (verdict == TransitivityVerdict::NotExpected) not_expected = true;
  }
  return not_expected ? TransitivityVerdict::NotExpected : TransitivityVerdict::Transitive;
}

// ---------------------------------------------------------------------------

std::set<EntityId> carriers_of(const KnowledgeBase& kb, std::string_view rel_type,
                               const EntityId& target) {
  const auto& type = kb.require_relation_type(rel_type);
  auto t = kb.index_of(target);

  std::vector<bool> seen(kb.entity_count(), false);
  std::vector<EntityIndex> found;
  for (auto source : kb.neighbors(type, Direction::Inverse, t)) {
    if (seen[source]) continue;
    for (auto d : closure_indices(kb, source, RelationCategory::GenericHierarchy,
                                  Direction::Forward, true, kUnbounded)) {
      if (!seen[d]) {
        seen[d] = true;
        found.push_back(d);
      }
    }
  }
  return to_ids(kb, found);
}

std::vector<InheritedRelation> inherited_relations(const KnowledgeBase& kb, const EntityId& e) {
  auto start = kb.index_of(e);
  // Nearest first: the entity itself, then its broader terms level by level.
  auto chain = closure_indices(kb, start, RelationCategory::GenericHierarchy, Direction::Inverse,
                               true, kUnbounded);

  std::vector<InheritedRelation> out;
  std::set<std::tuple<std::string, Direction, EntityId>> seen;
  for (auto holder : chain) {
    std::optional<EntityId> origin;
    if (holder != start) origin = kb.entity(holder).id;
    for (const auto& type : kb.data().relation_types) {
      if (type.category == RelationCategory::GenericHierarchy) continue;
      for (auto dir : {Direction::Forward, Direction::Inverse}) {
        for (auto other : kb.neighbors(type, dir, holder)) {
          const auto& other_id = kb.entity(other).id;
          if (!seen.emplace(type.name, dir, other_id).second) continue;
          out.push_back({type.name, dir, other_id, origin});
        }
      }
    }
  }
  return out;
}

std::map<std::size_t, std::set<EntityId>> rt_neighborhood(const KnowledgeBase& kb,
                                                          const EntityId& e,
                                                          std::size_t max_len) {
  if (max_len == 0) throw Error(ErrorKind::InvalidArgument, "max_len must be at least 1");
  auto start = kb.index_of(e);

  std::map<std::size_t, std::set<EntityId>> layers;
  for (std::size_t k = 1; k <= max_len; ++k) layers[k];

  std::vector<bool> seen(kb.entity_count(), false);
  seen[start] = true;
  std::vector<EntityIndex> frontier{start}, next;
  for (std::size_t k = 1; k <= max_len && !frontier.empty(); ++k) {
    next.clear();
    for (auto node : frontier) {
      for (auto dir : {Direction::Forward, Direction::Inverse}) {
        for (auto w : kb.neighbors(RelationCategory::UnspecificAssociation, dir, node)) {
          if (seen[w]) continue;
          seen[w] = true;
          next.push_back(w);
          layers[k].insert(kb.entity(w).id);
        }
      }
    }
    frontier.swap(next);
  }
  return layers;
}

}  // namespace kbir
