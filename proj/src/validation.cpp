#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "kbir/ontology.hpp"

namespace kbir {

std::string_view to_string(FindingCode code) noexcept {
  switch (code) {
    case FindingCode::DuplicateId: return "DuplicateId";
    case FindingCode::DanglingReference: return "DanglingReference";
    case FindingCode::PolyhierarchyViolation: return "PolyhierarchyViolation";
    case FindingCode::HierarchyCycle: return "HierarchyCycle";
    case FindingCode::CrossFacetHierarchy: return "CrossFacetHierarchy";
    case FindingCode::DuplicateLabel: return "DuplicateLabel";
    case FindingCode::SynonymConflict: return "SynonymConflict";
    case FindingCode::InvalidId: return "InvalidId";
    case FindingCode::InvalidRelationType: return "InvalidRelationType";
    case FindingCode::CompositionOverride: return "CompositionOverride";
  }
  return "Unknown";
}

std::string_view to_string(Severity severity) noexcept {
  switch (severity) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "?";
}

bool ValidationReport::has_errors() const noexcept {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::Error; });
}

std::size_t ValidationReport::count(FindingCode code) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [code](const Finding& f) { return f.code == code; }));
}

namespace {

std::string path(std::string_view collection, std::size_t i) {
  return "$." + std::string(collection) + "[" + std::to_string(i) + "]";
}

/// Strongly connected components with more than one node, or with a
/// self-loop, i.e. exactly the node sets that lie on a directed cycle.
std::vector<std::vector<std::size_t>> cyclic_components(
    std::size_t n, const std::vector<std::vector<std::size_t>>& out) {
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> result;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited || out[root].empty()) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      auto& f = call.back();
      if (f.next_edge < out[f.node].size()) {
        std::size_t w = out[f.node][f.next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      std::size_t v = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
      if (low[v] != index[v]) continue;

      std::vector<std::size_t> component;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      bool self_loop = std::find(out[v].begin(), out[v].end(), v) != out[v].end();
      if (component.size() > 1 || self_loop) {
        std::sort(component.begin(), component.end());
        result.push_back(std::move(component));
      }
    }
  }
  return result;
}

}  // namespace

ValidationReport validate(const KbData& data) {
  ValidationReport report;
  auto add = [&report](FindingCode code, std::string message,
                       std::vector<std::string> locations,
                       Severity severity = Severity::Error) {
    report.findings.push_back({code, severity, std::move(message), std::move(locations)});
  };

  // Facets
  std::unordered_set<std::string> facet_ids;
  for (std::size_t i = 0; i < data.facets.size(); ++i) {
    const auto& f = data.facets[i];
    if (!is_entity_token(f.id))
      add(FindingCode::InvalidId, "facet id '" + f.id + "' is not a lowercase token",
          {path("facets", i)});
    if (!facet_ids.insert(f.id).second)
      add(FindingCode::DuplicateId, "duplicate facet id '" + f.id + "'", {path("facets", i)});
  }

  // Entities
  std::unordered_map<std::string, std::size_t> entity_pos;
  std::unordered_set<std::string> normalized_ids;
  for (std::size_t i = 0; i < data.entities.size(); ++i) {
    const auto& e = data.entities[i];
    if (!is_entity_token(e.id.str()))
      add(FindingCode::InvalidId, "entity id '" + e.id.str() + "' is not a lowercase token",
          {path("entities", i)});
    if (!entity_pos.emplace(e.id.str(), i).second)
      add(FindingCode::DuplicateId, "duplicate entity id '" + e.id.str() + "'",
          {path("entities", i), e.id.str()});
    if (!facet_ids.contains(e.facet))
      add(FindingCode::DanglingReference,
          "entity '" + e.id.str() + "' refers to unknown facet '" + e.facet + "'",
          {path("entities", i) + ".facet"});
    normalized_ids.insert(normalize_label(e.id.str()));
  }

  std::map<std::pair<std::string, std::string>, std::size_t> labels_in_facet;
  for (std::size_t i = 0; i < data.entities.size(); ++i) {
    const auto& e = data.entities[i];
    auto key = std::make_pair(e.facet, fold_case(e.preferred_label));
    auto [it, fresh] = labels_in_facet.emplace(key, i);
    if (!fresh)
      add(FindingCode::DuplicateLabel,
          "label '" + e.preferred_label + "' is used twice in facet '" + e.facet + "'",
          {data.entities[it->second].id.str(), e.id.str()});
    for (const auto& s : e.synonyms) {
      if (normalized_ids.contains(normalize_label(s)))
        add(FindingCode::SynonymConflict,
            "synonym '" + s + "' of '" + e.id.str() + "' collides with an entity id",
            {e.id.str()});
    }
  }

  // Relation types
  std::unordered_map<std::string, RelationCategory> type_category;
  for (std::size_t i = 0; i < data.relation_types.size(); ++i) {
    const auto& t = data.relation_types[i];
    if (!type_category.emplace(t.name, t.category).second)
      add(FindingCode::DuplicateId, "duplicate relation type '" + t.name + "'",
          {path("relation_types", i)});
    if (t.category == RelationCategory::Equivalence)
      add(FindingCode::InvalidRelationType,
          "relation type '" + t.name + "' uses Equivalence; synonyms belong on entities",
          {path("relation_types", i)});
    if (t.source_role.empty() || t.target_role.empty() || t.source_role == t.target_role)
      add(FindingCode::InvalidRelationType,
          "relation type '" + t.name + "' needs two distinct roles", {path("relation_types", i)});
  }

  // The built-in hierarchy types need no declaration.
  for (const auto& builtin : {hierarchical_relation_type(), partitive_relation_type()})
    type_category.emplace(builtin.name, builtin.category);

  // Relation instances; collect per-category edges for structural checks
  const std::size_t n = data.entities.size();
  std::array<std::vector<std::vector<std::size_t>>, kCategoryCount> out;
  std::vector<std::set<std::size_t>> generic_parents(n);

  for (std::size_t i = 0; i < data.relations.size(); ++i) {
    const auto& r = data.relations[i];
    auto t = type_category.find(r.type);
    if (t == type_category.end()) {
      add(FindingCode::DanglingReference, "unknown relation type '" + r.type + "'",
          {path("relations", i) + ".type"});
    }
    auto s = entity_pos.find(r.source.str());
    auto o = entity_pos.find(r.target.str());
    if (s == entity_pos.end())
      add(FindingCode::DanglingReference, "unknown source entity '" + r.source.str() + "'",
          {path("relations", i) + ".source"});
    if (o == entity_pos.end())
      add(FindingCode::DanglingReference, "unknown target entity '" + r.target.str() + "'",
          {path("relations", i) + ".target"});
    if (t == type_category.end() || s == entity_pos.end() || o == entity_pos.end()) continue;

    auto cat = static_cast<std::size_t>(t->second);
    if (!is_hierarchical(t->second)) continue;
    if (out[cat].empty()) out[cat].resize(n);
    out[cat][s->second].push_back(o->second);

    if (t->second == RelationCategory::GenericHierarchy) {
      generic_parents[o->second].insert(s->second);
      const auto& src = data.entities[s->second];
      const auto& dst = data.entities[o->second];
      if (src.facet != dst.facet)
        add(FindingCode::CrossFacetHierarchy,
            "generic hierarchy edge crosses facets: " + src.id.str() + " (" + src.facet +
                ") -> " + dst.id.str() + " (" + dst.facet + ")",
            {path("relations", i)});
    }
  }

  for (std::size_t v = 0; v < n; ++v) {
    if (generic_parents[v].size() < 2) continue;
    std::vector<std::string> where{data.entities[v].id.str()};
    for (auto p : generic_parents[v]) where.push_back(data.entities[p].id.str());
    add(FindingCode::PolyhierarchyViolation,
        "'" + data.entities[v].id.str() + "' has " + std::to_string(generic_parents[v].size()) +
            " generic broader terms",
        std::move(where));
  }

  for (auto cat : all_categories()) {
    const auto& adj = out[static_cast<std::size_t>(cat)];
    if (adj.empty()) continue;
    for (const auto& component : cyclic_components(n, adj)) {
      std::vector<std::string> where;
      for (auto v : component) where.push_back(data.entities[v].id.str());
      add(FindingCode::HierarchyCycle,
          std::string(to_string(cat)) + " relations form a cycle through " +
              std::to_string(component.size()) + " entities",
          std::move(where));
    }
  }

  for (std::size_t i = 0; i < data.composition_overrides.size(); ++i) {
    const auto& o = data.composition_overrides[i];
    auto standard = compose(o.first, o.second);
    add(FindingCode::CompositionOverride,
        std::string(to_string(o.first)) + " then " + std::string(to_string(o.second)) + ": " +
            std::string(to_string(standard)) + " overridden to " +
            std::string(to_string(o.verdict)),
        {path("composition_overrides", i)}, Severity::Info);
  }

  // Findings are reported in a fixed code order so the first error is
  // predictable for build_kb.
  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const Finding& a, const Finding& b) {
                     return static_cast<int>(a.code) < static_cast<int>(b.code);
                   });
  return report;
}

}  // namespace kbir
