#pragma once

// Reference implementations that share no code with the library: the
// composition cells as printed, brute-force reachability over a parent
// array, and a linear scan over the corpus file.

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "kbir/ontology.hpp"

namespace kbir::oracle {

using C = RelationCategory;
using V = TransitivityVerdict;

struct Cell {
  C first;
  C second;
  V verdict;
};

// Same-type rows.
inline const std::vector<Cell> kSameType = {
    {C::Equivalence, C::Equivalence, V::NotApplicable},
    {C::GenericHierarchy, C::GenericHierarchy, V::Transitive},
    {C::WholePartHierarchy, C::WholePartHierarchy, V::Transitive},
    {C::GenericHierarchy, C::WholePartHierarchy, V::NotExpected},
    {C::WholePartHierarchy, C::GenericHierarchy, V::NotExpected},
    {C::ChronoEarlierLater, C::ChronoEarlierLater, V::Transitive},
    {C::ChronoLaterEarlier, C::ChronoLaterEarlier, V::Transitive},
    {C::ChronoEarlierLater, C::ChronoLaterEarlier, V::NotExpected},
    {C::ChronoLaterEarlier, C::ChronoEarlierLater, V::NotExpected},
    {C::UnspecificAssociation, C::UnspecificAssociation, V::NotExpected},
    {C::RawMaterialProduct, C::RawMaterialProduct, V::Transitive},
    {C::Causality, C::Causality, V::Transitive},
    {C::PersonActorAction, C::PersonActorAction, V::NotExpected},
    {C::InstitutionActorAction, C::InstitutionActorAction, V::NotExpected},
    {C::PersonActorProduct, C::PersonActorProduct, V::NotExpected},
    {C::InstitutionActorProduct, C::InstitutionActorProduct, V::NotExpected},
    {C::ActionProduct, C::ActionProduct, V::NotExpected},
};

// Mixed hierarchical and chronological rows; the repeated synonym rows
// appear once.
inline const std::vector<Cell> kMixedHierarchical = {
    {C::Equivalence, C::GenericHierarchy, V::Transitive},
    {C::Equivalence, C::WholePartHierarchy, V::Transitive},
    {C::GenericHierarchy, C::Equivalence, V::NotApplicable},
    {C::WholePartHierarchy, C::Equivalence, V::NotApplicable},
    {C::Equivalence, C::ChronoEarlierLater, V::Transitive},
    {C::Equivalence, C::ChronoLaterEarlier, V::Transitive},
    {C::ChronoEarlierLater, C::Equivalence, V::NotApplicable},
    {C::ChronoLaterEarlier, C::Equivalence, V::NotApplicable},
    {C::GenericHierarchy, C::ChronoEarlierLater, V::Transitive},
    {C::GenericHierarchy, C::ChronoLaterEarlier, V::Transitive},
    {C::ChronoEarlierLater, C::GenericHierarchy, V::Transitive},
    {C::ChronoLaterEarlier, C::GenericHierarchy, V::Transitive},
    {C::WholePartHierarchy, C::ChronoEarlierLater, V::Transitive},
    {C::WholePartHierarchy, C::ChronoLaterEarlier, V::Transitive},
    {C::ChronoEarlierLater, C::WholePartHierarchy, V::Transitive},
    {C::ChronoLaterEarlier, C::WholePartHierarchy, V::Transitive},
};

// Typed associative first, hierarchical second. The chronological column
// covers both directions.
inline std::vector<Cell> associative_then_hierarchical() {
  const C firsts[] = {C::UnspecificAssociation, C::RawMaterialProduct,   C::ActionProduct,
                      C::PersonActorAction,     C::InstitutionActorAction, C::Causality,
                      C::PersonActorProduct,    C::InstitutionActorProduct};
  const C seconds[] = {C::GenericHierarchy, C::WholePartHierarchy, C::ChronoEarlierLater,
                       C::ChronoLaterEarlier};
  std::vector<Cell> out;
  for (auto a : firsts)
    for (auto h : seconds) out.push_back({a, h, V::Transitive});
  return out;
}

inline const std::vector<C> kHierarchical = {C::GenericHierarchy, C::WholePartHierarchy,
                                             C::ChronoEarlierLater, C::ChronoLaterEarlier};
inline const std::vector<C> kAssociative = {
    C::UnspecificAssociation, C::RawMaterialProduct,     C::Causality,
    C::ActionProduct,         C::PersonActorAction,      C::InstitutionActorAction,
    C::PersonActorProduct,    C::InstitutionActorProduct, C::FieldOfApplication};

// Cross-type associative pairs left unspecified by the tables.
inline const std::vector<std::pair<C, C>> kUnspecifiedAssociative = {
    {C::Causality, C::RawMaterialProduct},
    {C::RawMaterialProduct, C::Causality},
    {C::ActionProduct, C::PersonActorProduct},
    {C::UnspecificAssociation, C::Causality},
    {C::InstitutionActorAction, C::ActionProduct},
};

// ---------------------------------------------------------------------------
// Forests
// ---------------------------------------------------------------------------

/// parent[i] < i or -1 for roots.
struct Forest {
  std::vector<int> parent;
};

inline Forest random_forest(std::mt19937& rng, int max_nodes) {
  std::uniform_int_distribution<int> size(1, max_nodes);
  int n = size(rng);
  Forest f;
  f.parent.resize(n, -1);
  std::bernoulli_distribution root(0.08);
  for (int i = 1; i < n; ++i) {
    if (root(rng)) continue;
    // Bias towards recent nodes to get deep as well as bushy trees.
    std::uniform_int_distribution<int> recent(std::max(0, i - 12), i - 1);
    std::uniform_int_distribution<int> any(0, i - 1);
    f.parent[i] = std::bernoulli_distribution(0.6)(rng) ? recent(rng) : any(rng);
  }
  return f;
}

inline std::string node_id(int i) { return "n" + std::to_string(i); }

inline KbData forest_kb(const Forest& f) {
  KbData d;
  d.facets.push_back({"f", "F"});
  for (std::size_t i = 0; i < f.parent.size(); ++i)
    d.entities.push_back(Entity{EntityId(node_id(int(i))), "node " + std::to_string(i), {}, "f"});
  for (std::size_t i = 0; i < f.parent.size(); ++i)
    if (f.parent[i] >= 0)
      d.relations.push_back(
          {"HierarchicalRelation", EntityId(node_id(f.parent[i])), EntityId(node_id(int(i)))});
  return d;
}

/// Number of parent steps from `b` up to `a`, or -1 when `a` is not an
/// ancestor-or-self of `b`.
inline int distance_down(const Forest& f, int a, int b) {
  int steps = 0;
  for (int x = b; x >= 0; x = f.parent[x], ++steps)
    if (x == a) return steps;
  return -1;
}

/// {b : a reaches b downwards in [min_steps, max_steps] steps}.
inline std::set<std::string> below(const Forest& f, int a, int min_steps, int max_steps) {
  std::set<std::string> out;
  for (int b = 0; b < int(f.parent.size()); ++b) {
    int d = distance_down(f, a, b);
    if (d >= min_steps && d <= max_steps) out.insert(node_id(b));
  }
  return out;
}

inline std::set<std::string> above(const Forest& f, int b, int min_steps, int max_steps) {
  std::set<std::string> out;
  for (int a = 0; a < int(f.parent.size()); ++a) {
    int d = distance_down(f, a, b);
    if (d >= min_steps && d <= max_steps) out.insert(node_id(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

inline std::string fold(std::string s) {
  std::string out;
  bool space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out += '_';
    space = false;
    out += char(std::tolower(c));
  }
  return out;
}

/// Documents per entity id by scanning the corpus lines against the
/// fixture's own names, ids and synonyms.
inline std::map<std::string, std::set<std::string>> scan_corpus(const std::string& kb_json,
                                                               const std::string& corpus_jsonl) {
  auto kb = nlohmann::json::parse(kb_json);
  std::map<std::string, std::string> name_to_id;
  for (const auto& e : kb["entities"]) {
    auto id = e["id"].get<std::string>();
    name_to_id[fold(id)] = id;
    name_to_id[fold(e["preferred_label"].get<std::string>())] = id;
    for (const auto& s : e["synonyms"]) name_to_id[fold(s.get<std::string>())] = id;
  }
  std::map<std::string, std::set<std::string>> out;
  std::istringstream lines(corpus_jsonl);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    auto d = nlohmann::json::parse(line);
    for (const auto& s : d["subjects"])
      out[name_to_id.at(fold(s.get<std::string>()))].insert(d["doc_id"].get<std::string>());
  }
  return out;
}

}  // namespace kbir::oracle
