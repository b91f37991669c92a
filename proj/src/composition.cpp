#include "kbir/ontology.hpp"

namespace kbir {

namespace {

using C = RelationCategory;
using V = TransitivityVerdict;

constexpr std::array<std::pair<C, std::string_view>, kCategoryCount> kCategoryNames{{
    {C::Equivalence, "Equivalence"},
    {C::GenericHierarchy, "GenericHierarchy"},
    {C::WholePartHierarchy, "WholePartHierarchy"},
    {C::ChronoEarlierLater, "ChronoEarlierLater"},
    {C::ChronoLaterEarlier, "ChronoLaterEarlier"},
    {C::UnspecificAssociation, "UnspecificAssociation"},
    {C::RawMaterialProduct, "RawMaterialProduct"},
    {C::Causality, "Causality"},
    {C::ActionProduct, "ActionProduct"},
    {C::PersonActorAction, "PersonActorAction"},
    {C::InstitutionActorAction, "InstitutionActorAction"},
    {C::PersonActorProduct, "PersonActorProduct"},
    {C::InstitutionActorProduct, "InstitutionActorProduct"},
    {C::FieldOfApplication, "FieldOfApplication"},
}};

bool is_structural(C c) noexcept {
  return c == C::GenericHierarchy || c == C::WholePartHierarchy;
}

bool is_chronological(C c) noexcept {
  return c == C::ChronoEarlierLater || c == C::ChronoLaterEarlier;
}

V normative_cell(C first, C second) noexcept {
  // A synonym never appears as the target of a relation, so it can only
  // open a path.
  if (second == C::Equivalence) return V::NotApplicable;
  if (first == C::Equivalence) return V::Transitive;

  if (is_structural(first) && is_structural(second))
    return first == second ? V::Transitive : V::NotExpected;
  if (is_chronological(first) && is_chronological(second))
    return first == second ? V::Transitive : V::NotExpected;
  if (is_hierarchical(first) && is_hierarchical(second)) return V::Transitive;

  if (is_associative(first) && is_hierarchical(second)) return V::Transitive;
  if (is_hierarchical(first) && is_associative(second)) return V::NotExpected;

  // Both associative. Only raw material and causality chain with themselves.
  if (first == second && (first == C::RawMaterialProduct || first == C::Causality))
    return V::Transitive;
  return V::NotExpected;
}

}  // namespace

const std::array<RelationCategory, kCategoryCount>& all_categories() noexcept {
  static const std::array<RelationCategory, kCategoryCount> all = [] {
    std::array<RelationCategory, kCategoryCount> out{};
    for (std::size_t i = 0; i < kCategoryCount; ++i) out[i] = kCategoryNames[i].first;
    return out;
  }();
  return all;
}

std::string_view to_string(RelationCategory category) noexcept {
  return kCategoryNames[static_cast<std::size_t>(category)].second;
}

std::optional<RelationCategory> parse_category(std::string_view text) noexcept {
  for (const auto& [c, name] : kCategoryNames)
    if (name == text) return c;
  return std::nullopt;
}

bool is_hierarchical(RelationCategory c) noexcept {
  return is_structural(c) || is_chronological(c);
}

bool is_associative(RelationCategory c) noexcept {
  return c != C::Equivalence && !is_hierarchical(c);
}

std::string_view to_string(TransitivityVerdict verdict) noexcept {
  switch (verdict) {
    case V::Transitive: return "Transitive";
    case V::NotExpected: return "NotExpected";
    case V::NotApplicable: return "NotApplicable";
  }
  return "?";
}

std::optional<TransitivityVerdict> parse_verdict(std::string_view text) noexcept {
  if (text == "Transitive" || text == "+") return V::Transitive;
  if (text == "NotExpected" || text == "-") return V::NotExpected;
  if (text == "NotApplicable" || text == "O" || text == "0") return V::NotApplicable;
  return std::nullopt;
}

CompositionTable::CompositionTable() {
  for (auto first : all_categories())
    for (auto second : all_categories())
      cells_[index(first)][index(second)] = normative_cell(first, second);
}

const CompositionTable& CompositionTable::standard() {
  static const CompositionTable table;
  return table;
}

TransitivityVerdict compose(RelationCategory first, RelationCategory second) noexcept {
  return CompositionTable::standard()(first, second);
}

}  // namespace kbir
