#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbir/documents.hpp"
#include "kbir/ontology.hpp"

namespace kbir {

// ---------------------------------------------------------------------------
// Native interchange format (JSON)
// ---------------------------------------------------------------------------

struct NativeDocument {
  KbData kb;
  std::vector<DocumentRecord> documents;
  friend bool operator==(const NativeDocument&, const NativeDocument&) = default;
};

/// Throws Error{SchemaViolation} naming the offending path, e.g. `$.facets`.
NativeDocument load_native(std::string_view text);

/// Deterministic output: stored order, two-space indent, trailing newline.
std::string save_native(const KbData& kb, const std::vector<DocumentRecord>& documents);

/// One JSON document record per line; blank lines are skipped.
std::vector<DocumentRecord> load_corpus(std::string_view jsonl);
std::string save_corpus(const std::vector<DocumentRecord>& documents);

// ---------------------------------------------------------------------------
// Relation category sidecar
// ---------------------------------------------------------------------------

struct SidecarEntry {
  RelationCategory category = RelationCategory::UnspecificAssociation;
  std::optional<std::string> source_role;
  std::optional<std::string> target_role;
};

struct CategorySidecar {
  std::map<std::string, SidecarEntry> types;
  std::vector<CompositionOverride> composition_overrides;
};

/// `{"Methodology": "FieldOfApplication", "Production": {"category": ...,
/// "source_role": ..., "target_role": ...}, "composition_overrides": [...]}`
CategorySidecar load_sidecar(std::string_view text);

// ---------------------------------------------------------------------------
// XTM 1.0 subset
// ---------------------------------------------------------------------------

struct ImportWarning {
  std::string message;
  std::string location;  // "element 4" or "file 2, element 4"
};

struct XtmTopic {
  std::string id;
  std::vector<std::string> instance_of;  // fragment ids, '#' stripped
  std::vector<std::string> base_names;
  std::size_t element = 0;
};

struct XtmMember {
  std::string role;
  std::string player;
};

struct XtmAssociation {
  std::string instance_of;
  std::vector<XtmMember> members;
  std::size_t element = 0;
};

struct XtmSubsetDocument {
  std::vector<XtmTopic> topics;
  std::vector<XtmAssociation> associations;
};

/// Reads topic and association elements. Several top-level elements are
/// allowed. Throws Error{XmlMalformed} or Error{UnresolvedFragmentRef} for a
/// reference that is not a local `#id`.
XtmSubsetDocument parse_xtm(std::string_view xml, std::vector<ImportWarning>* warnings = nullptr);

struct XtmImport {
  KbData kb;
  std::vector<ImportWarning> warnings;
};

/// Maps topics to entities, relation types and roles and associations to
/// relation instances. Throws Error{XmlMalformed, UnresolvedFragmentRef,
/// AssociationArityNot2}.
XtmImport import_xtm(std::string_view xml, const CategorySidecar& sidecar = {});
XtmImport import_xtm(const std::vector<std::string>& xml_files,
                     const CategorySidecar& sidecar = {});

/// Facet given to topics imported without one.
inline constexpr std::string_view kDefaultFacet = "default";

}  // namespace kbir
