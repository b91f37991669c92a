#include <sstream>

#include <json.hpp>

#include "kbir/ingest.hpp"

namespace kbir {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::SchemaViolation, path + ": " + what);
}

/// Typed access into a JSON object with schema-path error reporting.
class Reader {
 public:
  Reader(const Json& value, std::string path) : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) violation(path_, "expected an object");
  }

  const Json* optional(const char* key) const {
    auto it = value_.find(key);
    return it == value_.end() || it->is_null() ? nullptr : &*it;
  }

  const Json& required(const char* key) const {
    const Json* v = optional(key);
    if (!v) violation(child(key), "required field is missing");
    return *v;
  }

  std::string string(const char* key) const { return as_string(required(key), child(key)); }

  std::string string_or(const char* key, std::string fallback) const {
    const Json* v = optional(key);
    return v ? as_string(*v, child(key)) : fallback;
  }

  std::vector<std::string> strings(const char* key, bool needed) const {
    const Json* v = needed ? &required(key) : optional(key);
    std::vector<std::string> out;
    if (!v) return out;
    auto path = child(key);
    if (!v->is_array()) violation(path, "expected an array of strings");
    for (std::size_t i = 0; i < v->size(); ++i)
      out.push_back(as_string((*v)[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::string child(const char* key) const { return path_ + "." + key; }

  static std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) violation(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const Json& value_;
  std::string path_;
};

template <typename F>
void each(const Json* array, const std::string& path, F&& f) {
  if (!array) return;
  if (!array->is_array()) violation(path, "expected an array");
  for (std::size_t i = 0; i < array->size(); ++i)
    f(Reader((*array)[i], path + "[" + std::to_string(i) + "]"));
}

RelationCategory category_at(const Reader& r, const char* key) {
  auto text = r.string(key);
  auto c = parse_category(text);
  if (!c) violation(r.child(key), "unknown relation category '" + text + "'");
  return *c;
}

CompositionOverride override_from(const Reader& r) {
  auto text = r.string("verdict");
  auto v = parse_verdict(text);
  if (!v) violation(r.child("verdict"), "unknown verdict '" + text + "'");
  return {category_at(r, "first"), category_at(r, "second"), *v};
}

DocumentRecord document_from(const Reader& r) {
  DocumentRecord d;
  d.doc_id = r.string("doc_id");
  d.title = r.string("title");
  if (const Json* y = r.optional("year")) {
    if (!y->is_number_integer()) violation(r.child("year"), "expected an integer");
    d.year = y->get<int>();
  }
  d.creators = r.strings("creators", false);
  d.subjects = r.strings("subjects", true);
  return d;
}

Json document_json(const DocumentRecord& d) {
  Json j = Json::object();
  j["doc_id"] = d.doc_id;
  j["title"] = d.title;
  if (d.year) j["year"] = *d.year;
  if (!d.creators.empty()) j["creators"] = d.creators;
  j["subjects"] = d.subjects;
  return j;
}

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, what + " is not valid JSON: " + e.what());
  }
}

}  // namespace

NativeDocument load_native(std::string_view text) {
  Json root = parse_json(text, "knowledge base");
  Reader r(root, "$");
  NativeDocument out;
  auto& kb = out.kb;

  r.required("facets");
  r.required("entities");
  r.required("relation_types");
  r.required("relations");

  each(r.optional("facets"), "$.facets", [&](const Reader& f) {
    kb.facets.push_back({f.string("id"), f.string("label")});
  });
  each(r.optional("entities"), "$.entities", [&](const Reader& e) {
    kb.entities.push_back(Entity{EntityId(e.string("id")), e.string("preferred_label"),
                                 e.strings("synonyms", false), e.string("facet")});
  });
  each(r.optional("relation_types"), "$.relation_types", [&](const Reader& t) {
    kb.relation_types.push_back(RelationType{t.string("name"), category_at(t, "category"),
                                             t.string("source_role"), t.string("target_role"),
                                             t.string_or("label", {}),
                                             t.string_or("source_role_label", {}),
                                             t.string_or("target_role_label", {})});
  });
  each(r.optional("relations"), "$.relations", [&](const Reader& x) {
    kb.relations.push_back(RelationInstance{x.string("type"), EntityId(x.string("source")),
                                            EntityId(x.string("target"))});
  });
  each(r.optional("composition_overrides"), "$.composition_overrides",
       [&](const Reader& o) { kb.composition_overrides.push_back(override_from(o)); });
  each(r.optional("documents"), "$.documents",
       [&](const Reader& d) { out.documents.push_back(document_from(d)); });
  return out;
}

std::string save_native(const KbData& kb, const std::vector<DocumentRecord>& documents) {
  Json root = Json::object();

  Json facets = Json::array();
  for (const auto& f : kb.facets) facets.push_back({{"id", f.id}, {"label", f.label}});
  root["facets"] = std::move(facets);

  Json entities = Json::array();
  for (const auto& e : kb.entities) {
    Json j = Json::object();
    j["id"] = e.id.str();
    j["preferred_label"] = e.preferred_label;
    j["synonyms"] = e.synonyms;
    j["facet"] = e.facet;
    entities.push_back(std::move(j));
  }
  root["entities"] = std::move(entities);

  Json types = Json::array();
  for (const auto& t : kb.relation_types) {
    Json j = Json::object();
    j["name"] = t.name;
    j["category"] = std::string(to_string(t.category));
    j["source_role"] = t.source_role;
    j["target_role"] = t.target_role;
    if (!t.label.empty()) j["label"] = t.label;
    if (!t.source_role_label.empty()) j["source_role_label"] = t.source_role_label;
    if (!t.target_role_label.empty()) j["target_role_label"] = t.target_role_label;
    types.push_back(std::move(j));
  }
  root["relation_types"] = std::move(types);

  Json relations = Json::array();
  for (const auto& x : kb.relations)
    relations.push_back({{"type", x.type}, {"source", x.source.str()}, {"target", x.target.str()}});
  root["relations"] = std::move(relations);

  Json docs = Json::array();
  for (const auto& d : documents) docs.push_back(document_json(d));
  root["documents"] = std::move(docs);

  Json overrides = Json::array();
  for (const auto& o : kb.composition_overrides)
    overrides.push_back({{"first", std::string(to_string(o.first))},
                         {"second", std::string(to_string(o.second))},
                         {"verdict", std::string(to_string(o.verdict))}});
  root["composition_overrides"] = std::move(overrides);

  return root.dump(2) + "\n";
}

std::vector<DocumentRecord> load_corpus(std::string_view jsonl) {
  std::vector<DocumentRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    auto line = jsonl.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto where = "line " + std::to_string(line_no);
    Json j = parse_json(line, "corpus " + where);
    out.push_back(document_from(Reader(j, where)));
  }
  return out;
}

std::string save_corpus(const std::vector<DocumentRecord>& documents) {
  std::string out;
  for (const auto& d : documents) out += document_json(d).dump() + "\n";
  return out;
}

CategorySidecar load_sidecar(std::string_view text) {
  Json root = parse_json(text, "sidecar");
  if (!root.is_object()) violation("$", "expected an object");
  CategorySidecar out;
  for (const auto& [name, value] : root.items()) {
    auto path = "$." + name;
    if (name == "composition_overrides") {
      each(&value, path, [&](const Reader& o) { out.composition_overrides.push_back(override_from(o)); });
      continue;
    }
    SidecarEntry entry;
    if (value.is_string()) {
      auto c = parse_category(value.get<std::string>());
      if (!c) violation(path, "unknown relation category '" + value.get<std::string>() + "'");
      entry.category = *c;
    } else {
      Reader r(value, path);
      entry.category = category_at(r, "category");
      if (r.optional("source_role")) entry.source_role = r.string("source_role");
      if (r.optional("target_role")) entry.target_role = r.string("target_role");
    }
    out.types.emplace(name, std::move(entry));
  }
  return out;
}

}  // namespace kbir
