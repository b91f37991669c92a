#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "kbir/ingest.hpp"

namespace kbir {

namespace {

namespace pt = boost::property_tree;

constexpr std::string_view kAssociativeRelation = "AssociativeRelation";
constexpr std::string_view kMemberSuffix = "RelationMember";

std::string element_location(std::size_t file, std::size_t element, bool many_files) {
  auto s = "element " + std::to_string(element);
  return many_files ? "file " + std::to_string(file) + ", " + s : s;
}

/// `#id` → `id`.
std::string fragment(const pt::ptree& topic_ref, const std::string& where) {
  auto href = topic_ref.get<std::string>("<xmlattr>.xlink:href", "");
  if (href.size() < 2 || href[0] != '#')
    throw Error(ErrorKind::UnresolvedFragmentRef,
                where + ": reference '" + href + "' is not a local fragment (#id)");
  return href.substr(1);
}

void collect_instance_of(const pt::ptree& node, const std::string& where,
                         std::vector<std::string>& out) {
  for (const auto& [key, child] : node)
    if (key == "instanceOf")
      for (const auto& [k, ref] : child)
        if (k == "topicRef") out.push_back(fragment(ref, where));
}

XtmTopic read_topic(const pt::ptree& node, std::size_t element,
                    std::vector<ImportWarning>& warnings) {
  auto where = "element " + std::to_string(element);
  XtmTopic t;
  t.element = element;
  t.id = node.get<std::string>("<xmlattr>.id", "");
  if (t.id.empty()) throw Error(ErrorKind::XmlMalformed, where + ": topic without an id");
  collect_instance_of(node, where, t.instance_of);
  for (const auto& [key, child] : node) {
    if (key == "baseName") {
      collect_instance_of(child, where, t.instance_of);
      if (auto s = child.get_optional<std::string>("baseNameString")) t.base_names.push_back(*s);
    } else if (key != "instanceOf" && key != "<xmlattr>") {
      warnings.push_back({"skipped <" + key + "> in topic '" + t.id + "'", where});
    }
  }
  return t;
}

XtmAssociation read_association(const pt::ptree& node, std::size_t element,
                                std::vector<ImportWarning>& warnings) {
  auto where = "element " + std::to_string(element);
  XtmAssociation a;
  a.element = element;
  std::vector<std::string> types;
  collect_instance_of(node, where, types);
  if (types.size() != 1)
    throw Error(ErrorKind::XmlMalformed, where + ": association needs exactly one instanceOf");
  a.instance_of = types.front();
  for (const auto& [key, child] : node) {
    if (key == "member") {
      XtmMember m;
      std::size_t players = 0;
      for (const auto& [k, sub] : child) {
        if (k == "roleSpec") {
          for (const auto& [rk, ref] : sub)
            if (rk == "topicRef") m.role = fragment(ref, where);
        } else if (k == "topicRef") {
          m.player = fragment(sub, where);
          ++players;
        }
      }
      if (m.role.empty() || players != 1)
        throw Error(ErrorKind::XmlMalformed,
                    where + ": member needs one roleSpec and one topicRef");
      a.members.push_back(std::move(m));
    } else if (key != "instanceOf") {
      warnings.push_back({"skipped <" + key + "> in association", where});
    }
  }
  return a;
}

std::string label_from_id(const std::string& id) {
  std::string s = id;
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

struct TypeDecl {
  RelationType type;
  std::vector<std::string> roles;  // declaration order
  std::string location;
};

}  // namespace

XtmSubsetDocument parse_xtm(std::string_view xml, std::vector<ImportWarning>* warnings) {
  pt::ptree tree;
  std::istringstream in{std::string(xml)};
  try {
    pt::read_xml(in, tree, pt::xml_parser::no_comments | pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorKind::XmlMalformed, e.message() + " at line " + std::to_string(e.line()),
                SourcePos{static_cast<int>(e.line()), 0});
  }

  std::vector<ImportWarning> local;
  auto& w = warnings ? *warnings : local;
  XtmSubsetDocument doc;
  std::size_t element = 0;
  // Accept an enclosing <topicMap> as well as bare top-level fragments.
  const pt::ptree* scope = &tree;
  if (tree.size() == 1 && tree.front().first == "topicMap") scope = &tree.front().second;
  for (const auto& [key, node] : *scope) {
    if (key == "<xmlattr>") continue;
    ++element;
    if (key == "topic")
      doc.topics.push_back(read_topic(node, element, w));
    else if (key == "association")
      doc.associations.push_back(read_association(node, element, w));
    else
      w.push_back({"skipped unsupported element <" + key + ">",
                   "element " + std::to_string(element)});
  }
  return doc;
}

XtmImport import_xtm(std::string_view xml, const CategorySidecar& sidecar) {
  return import_xtm(std::vector<std::string>{std::string(xml)}, sidecar);
}

XtmImport import_xtm(const std::vector<std::string>& xml_files, const CategorySidecar& sidecar) {
  XtmImport out;
  const bool many = xml_files.size() > 1;

  struct Located {
    XtmSubsetDocument doc;
    std::size_t file;
  };
  std::vector<Located> docs;
  for (std::size_t f = 0; f < xml_files.size(); ++f) {
    std::vector<ImportWarning> w;
    docs.push_back({parse_xtm(xml_files[f], &w), f + 1});
    for (auto& x : w) {
      if (many) x.location = "file " + std::to_string(f + 1) + ", " + x.location;
      out.warnings.push_back(std::move(x));
    }
  }

  // Pass 1: relation types, then roles, then plain topics.
  std::map<std::string, TypeDecl> types;
  std::vector<std::string> type_order;
  for (auto builtin : {hierarchical_relation_type(), partitive_relation_type()}) {
    auto name = builtin.name;
    types[name] = {builtin, {builtin.target_role, builtin.source_role}, "built-in"};
  }
  std::set<std::string> role_topics;
  for (const auto& [doc, file] : docs) {
    for (const auto& t : doc.topics) {
      if (std::find(t.instance_of.begin(), t.instance_of.end(), kAssociativeRelation) ==
          t.instance_of.end())
        continue;
      auto where = element_location(file, t.element, many);
      if (types.count(t.id))
        throw Error(ErrorKind::DuplicateId, where + ": relation type '" + t.id + "' declared twice");
      RelationType rt;
      rt.name = t.id;
      if (!t.base_names.empty()) rt.label = t.base_names.front();
      types[t.id] = {rt, {}, where};
      type_order.push_back(t.id);
    }
  }
  std::map<std::string, std::string> role_labels;
  for (const auto& [doc, file] : docs) {
    for (const auto& t : doc.topics) {
      for (const auto& ref : t.instance_of) {
        if (ref.size() <= kMemberSuffix.size() || !std::string_view(ref).ends_with(kMemberSuffix))
          continue;
        auto owner = ref.substr(0, ref.size() - kMemberSuffix.size());
        auto where = element_location(file, t.element, many);
        auto it = types.find(owner);
        if (it == types.end())
          throw Error(ErrorKind::UnresolvedFragmentRef,
                      where + ": role '" + t.id + "' refers to undeclared relation type '" +
                          owner + "'");
        it->second.roles.push_back(t.id);
        role_topics.insert(t.id);
        if (!t.base_names.empty()) role_labels[t.id] = t.base_names.front();
      }
    }
  }

  for (const auto& name : type_order) {
    auto& decl = types[name];
    auto& rt = decl.type;
    auto sc = sidecar.types.find(name);
    if (sc != sidecar.types.end()) {
      rt.category = sc->second.category;
      if (sc->second.source_role) rt.source_role = *sc->second.source_role;
      if (sc->second.target_role) rt.target_role = *sc->second.target_role;
    } else {
      out.warnings.push_back({"relation type '" + name +
                                  "' has no sidecar category; using UnspecificAssociation",
                              decl.location});
    }
    if (rt.source_role.empty() || rt.target_role.empty()) {
      if (decl.roles.size() != 2)
        throw Error(ErrorKind::AssociationArityNot2,
                    decl.location + ": relation type '" + name + "' declares " +
                        std::to_string(decl.roles.size()) + " roles; two are needed");
      // The first declared role is the target.
      if (rt.target_role.empty())
        rt.target_role = rt.source_role == decl.roles[0] ? decl.roles[1] : decl.roles[0];
      if (rt.source_role.empty())
        rt.source_role = rt.target_role == decl.roles[0] ? decl.roles[1] : decl.roles[0];
    }
    for (const auto& role : {rt.source_role, rt.target_role})
      if (std::find(decl.roles.begin(), decl.roles.end(), role) == decl.roles.end())
        throw Error(ErrorKind::UnresolvedFragmentRef,
                    decl.location + ": role '" + role + "' is not declared for '" + name + "'");
    if (auto l = role_labels.find(rt.source_role); l != role_labels.end())
      rt.source_role_label = l->second;
    if (auto l = role_labels.find(rt.target_role); l != role_labels.end())
      rt.target_role_label = l->second;
    out.kb.relation_types.push_back(rt);
  }

  std::set<std::string> entity_ids;
  bool default_facet = false;
  auto add_entity = [&](const std::string& id, std::string label, const std::string& where,
                        bool implicit) {
    if (!entity_ids.insert(id).second) return;
    out.kb.entities.push_back(Entity{EntityId(id), std::move(label), {}, std::string(kDefaultFacet)});
    default_facet = true;
    out.warnings.push_back({implicit ? "topic '" + id + "' is referenced but never declared; added to facet '" +
                                           std::string(kDefaultFacet) + "'"
                                     : "topic '" + id + "' has no facet; assigned to '" +
                                           std::string(kDefaultFacet) + "'",
                            where});
  };

  for (const auto& [doc, file] : docs) {
    for (const auto& t : doc.topics) {
      if (types.count(t.id) || role_topics.count(t.id)) continue;
      auto where = element_location(file, t.element, many);
      if (entity_ids.count(t.id))
        throw Error(ErrorKind::DuplicateId, where + ": topic '" + t.id + "' declared twice");
      add_entity(t.id, t.base_names.empty() ? label_from_id(t.id) : t.base_names.front(), where,
                 false);
    }
  }

  // Pass 2: associations.
  for (const auto& [doc, file] : docs) {
    for (const auto& a : doc.associations) {
      auto where = element_location(file, a.element, many);
      auto it = types.find(a.instance_of);
      if (it == types.end())
        throw Error(ErrorKind::UnresolvedFragmentRef,
                    where + ": association type '" + a.instance_of + "' is not declared");
      if (a.members.size() != 2)
        throw Error(ErrorKind::AssociationArityNot2,
                    where + ": association of type '" + a.instance_of + "' has " +
                        std::to_string(a.members.size()) + " members");
      const auto& rt = it->second.type;
      const XtmMember* source = nullptr;
      const XtmMember* target = nullptr;
      for (const auto& m : a.members) {
        if (m.role == rt.source_role && !source) source = &m;
        else if (m.role == rt.target_role && !target) target = &m;
        else
          throw Error(ErrorKind::UnresolvedFragmentRef,
                      where + ": role '" + m.role + "' does not belong to '" + rt.name + "'");
      }
      for (const auto* m : {source, target})
        if (!entity_ids.count(m->player) && !types.count(m->player))
          add_entity(m->player, label_from_id(m->player), where, true);
      out.kb.relations.push_back(
          RelationInstance{rt.name, EntityId(source->player), EntityId(target->player)});
    }
  }

  if (default_facet)
    out.kb.facets.push_back(Facet{std::string(kDefaultFacet), "Default"});
  out.kb.composition_overrides = sidecar.composition_overrides;
  return out;
}

}  // namespace kbir
