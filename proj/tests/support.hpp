#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "kbir/ingest.hpp"
#include "kbir/ontology.hpp"

namespace kbir::test {

inline std::string data_path(const std::string& name) { return std::string(KBIR_DATA_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline NativeDocument load_fixture(const std::string& name) {
  return load_native(read_file(data_path(name)));
}

inline const KnowledgeBase& asist() {
  static const KnowledgeBase kb = build_kb(load_fixture("asist.kb.json").kb);
  return kb;
}

inline const KnowledgeBase& songbirds() {
  static const KnowledgeBase kb = build_kb(load_fixture("songbirds.kb.json").kb);
  return kb;
}

inline std::set<EntityId> ids(std::initializer_list<const char*> list) {
  std::set<EntityId> out;
  for (auto s : list) out.emplace(s);
  return out;
}

}  // namespace kbir::test
