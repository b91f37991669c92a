// kbir: import, validate, query and serve knowledge bases.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kbir/inference.hpp"
#include "kbir/ingest.hpp"
#include "kbir/service.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kbir::Error(kbir::ErrorKind::NotFound, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw kbir::Error(kbir::ErrorKind::InvalidArgument, "cannot write " + path);
}

/// Prints findings; returns true when any is an error or warning.
bool report(const kbir::ValidationReport& r) {
  bool bad = false;
  for (const auto& f : r.findings) {
    std::cout << to_string(f.severity) << " " << to_string(f.code) << ": " << f.message;
    if (!f.locations.empty()) {
      std::cout << " [";
      for (std::size_t i = 0; i < f.locations.size(); ++i)
        std::cout << (i ? ", " : "") << f.locations[i];
      std::cout << "]";
    }
    std::cout << "\n";
    bad = bad || f.severity != kbir::Severity::Info;
  }
  return bad;
}

kbir::KnowledgeBase load_kb(const std::string& path, std::vector<kbir::DocumentRecord>* docs) {
  auto native = kbir::load_native(read_file(path));
  if (docs) *docs = std::move(native.documents);
  return kbir::build_kb(std::move(native.kb));
}

int run_import(const std::vector<std::string>& xtm, const std::string& sidecar_path,
               const std::string& docs_path, const std::string& out) {
  kbir::CategorySidecar sidecar;
  if (!sidecar_path.empty()) sidecar = kbir::load_sidecar(read_file(sidecar_path));
  std::vector<std::string> texts;
  for (const auto& f : xtm) texts.push_back(read_file(f));
  auto imported = kbir::import_xtm(texts, sidecar);
  for (const auto& w : imported.warnings)
    std::cerr << "warning: " << w.location << ": " << w.message << "\n";

  std::vector<kbir::DocumentRecord> docs;
  if (!docs_path.empty()) docs = kbir::load_corpus(read_file(docs_path));

  auto kb = kbir::build_kb_permissive(std::move(imported.kb));
  auto findings = kbir::validate_kb(kb);
  if (!docs.empty() && !findings.has_errors()) kbir::build_postings(kb, docs);
  write_file(out, kbir::save_native(kb.data(), docs));
  return report(findings) ? kFindings : kOk;
}

int run_validate(const std::string& path) {
  auto native = kbir::load_native(read_file(path));
  auto kb = kbir::build_kb_permissive(std::move(native.kb));
  bool bad = report(kbir::validate_kb(kb));
  try {
    kbir::build_postings(kb, native.documents);
  } catch (const kbir::Error& e) {
    std::cout << "Error " << to_string(e.kind()) << ": " << e.what() << "\n";
    bad = true;
  }
  if (!bad) std::cout << "ok\n";
  return bad ? kFindings : kOk;
}

int run_query(const std::string& kb_path, const std::string& query_file,
              const std::string& rules_file, const std::string& format) {
  std::vector<kbir::DocumentRecord> docs;
  auto native = kbir::load_native(read_file(kb_path));
  kbir::Service service(kbir::make_snapshot(std::move(native.kb), std::move(native.documents)));

  kbir::QueryRequest request{read_file(query_file),
                             rules_file.empty() ? std::string() : read_file(rules_file), true};
  auto result = service.handle_query(request);
  if (auto* error = std::get_if<kbir::ErrorPayload>(&result)) {
    if (format == "json")
      std::cout << kbir::to_json(*error) << "\n";
    else
      std::cerr << "error: " << to_string(error->kind) << ": " << error->message << "\n";
    return kUsage;
  }
  const auto& response = std::get<kbir::QueryResponse>(result);
  if (format == "json") {
    std::cout << kbir::to_json(response) << "\n";
    return kOk;
  }
  for (const auto& w : response.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "Topics (" << response.topics.size() << "):\n";
  for (const auto& t : response.topics)
    std::cout << "  " << t.label << " (" << t.doc_count << ")\n";
  std::cout << "Documents (" << response.documents.size() << "):\n";
  for (const auto& d : response.documents) {
    std::cout << "  ";
    if (!d.creators.empty()) std::cout << d.creators.front() << ": ";
    std::cout << d.title;
    if (d.year) std::cout << " (" << *d.year << ")";
    std::cout << "\n";
  }
  return kOk;
}

int run_paths(const std::string& kb_path, const std::string& from, std::size_t max_len) {
  auto kb = load_kb(kb_path, nullptr);
  auto id = kbir::resolve_label(kb, from);
  for (const auto& [k, layer] : kbir::rt_neighborhood(kb, id, max_len)) {
    std::cout << k << ":";
    for (const auto& e : layer) std::cout << " " << e;
    std::cout << "\n";
  }
  return kOk;
}

kbir::HttpServer* g_server = nullptr;

int run_serve(const std::string& kb_path, const std::string& host, int port,
              const std::string& ui_dir) {
  auto native = kbir::load_native(read_file(kb_path));
  kbir::Service service(kbir::make_snapshot(std::move(native.kb), std::move(native.documents)));
  kbir::HttpServer server(service, ui_dir.empty() ? std::nullopt : std::optional(ui_dir));
  int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return kUsage;
  }
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cerr << "listening on http://" << host << ":" << bound << "\n";
  server.listen();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge base retrieval with typed relations"};
  app.require_subcommand(1);

  std::vector<std::string> xtm;
  std::string sidecar, docs, out, kb_path, query_file, rules_file, format = "text", from,
                                                                   ui_dir, host = "127.0.0.1";
  std::size_t max_len = 3;
  int port = 8080;

  auto* import = app.add_subcommand("import", "Import XTM fragments into the native format");
  import->add_option("--xtm", xtm, "XTM input files")->required()->check(CLI::ExistingFile);
  import->add_option("--sidecar", sidecar, "Relation category sidecar")->check(CLI::ExistingFile);
  import->add_option("--docs", docs, "Document corpus (JSON lines)")->check(CLI::ExistingFile);
  import->add_option("--out", out, "Output knowledge base")->required();

  auto* validate = app.add_subcommand("validate", "Report knowledge base invariant violations");
  validate->add_option("KB", kb_path)->required()->check(CLI::ExistingFile);

  auto* query = app.add_subcommand("query", "Evaluate a query");
  query->add_option("KB", kb_path)->required()->check(CLI::ExistingFile);
  query->add_option("--query-file", query_file)->required()->check(CLI::ExistingFile);
  query->add_option("--rules-file", rules_file)->check(CLI::ExistingFile);
  query->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

  auto* paths = app.add_subcommand("paths", "Related-term neighbourhood by distance");
  paths->add_option("KB", kb_path)->required()->check(CLI::ExistingFile);
  paths->add_option("--from", from)->required();
  paths->add_option("--max-len", max_len)->check(CLI::PositiveNumber);

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("KB", kb_path)->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);
  serve->add_option("--ui-dir", ui_dir)->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*import) return run_import(xtm, sidecar, docs, out);
    if (*validate) return run_validate(kb_path);
    if (*query) return run_query(kb_path, query_file, rules_file, format);
    if (*paths) return run_paths(kb_path, from, max_len);
    if (*serve) return run_serve(kb_path, host, port, ui_dir);
  } catch (const kbir::BuildError& e) {
    std::cerr << "error: " << e.what() << "\n";
    report(e.report());
    return kFindings;
  } catch (const kbir::Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
