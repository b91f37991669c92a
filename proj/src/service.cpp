#include "kbir/service.hpp"

#include <algorithm>
#include <set>

#include <httplib.h>
#include <json.hpp>

namespace kbir {

namespace {

using Json = nlohmann::ordered_json;

bool label_less(const TopicRef& a, const TopicRef& b) {
  auto fa = fold_case(a.label), fb = fold_case(b.label);
  return fa != fb ? fa < fb : a.id < b.id;
}

Json optional_json(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

HttpReply reply(const ErrorPayload& e) { return {e.status, to_json(e)}; }

}  // namespace

std::shared_ptr<const Snapshot> make_snapshot(KbData kb, std::vector<DocumentRecord> documents) {
  auto built = build_kb(std::move(kb));
  auto index = build_postings(built, std::move(documents));
  return std::make_shared<const Snapshot>(Snapshot{std::move(built), std::move(index)});
}

ErrorPayload to_payload(const Error& e) {
  ErrorPayload p{e.kind(), e.what(), std::nullopt, std::nullopt, 400};
  if (auto pos = e.position()) {
    p.line = pos->line;
    p.column = pos->column;
  }
  if (e.kind() == ErrorKind::NotFound || e.kind() == ErrorKind::UnknownEntity) p.status = 404;
  return p;
}

Service::Service(std::shared_ptr<const Snapshot> snapshot, ServiceLimits limits)
    : snapshot_(std::move(snapshot)), limits_(limits) {
  if (!snapshot_) throw Error(ErrorKind::InvalidArgument, "service needs a snapshot");
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

void Service::replace(std::shared_ptr<const Snapshot> snapshot) {
  if (!snapshot) throw Error(ErrorKind::InvalidArgument, "service needs a snapshot");
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snapshot);
}

std::variant<QueryResponse, ErrorPayload> Service::handle_query(const QueryRequest& request) const {
  auto snap = snapshot();
  try {
    if (request.query.find_first_not_of(" \t\r\n") == std::string::npos)
      throw Error(ErrorKind::SyntaxError, "the query is empty", SourcePos{1, 1});

    auto program = query::parse_program(request.query, request.rules);
    query::EvalOptions options;
    options.deadline = std::chrono::steady_clock::now() + limits_.query_budget;
    auto result = query::evaluate(snap->kb, program, options);

    QueryResponse response;
    response.variables = result.variables;
    for (const auto& w : program.warnings) response.warnings.push_back(w.message);
    for (const auto& row : result.rows) {
      std::vector<std::string> values;
      for (const auto& v : row.values) values.push_back(v.str());
      response.bindings.push_back(std::move(values));
    }
    if (!result.variables.empty()) {
      auto first = result.column_values(result.variables.front());
      std::set<EntityId> topics(first.begin(), first.end());
      auto found = retrieve(snap->index, snap->kb, topics);
      response.topics = std::move(found.topics);
      if (request.include_documents)
        for (const auto* d : found.documents)
          response.documents.push_back({d->doc_id, d->title, d->year, d->creators});
    }
    return response;
  } catch (const Error& e) {
    return to_payload(e);
  } catch (const std::exception& e) {
    return ErrorPayload{ErrorKind::InvalidRequest, e.what(), std::nullopt, std::nullopt, 500};
  }
}

std::variant<TopicDetail, ErrorPayload> Service::topic_detail(std::string_view id) const {
  auto snap = snapshot();
  try {
    return kbir::topic_detail(snap->kb, EntityId(std::string(id)));
  } catch (const Error& e) {
    return to_payload(e);
  }
}

TopicDetail topic_detail(const KnowledgeBase& kb, const EntityId& id) {
  auto focal = kb.find(id);
  if (!focal) throw Error(ErrorKind::NotFound, "no topic with id '" + id.str() + "'");
  const auto& e = kb.entity(*focal);

  TopicDetail detail{e.id, e.preferred_label, e.synonyms, e.facet, {}};
  for (const auto& type : kb.data().relation_types) {
    RelationGroup group{type.name, type.label.empty() ? type.name : type.label, {}};
    for (auto dir : {Direction::Forward, Direction::Inverse}) {
      const bool source = dir == Direction::Forward;
      const auto& role = source ? type.source_role : type.target_role;
      const auto& role_label = source ? type.source_role_label : type.target_role_label;
      RoleGroup rg{role, role_label.empty() ? role : role_label, {}};
      for (auto other : kb.neighbors(type, dir, *focal))
        rg.topics.push_back({kb.entity(other).id, kb.entity(other).preferred_label});
      if (rg.topics.empty()) continue;
      std::sort(rg.topics.begin(), rg.topics.end(), label_less);
      group.roles.push_back(std::move(rg));
    }
    if (!group.roles.empty()) detail.groups.push_back(std::move(group));
  }
  std::sort(detail.groups.begin(), detail.groups.end(),
            [](const RelationGroup& a, const RelationGroup& b) {
              auto fa = fold_case(a.label), fb = fold_case(b.label);
              return fa != fb ? fa < fb : a.type < b.type;
            });
  return detail;
}

// ---------------------------------------------------------------------------

std::string to_json(const QueryResponse& r) {
  Json topics = Json::array();
  for (const auto& t : r.topics)
    topics.push_back({{"id", t.id.str()}, {"label", t.label}, {"doc_count", t.doc_count}});
  Json documents = Json::array();
  for (const auto& d : r.documents) {
    Json j = {{"doc_id", d.doc_id}, {"title", d.title}};
    j["year"] = d.year ? Json(*d.year) : Json(nullptr);
    j["creators"] = d.creators;
    documents.push_back(std::move(j));
  }
  Json j = Json::object();
  j["topics"] = std::move(topics);
  j["documents"] = std::move(documents);
  j["variables"] = r.variables;
  j["bindings"] = r.bindings;
  j["warnings"] = r.warnings;
  return j.dump();
}

std::string to_json(const ErrorPayload& e) {
  Json inner = Json::object();
  inner["kind"] = std::string(to_string(e.kind));
  inner["message"] = e.message;
  inner["line"] = optional_json(e.line);
  inner["column"] = optional_json(e.column);
  return Json{{"error", std::move(inner)}}.dump();
}

std::string to_json(const TopicDetail& d) {
  Json groups = Json::array();
  for (const auto& g : d.groups) {
    Json roles = Json::array();
    for (const auto& r : g.roles) {
      Json topics = Json::array();
      for (const auto& t : r.topics) topics.push_back({{"id", t.id.str()}, {"label", t.label}});
      roles.push_back({{"role", r.role}, {"label", r.label}, {"topics", std::move(topics)}});
    }
    groups.push_back({{"type", g.type}, {"label", g.label}, {"roles", std::move(roles)}});
  }
  Json j = Json::object();
  j["id"] = d.id.str();
  j["label"] = d.label;
  j["synonyms"] = d.synonyms;
  j["facet"] = d.facet;
  j["groups"] = std::move(groups);
  return j.dump();
}

HttpReply post_query(const Service& service, std::string_view body) {
  auto invalid = [](std::string message) {
    return reply(ErrorPayload{ErrorKind::InvalidRequest, std::move(message), std::nullopt,
                              std::nullopt, 400});
  };
  if (body.size() > service.limits().max_body_bytes)
    return invalid("request body exceeds " + std::to_string(service.limits().max_body_bytes) +
                   " bytes");

  QueryRequest request;
  try {
    auto j = Json::parse(body.begin(), body.end());
    if (!j.is_object()) return invalid("request body must be a JSON object");
    auto q = j.find("query");
    if (q == j.end() || !q->is_string()) return invalid("field 'query' must be a string");
    request.query = q->get<std::string>();
    if (auto r = j.find("rules"); r != j.end() && !r->is_null()) {
      if (!r->is_string()) return invalid("field 'rules' must be a string");
      request.rules = r->get<std::string>();
    }
    if (auto d = j.find("include_documents"); d != j.end() && !d->is_null()) {
      if (!d->is_boolean()) return invalid("field 'include_documents' must be a boolean");
      request.include_documents = d->get<bool>();
    }
  } catch (const Json::exception& e) {
    return invalid(std::string("malformed JSON: ") + e.what());
  }

  auto result = service.handle_query(request);
  if (auto* error = std::get_if<ErrorPayload>(&result)) return reply(*error);
  return {200, to_json(std::get<QueryResponse>(result))};
}

HttpReply get_topic(const Service& service, std::string_view id) {
  auto result = service.topic_detail(id);
  if (auto* error = std::get_if<ErrorPayload>(&result)) return reply(*error);
  return {200, to_json(std::get<TopicDetail>(result))};
}

HttpReply get_health() { return {200, R"({"status":"ok"})"}; }

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const Service& service, std::optional<std::string> ui_dir)
    : impl_(std::make_unique<Impl>()) {
  auto& svr = impl_->server;
  auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  // Oversized bodies are refused by post_query with a structured error.
  svr.set_payload_max_length(service.limits().max_body_bytes * 4);
  svr.Post("/api/query", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_query(service, req.body));
  });
  svr.Get(R"(/api/topics/([^/]+))",
          [&service, send](const httplib::Request& req, httplib::Response& res) {
            send(res, get_topic(service, req.matches[1].str()));
          });
  svr.Get("/api/health",
          [send](const httplib::Request&, httplib::Response& res) { send(res, get_health()); });
  if (ui_dir) svr.set_mount_point("/", *ui_dir);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace kbir
