#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kbir/documents.hpp"
#include "kbir/ontology.hpp"
#include "kbir/query.hpp"

namespace kbir {

/// One immutable generation of the served data.
struct Snapshot {
  KnowledgeBase kb;
  PostingIndex index;
};

std::shared_ptr<const Snapshot> make_snapshot(KbData kb, std::vector<DocumentRecord> documents);

struct QueryRequest {
  std::string query;
  std::string rules;
  bool include_documents = true;
};

struct DocumentSummary {
  std::string doc_id;
  std::string title;
  std::optional<int> year;
  std::vector<std::string> creators;
};

struct QueryResponse {
  std::vector<TopicCount> topics;
  std::vector<DocumentSummary> documents;
  std::vector<std::string> variables;
  std::vector<std::vector<std::string>> bindings;
  std::vector<std::string> warnings;
};

struct ErrorPayload {
  ErrorKind kind;
  std::string message;
  std::optional<std::size_t> line;
  std::optional<std::size_t> column;
  int status = 400;
};

ErrorPayload to_payload(const Error& e);

struct TopicRef {
  EntityId id;
  std::string label;
};

/// Entities related to the focal topic, under the role the focal topic plays.
struct RoleGroup {
  std::string role;
  std::string label;
  std::vector<TopicRef> topics;
};

struct RelationGroup {
  std::string type;
  std::string label;
  std::vector<RoleGroup> roles;
};

struct TopicDetail {
  EntityId id;
  std::string label;
  std::vector<std::string> synonyms;
  std::string facet;
  std::vector<RelationGroup> groups;  // by label
};

struct ServiceLimits {
  std::size_t max_body_bytes = 64 * 1024;
  std::chrono::milliseconds query_budget{10'000};
};

class Service {
 public:
  explicit Service(std::shared_ptr<const Snapshot> snapshot, ServiceLimits limits = {});

  std::shared_ptr<const Snapshot> snapshot() const;
  /// Requests already running keep the generation they started with.
  void replace(std::shared_ptr<const Snapshot> snapshot);

  const ServiceLimits& limits() const noexcept { return limits_; }

  /// Never throws for bad input; failures come back as ErrorPayload.
  std::variant<QueryResponse, ErrorPayload> handle_query(const QueryRequest& request) const;
  std::variant<TopicDetail, ErrorPayload> topic_detail(std::string_view id) const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  ServiceLimits limits_;
};

/// Builds the grouped relation view of one topic. Throws Error{NotFound}.
TopicDetail topic_detail(const KnowledgeBase& kb, const EntityId& id);

// ---------------------------------------------------------------------------
// JSON / HTTP surface
// ---------------------------------------------------------------------------

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

HttpReply post_query(const Service& service, std::string_view body);
HttpReply get_topic(const Service& service, std::string_view id);
HttpReply get_health();

std::string to_json(const QueryResponse& response);
std::string to_json(const ErrorPayload& error);
std::string to_json(const TopicDetail& detail);

/// HTTP front end: /api/query, /api/topics/{id}, /api/health, and static
/// files from `ui_dir` when given.
class HttpServer {
 public:
  HttpServer(const Service& service, std::optional<std::string> ui_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `port`, or any free port when 0. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kbir
