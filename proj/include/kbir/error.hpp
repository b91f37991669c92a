#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kbir {

enum class ErrorKind {
  // knowledge base construction and lookup
  DuplicateId,
  DanglingReference,
  PolyhierarchyViolation,
  HierarchyCycle,
  InvalidKnowledgeBase,
  NotFound,
  Ambiguous,
  UnknownEntity,
  UnknownRelationType,
  InvalidArgument,
  // query language
  SyntaxError,
  DuplicateRule,
  UnknownSelectVariable,
  UnknownPredicate,
  UnknownRole,
  UnboundEquality,
  UnsafeRule,
  ConstantNotFound,
  Timeout,
  // documents
  DuplicateDocId,
  UnknownSubject,
  // interchange
  XmlMalformed,
  UnresolvedFragmentRef,
  AssociationArityNot2,
  SchemaViolation,
  // service
  InvalidRequest,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// 1-based position in a source text.
struct SourcePos {
  int line = 1;
  int column = 1;
  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

/// Every failure raised by the library. `kind` is stable and is what the
/// service reports to clients; `message` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<SourcePos> pos = std::nullopt)
      : std::runtime_error(message), kind_(kind), pos_(pos) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<SourcePos>& position() const noexcept { return pos_; }

 private:
  ErrorKind kind_;
  std::optional<SourcePos> pos_;
};

}  // namespace kbir
