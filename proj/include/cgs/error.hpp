#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cgs {

enum class Errc {
  DuplicatePath,
  PathConflict,
  InvalidPath,
  DanglingEdge,
  DuplicateEdge,
  SelfLoop,
  DataToDataEdge,
  EdgeIntoDataNode,
  NotAMetaNode,
  NotExpandable,
  UnknownNode,
  UnknownPort,
  UnknownPile,
  InvalidFrontier,
  UnresolvedEndpoint,
  InvalidOption,
  InvalidSpec,
  SyntaxError,
  SchemaError,
  CycleWithoutFeedbackSet,
};

constexpr std::string_view to_string(Errc c) {
  switch (c) {
    case Errc::DuplicatePath: return "DuplicatePath";
    case Errc::PathConflict: return "PathConflict";
    case Errc::InvalidPath: return "InvalidPath";
    case Errc::DanglingEdge: return "DanglingEdge";
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::DataToDataEdge: return "DataToDataEdge";
    case Errc::EdgeIntoDataNode: return "EdgeIntoDataNode";
    case Errc::NotAMetaNode: return "NotAMetaNode";
    case Errc::NotExpandable: return "NotExpandable";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::UnknownPort: return "UnknownPort";
    case Errc::UnknownPile: return "UnknownPile";
    case Errc::InvalidFrontier: return "InvalidFrontier";
    case Errc::UnresolvedEndpoint: return "UnresolvedEndpoint";
    case Errc::InvalidOption: return "InvalidOption";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::CycleWithoutFeedbackSet: return "CycleWithoutFeedbackSet";
  }
  return "Unknown";
}

// Parse errors (SyntaxError/SchemaError) are reported as 2 by the CLI, the
// rest of the graph-semantic family as 3.
constexpr bool is_parse_error(Errc c) {
  return c == Errc::SyntaxError || c == Errc::SchemaError;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(format(code, what)), code_(code) {}

  static Error syntax(std::size_t line, std::size_t column, const std::string& what) {
    Error e(Errc::SyntaxError,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
    e.line_ = line;
    e.column_ = column;
    return e;
  }

  static Error schema(const std::string& field, const std::string& what) {
    Error e(Errc::SchemaError, field + ": " + what);
    e.field_ = field;
    return e;
  }

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(Errc code, const std::string& what) {
    return std::string(to_string(code)) + ": " + what;
  }

  Errc code_;
  std::size_t line_ = 0;
  std::size_t column_ = 0;
  std::string field_;
};

}  // namespace cgs
