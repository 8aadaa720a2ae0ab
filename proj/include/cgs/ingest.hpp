#pragma once

// Graph definition file (JSON) reader and writer.
//
//   {
//     "format_version": "1",
//     "name": "lenet",
//     "nodes": [ {"name": "backbone/Conv1/Conv2D-op1", "kind": "operation",
//                 "op_type": "Conv2D", "attrs": {"precision": "FP16"}}, ... ],
//     "edges": [ {"src": "...", "dst": "..."}, ... ]
//   }

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cgs/error.hpp"
#include "cgs/graph_model.hpp"

namespace cgs {

inline constexpr std::string_view kFormatVersion = "1";

namespace detail {

inline void line_col(std::string_view text, std::size_t offset, std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error::schema(key, "missing in " + where);
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw Error::schema(key, "expected string in " + where);
  return v.get<std::string>();
}

inline NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "operation") return NodeKind::Operation;
  if (s == "constant") return NodeKind::Constant;
  if (s == "parameter") return NodeKind::Parameter;
  throw Error::schema("kind", "invalid value \"" + s + "\" in " + where);
}

}  // namespace detail

/// Sorts nodes by name and edges by (src, dst); the canonical form written
/// by emit_graph_file.
inline RawGraph canonical(RawGraph g) {
  std::sort(g.nodes.begin(), g.nodes.end(), [](const RawNode& a, const RawNode& b) { return a.name < b.name; });
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

inline RawGraph parse_graph_file(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 0, col = 0;
    detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1, line, col);
    throw Error::syntax(line, col, e.what());
  }

  if (!doc.is_object()) throw Error::schema("<root>", "expected object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "format_version" && key != "name" && key != "nodes" && key != "edges")
      throw Error::schema(key, "unknown top-level field");
  }
  if (detail::require_string(doc, "format_version", "graph file") != kFormatVersion)
    throw Error::schema("format_version", "unsupported version");

  RawGraph g;
  g.name = detail::require_string(doc, "name", "graph file");

  const auto& nodes = detail::require(doc, "nodes", "graph file");
  if (!nodes.is_array()) throw Error::schema("nodes", "expected array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!n.is_object()) throw Error::schema(where, "expected object");
    for (const auto& [key, _] : n.items()) {
      if (key != "name" && key != "kind" && key != "op_type" && key != "attrs")
        throw Error::schema(key, "unknown field in " + where);
    }
    RawNode node;
    node.name = detail::require_string(n, "name", where);
    node.kind = detail::parse_kind(detail::require_string(n, "kind", where), where);
    if (node.kind == NodeKind::Operation) {
      node.op_type = detail::require_string(n, "op_type", where);
      if (node.op_type.empty()) throw Error::schema("op_type", "empty in " + where);
    } else if (n.contains("op_type")) {
      throw Error::schema("op_type", "only allowed for operation nodes (" + where + ")");
    }
    if (const auto it = n.find("attrs"); it != n.end()) {
      if (!it->is_object()) throw Error::schema("attrs", "expected object in " + where);
      for (const auto& [key, value] : it->items()) {
        if (!value.is_string()) throw Error::schema("attrs." + key, "expected string in " + where);
        node.attrs.emplace(key, value.get<std::string>());
      }
    }
    g.nodes.push_back(std::move(node));
  }

  const auto& edges = detail::require(doc, "edges", "graph file");
  if (!edges.is_array()) throw Error::schema("edges", "expected array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!e.is_object()) throw Error::schema(where, "expected object");
    for (const auto& [key, _] : e.items()) {
      if (key != "src" && key != "dst") throw Error::schema(key, "unknown field in " + where);
    }
    g.edges.push_back({detail::require_string(e, "src", where), detail::require_string(e, "dst", where)});
  }

  // Semantic validation (duplicates, dangling edges, data-node rules).
  (void)build_hierarchy(g);
  return g;
}

inline std::string emit_graph_file(const RawGraph& raw) {
  const RawGraph g = canonical(raw);
  nlohmann::ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["name"] = g.name;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) {
    nlohmann::ordered_json node;
    node["name"] = n.name;
    node["kind"] = to_string(n.kind);
    if (n.kind == NodeKind::Operation) node["op_type"] = n.op_type;
    node["attrs"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : n.attrs) node["attrs"][k] = v;
    doc["nodes"].push_back(std::move(node));
  }
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) doc["edges"].push_back({{"src", e.src}, {"dst", e.dst}});
  return doc.dump(2) + "\n";
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path);
  out << content;
}

inline RawGraph load_graph_file(const std::string& path) { return parse_graph_file(read_file(path)); }

}  // namespace cgs
