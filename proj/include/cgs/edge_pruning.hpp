#pragma once

// Module recognition and edge update.
//
// A metanode with more than `threshold` descendants is a module; its level
// is its depth in the tree. Each leaf edge u->v, seen from the current
// frontier (a = rep(u), b = rep(v)), is sliced into at most three segments
// around the lowest common ancestor L of a and b, with A and B the children
// of L on the way to a and b:
//
//   a --hidden--> A.out_port ==module/normal==> B.in_port --hidden--> b
//
// Ports are only used when A or B is a module; otherwise the edge stays a
// single NormalEdge between node borders. A hidden segment exists when A
// (resp. B) is an expanded module strictly containing a (resp. b).

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cgs/concept_graph.hpp"
#include "cgs/error.hpp"
#include "cgs/graph_model.hpp"

namespace cgs {

inline constexpr int kDefaultModuleThreshold = 20;

struct ModuleInfo {
  std::vector<bool> is_module;  // by tree index
  std::map<TreeIndex, int> level;

  bool contains(TreeIndex i) const { return i >= 0 && static_cast<std::size_t>(i) < is_module.size() && is_module[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return level.size(); }
};

inline ModuleInfo recognize_modules(const HierarchyTree& tree, long long threshold) {
  if (threshold < 1) throw Error(Errc::InvalidOption, "module threshold must be >= 1");
  ModuleInfo info;
  info.is_module.assign(tree.size(), false);
  for (const TreeIndex m : tree.metanodes()) {
    if (static_cast<long long>(tree[m].descendant_count) > threshold) {
      info.is_module[static_cast<std::size_t>(m)] = true;
      info.level[m] = tree[m].depth;
    }
  }
  return info;
}

enum class PortSide { Input, Output };
enum class PortKind { Module, NonModule };
enum class EdgeKind { ModuleEdge, HiddenEdge, NormalEdge };

constexpr std::string_view to_string(PortSide s) { return s == PortSide::Input ? "input" : "output"; }
constexpr std::string_view to_string(PortKind k) { return k == PortKind::Module ? "module-port" : "nonmodule-port"; }
constexpr std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::ModuleEdge: return "ModuleEdge";
    case EdgeKind::HiddenEdge: return "HiddenEdge";
    case EdgeKind::NormalEdge: return "NormalEdge";
  }
  return "NormalEdge";
}

struct PortKey {
  TreeIndex owner = -1;
  PortSide side = PortSide::Output;
  int level = 0;
  PortKind kind = PortKind::Module;

  friend auto operator<=>(const PortKey&, const PortKey&) = default;
  friend bool operator==(const PortKey&, const PortKey&) = default;
};

struct SegmentEnd {
  TreeIndex node = -1;
  std::optional<PortKey> port;

  friend auto operator<=>(const SegmentEnd&, const SegmentEnd&) = default;
  friend bool operator==(const SegmentEnd&, const SegmentEnd&) = default;
};

struct Segment {
  EdgeKind kind = EdgeKind::NormalEdge;
  SegmentEnd src;
  SegmentEnd dst;
};

/// Slices one leaf edge against the frontier map `rep`. Returns no segments
/// when both ends fall inside the same frontier node.
inline std::vector<Segment> slice_edge(const HierarchyTree& tree, const LeafEdge& e, std::span<const TreeIndex> rep,
                                       const ModuleInfo& modules) {
  auto rep_of = [&](TreeIndex v) {
    if (v < 0 || static_cast<std::size_t>(v) >= rep.size() || rep[static_cast<std::size_t>(v)] < 0)
      throw Error(Errc::UnresolvedEndpoint, v >= 0 && static_cast<std::size_t>(v) < tree.size() ? tree[v].path : "?");
    return rep[static_cast<std::size_t>(v)];
  };
  const TreeIndex a = rep_of(e.src);
  const TreeIndex b = rep_of(e.dst);
  if (a == b) return {};

  const TreeIndex l = tree.lca(a, b);
  const TreeIndex big_a = *tree.child_toward(l, a);
  const TreeIndex big_b = *tree.child_toward(l, b);
  if (!modules.contains(big_a) && !modules.contains(big_b)) {
    return {Segment{EdgeKind::NormalEdge, {a, std::nullopt}, {b, std::nullopt}}};
  }

  std::vector<Segment> out;
  SegmentEnd mid_src{a, std::nullopt};
  SegmentEnd mid_dst{b, std::nullopt};
  std::optional<Segment> tail;

  if (modules.contains(big_a)) {
    const int level = tree[big_a].depth;
    const PortKey outer{big_a, PortSide::Output, level, PortKind::Module};
    mid_src = {big_a, outer};
    if (a != big_a) {
      out.push_back(Segment{EdgeKind::HiddenEdge, {a, PortKey{a, PortSide::Output, level, PortKind::NonModule}}, mid_src});
    }
  }
  if (modules.contains(big_b)) {
    const int level = tree[big_b].depth;
    const PortKey outer{big_b, PortSide::Input, level, PortKind::Module};
    mid_dst = {big_b, outer};
    if (b != big_b) {
      tail = Segment{EdgeKind::HiddenEdge, mid_dst, {b, PortKey{b, PortSide::Input, level, PortKind::NonModule}}};
    }
  }
  const bool both_ports = mid_src.port.has_value() && mid_dst.port.has_value();
  out.push_back(Segment{both_ports ? EdgeKind::ModuleEdge : EdgeKind::NormalEdge, mid_src, mid_dst});
  if (tail) out.push_back(*tail);
  return out;
}

struct Port {
  TreeIndex owner = -1;
  PortSide side = PortSide::Output;
  int level = 0;
  PortKind kind = PortKind::Module;
  std::vector<std::size_t> hidden_edges;
};

struct Endpoint {
  TreeIndex node = -1;
  std::optional<std::size_t> port;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct VisibleEdge {
  EdgeKind kind = EdgeKind::NormalEdge;
  Endpoint src;
  Endpoint dst;
  std::vector<LeafEdge> contributors;
  bool hidden = false;
};

struct PrunedEdges {
  std::vector<TreeIndex> rep;  // frontier representative by tree index
  std::vector<VisibleEdge> edges;
  std::vector<Port> ports;
  std::map<LeafEdge, std::vector<std::size_t>> chains;  // leaf edge -> visible edge ids, in flow order
  std::vector<LeafEdge> internal;  // leaf edges inside a single frontier node
};

inline PrunedEdges prune_edges(const ProcessedGraph& pg, std::span<const TreeIndex> frontier, const ModuleInfo& modules) {
  PrunedEdges out;
  out.rep = frontier_map(pg.tree, frontier);
  std::map<PortKey, std::size_t> port_ids;
  std::map<std::tuple<EdgeKind, SegmentEnd, SegmentEnd>, std::size_t> edge_ids;

  auto intern_port = [&](const std::optional<PortKey>& key) -> std::optional<std::size_t> {
    if (!key) return std::nullopt;
    auto [it, inserted] = port_ids.try_emplace(*key, out.ports.size());
    if (inserted) out.ports.push_back(Port{key->owner, key->side, key->level, key->kind, {}});
    return it->second;
  };

  for (const auto& e : pg.leaf_edges) {
    const auto segments = slice_edge(pg.tree, e, out.rep, modules);
    auto& chain = out.chains[e];
    if (segments.empty()) {
      out.internal.push_back(e);
      continue;
    }
    for (const auto& s : segments) {
      auto [it, inserted] = edge_ids.try_emplace({s.kind, s.src, s.dst}, out.edges.size());
      if (inserted) {
        VisibleEdge ve;
        ve.kind = s.kind;
        ve.src = {s.src.node, intern_port(s.src.port)};
        ve.dst = {s.dst.node, intern_port(s.dst.port)};
        ve.hidden = s.kind == EdgeKind::HiddenEdge;
        if (ve.hidden) {
          out.ports[*ve.src.port].hidden_edges.push_back(it->second);
          out.ports[*ve.dst.port].hidden_edges.push_back(it->second);
        }
        out.edges.push_back(std::move(ve));
      }
      out.edges[it->second].contributors.push_back(e);
      chain.push_back(it->second);
    }
  }
  return out;
}

inline const std::vector<std::size_t>& reveal_hidden(const PrunedEdges& pruned, std::size_t port_id) {
  if (port_id >= pruned.ports.size()) throw Error(Errc::UnknownPort, std::to_string(port_id));
  return pruned.ports[port_id].hidden_edges;
}

}  // namespace cgs
