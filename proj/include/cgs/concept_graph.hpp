#pragma once

// Concept graph mode: removes directed cycles that namespace grouping
// introduces between top-level metanodes, by splitting one metanode of each
// cycle in two, and classifies metanodes into DNN layer types.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cgs/error.hpp"
#include "cgs/graph_algo.hpp"
#include "cgs/graph_model.hpp"

namespace cgs {

enum class LayerClass { CNNLayer, RNNLayer, FCLayer, NormalLayer };

constexpr std::string_view to_string(LayerClass c) {
  switch (c) {
    case LayerClass::CNNLayer: return "CNNLayer";
    case LayerClass::RNNLayer: return "RNNLayer";
    case LayerClass::FCLayer: return "FCLayer";
    case LayerClass::NormalLayer: return "NormalLayer";
  }
  return "NormalLayer";
}

struct InducedEdge {
  TreeIndex src;
  TreeIndex dst;
  std::vector<LeafEdge> contributors;
};

/// Maps every tree node covered by `frontier` to its frontier representative
/// (-1 where uncovered). Throws InvalidFrontier for overlapping entries or
/// uncovered leaves.
inline std::vector<TreeIndex> frontier_map(const HierarchyTree& tree, std::span<const TreeIndex> frontier) {
  std::vector<TreeIndex> rep(tree.size(), -1);
  for (const TreeIndex f : frontier) {
    if (f <= kRoot || static_cast<std::size_t>(f) >= tree.size()) throw Error(Errc::InvalidFrontier, "bad index");
    const auto end = static_cast<std::size_t>(f) + tree[f].descendant_count;
    for (auto i = static_cast<std::size_t>(f); i <= end; ++i) {
      if (rep[i] != -1) throw Error(Errc::InvalidFrontier, "overlapping entries at " + tree[f].path);
      rep[i] = f;
    }
  }
  for (std::size_t i = 1; i < tree.size(); ++i)
    if (tree.is_leaf(static_cast<TreeIndex>(i)) && rep[i] == -1)
      throw Error(Errc::InvalidFrontier, "leaf not covered: " + tree[static_cast<TreeIndex>(i)].path);
  return rep;
}

/// Lifts leaf edges onto a frontier; edges internal to one entry vanish.
inline std::vector<InducedEdge> induced_edges(const HierarchyTree& tree, std::span<const LeafEdge> leaf_edges,
                                              std::span<const TreeIndex> frontier) {
  const auto rep = frontier_map(tree, frontier);
  std::map<std::pair<TreeIndex, TreeIndex>, std::vector<LeafEdge>> lifted;
  for (const auto& e : leaf_edges) {
    const TreeIndex a = rep[static_cast<std::size_t>(e.src)];
    const TreeIndex b = rep[static_cast<std::size_t>(e.dst)];
    if (a != b) lifted[{a, b}].push_back(e);
  }
  std::vector<InducedEdge> out;
  out.reserve(lifted.size());
  for (auto& [key, contributors] : lifted) out.push_back({key.first, key.second, std::move(contributors)});
  return out;
}

inline std::vector<TreeIndex> top_level(const HierarchyTree& tree) { return tree[kRoot].children; }

struct CycleSplit {
  std::string original;
  std::vector<std::string> parts;                 // new metanode paths, in traversal order
  std::vector<std::vector<std::string>> members;  // leaf raw names per part
};

struct CycleReport {
  std::size_t cycles_found = 0;  // cyclic components seen on the first pass
  std::vector<CycleSplit> splits;
  int passes = 0;
  std::size_t residual_cycles = 0;  // cyclic components left after the last pass
  bool cap_exceeded = false;
};

namespace detail {

/// Leaf visiting order: Kahn's algorithm over operation edges, preferring
/// ready leaves inside the top-level metanode visited last, then the
/// smallest tree index. Attached data nodes are skipped.
inline std::vector<TreeIndex> grouped_topological_order(const ProcessedGraph& pg, const std::vector<TreeIndex>& top_of) {
  const auto& tree = pg.tree;
  std::vector<int> indeg(tree.size(), 0);
  std::vector<std::vector<TreeIndex>> out(tree.size());
  for (const auto& e : pg.leaf_edges) {
    ++indeg[static_cast<std::size_t>(e.dst)];
    out[static_cast<std::size_t>(e.src)].push_back(e.dst);
  }
  std::set<TreeIndex> ready;
  std::map<TreeIndex, std::set<TreeIndex>> ready_in;
  auto push = [&](TreeIndex v) {
    ready.insert(v);
    ready_in[top_of[static_cast<std::size_t>(v)]].insert(v);
  };
  std::vector<TreeIndex> leaves;
  for (const TreeIndex v : tree.leaves()) {
    if (pg.is_attached(v)) continue;
    leaves.push_back(v);
    if (indeg[static_cast<std::size_t>(v)] == 0) push(v);
  }
  std::vector<TreeIndex> order;
  order.reserve(leaves.size());
  std::vector<bool> done(tree.size(), false);
  TreeIndex current_top = -1;
  while (!ready.empty()) {
    TreeIndex v;
    auto it = ready_in.find(current_top);
    if (it != ready_in.end() && !it->second.empty()) {
      v = *it->second.begin();
    } else {
      v = *ready.begin();
    }
    ready.erase(v);
    ready_in[top_of[static_cast<std::size_t>(v)]].erase(v);
    current_top = top_of[static_cast<std::size_t>(v)];
    order.push_back(v);
    done[static_cast<std::size_t>(v)] = true;
    for (const TreeIndex w : out[static_cast<std::size_t>(v)])
      if (--indeg[static_cast<std::size_t>(w)] == 0) push(w);
  }
  // Leaf-level cycles: append whatever Kahn could not reach.
  for (const TreeIndex v : leaves)
    if (!done[static_cast<std::size_t>(v)]) order.push_back(v);
  return order;
}

inline std::string unique_name(const std::string& base, std::set<std::string>& taken) {
  std::string name = base;
  for (int k = 2; taken.contains(name); ++k) name = base + "_" + std::to_string(k);
  taken.insert(name);
  return name;
}

/// Computes the new relative segments (below `g`'s parent) of every leaf
/// under `g` when splitting it by `part_of_leaf`. Each part is named after
/// `g` plus its first child; mixed descendants are split the same way.
inline std::vector<std::string> split_segments(const HierarchyTree& tree, TreeIndex g, const std::vector<int>& part_of_leaf,
                                               std::set<std::string>& taken_at_parent,
                                               std::map<TreeIndex, std::vector<std::string>>& rel) {
  const auto begin = static_cast<std::size_t>(g);
  const auto end = begin + tree[g].descendant_count;
  std::vector<std::set<int>> parts(tree.size());
  for (auto i = end + 1; i-- > begin;) {
    const auto idx = static_cast<TreeIndex>(i);
    if (tree.is_leaf(idx)) {
      parts[i].insert(part_of_leaf[i]);
    } else {
      for (const TreeIndex c : tree[idx].children) parts[i].insert(parts[static_cast<std::size_t>(c)].begin(), parts[static_cast<std::size_t>(c)].end());
    }
  }

  std::map<std::pair<TreeIndex, int>, std::string> part_name;
  auto name_parts = [&](TreeIndex node, std::set<std::string>& taken) {
    for (const int p : parts[static_cast<std::size_t>(node)]) {
      std::string first_child;
      for (const TreeIndex c : tree[node].children) {
        if (parts[static_cast<std::size_t>(c)].contains(p)) {
          first_child = tree[c].segment;
          break;
        }
      }
      part_name[{node, p}] = unique_name(tree[node].segment + "_" + first_child, taken);
    }
  };

  name_parts(g, taken_at_parent);
  for (auto i = begin + 1; i <= end; ++i) {
    const auto idx = static_cast<TreeIndex>(i);
    if (tree.is_meta(idx) && parts[i].size() > 1) {
      std::set<std::string> taken;
      for (const TreeIndex c : tree[tree[idx].parent].children) taken.insert(tree[c].segment);
      name_parts(idx, taken);
    }
  }

  for (auto i = begin; i <= end; ++i) {
    const auto leaf = static_cast<TreeIndex>(i);
    if (!tree.is_leaf(leaf)) continue;
    const int p = part_of_leaf[i];
    std::vector<TreeIndex> chain;
    for (TreeIndex x = leaf; x != tree[g].parent; x = tree[x].parent) chain.push_back(x);
    std::reverse(chain.begin(), chain.end());
    std::vector<std::string> segs;
    for (const TreeIndex x : chain) segs.push_back(parts[static_cast<std::size_t>(x)].size() > 1 ? part_name[{x, p}] : tree[x].segment);
    rel[leaf] = std::move(segs);
  }
  std::vector<std::string> names;
  for (const int p : parts[begin]) names.push_back(part_name[{g, p}]);
  return names;
}

}  // namespace detail

/// One traversal-and-split pass over the top-level graph. Every metanode of
/// a cyclic component that the traversal re-enters after leaving it is cut
/// at each re-entry. Returns true when at least one metanode was split.
inline bool split_pass(ProcessedGraph& pg, CycleReport& report, std::size_t& cyclic_found) {
  const auto& tree = pg.tree;
  const auto top = top_level(tree);
  std::map<TreeIndex, int> top_slot;
  for (std::size_t k = 0; k < top.size(); ++k) top_slot[top[k]] = static_cast<int>(k);

  algo::Adjacency adj(top.size());
  for (const auto& e : induced_edges(tree, pg.leaf_edges, top))
    adj[static_cast<std::size_t>(top_slot[e.src])].push_back(top_slot[e.dst]);
  const auto cyclic = algo::cyclic_components(adj);
  cyclic_found = cyclic.size();
  if (cyclic.empty()) return false;

  std::vector<TreeIndex> top_of(tree.size(), -1);
  for (const TreeIndex t : top) {
    const auto end = static_cast<std::size_t>(t) + tree[t].descendant_count;
    for (auto i = static_cast<std::size_t>(t); i <= end; ++i) top_of[i] = t;
  }

  const auto order = detail::grouped_topological_order(pg, top_of);
  std::vector<std::size_t> visit(tree.size(), 0);
  std::map<TreeIndex, std::vector<std::size_t>> entries;  // times the traversal entered each top-level node
  std::map<TreeIndex, std::size_t> first_exit;
  std::set<TreeIndex> flagged;
  TreeIndex prev = -1;
  for (std::size_t t = 0; t < order.size(); ++t) {
    const TreeIndex leaf = order[t];
    visit[static_cast<std::size_t>(leaf)] = t;
    const TreeIndex cur = top_of[static_cast<std::size_t>(leaf)];
    if (cur != prev) {
      if (prev != -1) first_exit.try_emplace(prev, t);
      if (first_exit.contains(cur)) flagged.insert(cur);
      entries[cur].push_back(t);
    }
    prev = cur;
  }
  for (const auto& [data, targets] : pg.data_targets) visit[static_cast<std::size_t>(data)] = visit[static_cast<std::size_t>(targets.front())];

  // Part index of each leaf of g; false when g would not be split.
  auto parts_for = [&](TreeIndex g, bool by_runs, std::vector<int>& part) {
    std::set<int> seen;
    const auto end = static_cast<std::size_t>(g) + tree[g].descendant_count;
    for (auto i = static_cast<std::size_t>(g); i <= end; ++i) {
      if (!tree.is_leaf(static_cast<TreeIndex>(i))) continue;
      int p = 0;
      if (by_runs) {
        const auto& en = entries[g];
        p = static_cast<int>(std::upper_bound(en.begin(), en.end(), visit[i]) - en.begin()) - 1;
        p = std::max(p, 0);
      } else {
        const auto it = first_exit.find(g);
        p = it != first_exit.end() && visit[i] < it->second ? 0 : 1;
      }
      part[i] = p;
      seen.insert(p);
    }
    return seen.size() > 1;
  };

  std::vector<int> part(tree.size(), 0);
  std::vector<TreeIndex> chosen;
  for (const auto& comp : cyclic) {
    std::vector<TreeIndex> picked;
    TreeIndex fallback = -1;
    std::size_t fallback_visit = 0;
    for (const int slot : comp) {
      const TreeIndex g = top[static_cast<std::size_t>(slot)];
      if (!tree.is_meta(g)) continue;
      std::vector<int> probe(tree.size(), 0);
      if (flagged.contains(g) && parts_for(g, true, probe)) picked.push_back(g);
      const auto fv = entries.contains(g) ? entries[g].front() : 0;
      if (parts_for(g, false, probe) && (fallback == -1 || fv > fallback_visit)) {
        fallback = g;
        fallback_visit = fv;
      }
    }
    if (!picked.empty()) {
      for (const TreeIndex g : picked) parts_for(g, true, part);
    } else if (fallback != -1) {
      parts_for(fallback, false, part);
      picked.push_back(fallback);
    }
    chosen.insert(chosen.end(), picked.begin(), picked.end());
  }
  if (chosen.empty()) return false;
  std::sort(chosen.begin(), chosen.end());

  std::set<std::string> taken;
  for (const TreeIndex t : top) taken.insert(tree[t].segment);
  std::map<TreeIndex, std::vector<std::string>> rel;
  for (const TreeIndex g : chosen) {
    CycleSplit split;
    split.original = tree[g].path;
    split.parts = detail::split_segments(tree, g, part, taken, rel);
    std::map<int, std::size_t> slot_of;
    const auto end = static_cast<std::size_t>(g) + tree[g].descendant_count;
    for (auto i = static_cast<std::size_t>(g); i <= end; ++i)
      if (tree.is_leaf(static_cast<TreeIndex>(i))) slot_of.try_emplace(part[i], 0);
    std::size_t k = 0;
    for (auto& [p, s] : slot_of) s = k++;
    split.members.resize(slot_of.size());
    for (auto i = static_cast<std::size_t>(g); i <= end; ++i) {
      if (!tree.is_leaf(static_cast<TreeIndex>(i))) continue;
      split.members[slot_of[part[i]]].push_back(tree[static_cast<TreeIndex>(i)].raw_name);
    }
    report.splits.push_back(std::move(split));
  }

  std::vector<LeafSpec> specs;
  for (const TreeIndex leaf : tree.leaves()) {
    const auto& n = tree[leaf];
    auto it = rel.find(leaf);
    specs.push_back(LeafSpec{it != rel.end() ? it->second : split_path(n.path), n.kind, n.op_type, n.attrs, n.raw_name});
  }
  const auto edges = pg.raw_edges();
  pg = assemble(pg.name, specs, edges);
  return true;
}

/// Number of passes the splitter runs at most; iterating further multiplies
/// metanodes without bound.
inline constexpr int kSplitPassCap = 2;

inline std::pair<ProcessedGraph, CycleReport> detect_and_split_cycles(const ProcessedGraph& input, int pass_cap = kSplitPassCap) {
  ProcessedGraph pg = input;
  CycleReport report;
  std::size_t cyclic = 0;
  for (int pass = 0; pass < pass_cap; ++pass) {
    const bool split = split_pass(pg, report, cyclic);
    if (pass == 0) report.cycles_found = cyclic;
    if (cyclic == 0) break;
    report.passes = pass + 1;
    if (!split) break;
  }
  if (report.passes == pass_cap || cyclic != 0) {
    // count what is left after the last pass
    const auto top = top_level(pg.tree);
    std::map<TreeIndex, int> slot;
    for (std::size_t k = 0; k < top.size(); ++k) slot[top[k]] = static_cast<int>(k);
    algo::Adjacency adj(top.size());
    for (const auto& e : induced_edges(pg.tree, pg.leaf_edges, top))
      adj[static_cast<std::size_t>(slot[e.src])].push_back(slot[e.dst]);
    report.residual_cycles = algo::cyclic_components(adj).size();
    report.cap_exceeded = report.residual_cycles != 0;
  }
  return {std::move(pg), std::move(report)};
}

namespace detail {

inline bool contains_ci(std::string_view hay, std::string_view needle) {
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  });
  return it != hay.end();
}

enum : unsigned { kConv = 1, kRnn = 2, kFc = 4 };

inline unsigned op_flags(std::string_view op_type) {
  unsigned f = 0;
  if (contains_ci(op_type, "Conv")) f |= kConv;
  if (contains_ci(op_type, "LSTM") || contains_ci(op_type, "GRU") || contains_ci(op_type, "RNN")) f |= kRnn;
  if (contains_ci(op_type, "MatMul") || contains_ci(op_type, "Dense") || contains_ci(op_type, "Gemm")) f |= kFc;
  return f;
}

}  // namespace detail

/// Layer type of every metanode from the op types below it: any Conv op
/// makes a CNNLayer, else any LSTM/GRU/RNN op an RNNLayer, else any
/// MatMul/Dense/Gemm op an FCLayer; everything else is a NormalLayer.
inline std::map<TreeIndex, LayerClass> classify_layers(const ProcessedGraph& pg) {
  const auto& tree = pg.tree;
  std::vector<unsigned> flags(tree.size(), 0);
  for (std::size_t i = tree.size(); i-- > 1;) {
    const auto idx = static_cast<TreeIndex>(i);
    if (tree[idx].kind == NodeKind::Operation) flags[i] = detail::op_flags(tree[idx].op_type);
    flags[static_cast<std::size_t>(tree[idx].parent)] |= flags[i];
  }
  std::map<TreeIndex, LayerClass> out;
  for (const TreeIndex m : tree.metanodes()) {
    const unsigned f = flags[static_cast<std::size_t>(m)];
    out[m] = (f & detail::kConv) != 0  ? LayerClass::CNNLayer
             : (f & detail::kRnn) != 0 ? LayerClass::RNNLayer
             : (f & detail::kFc) != 0  ? LayerClass::FCLayer
                                       : LayerClass::NormalLayer;
  }
  return out;
}

struct ConceptGraph {
  ProcessedGraph graph;
  CycleReport report;
  std::map<TreeIndex, LayerClass> layer_class;
};

inline ConceptGraph build_concept_graph(const ProcessedGraph& pg) {
  auto [graph, report] = detect_and_split_cycles(pg);
  ConceptGraph cg{std::move(graph), std::move(report), {}};
  cg.layer_class = classify_layers(cg.graph);
  return cg;
}

}  // namespace cgs
