#pragma once

// Visible graph derivation and exploration sessions.
//
// Pipeline: (concept graph transform) -> frontier of the expansion state ->
// edge pruning -> isomorphic stacking per expanded scope -> stats.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cgs/concept_graph.hpp"
#include "cgs/edge_pruning.hpp"
#include "cgs/error.hpp"
#include "cgs/graph_model.hpp"
#include "cgs/iso_stacking.hpp"

namespace cgs {

struct SessionOptions {
  bool cgm = false;
  bool stacking = true;
  long long module_threshold = kDefaultModuleThreshold;
  int min_repeat = kDefaultMinRepeat;

  void validate() const {
    if (module_threshold < 1) throw Error(Errc::InvalidOption, "module_threshold must be >= 1");
    if (min_repeat < 2) throw Error(Errc::InvalidOption, "min_repeat must be >= 2");
  }
};

struct VisibleNode {
  TreeIndex id = -1;
  TreeIndex parent = -1;
  bool expanded = false;
  std::optional<LayerClass> layer;
  std::optional<std::size_t> pile;
  bool removed = false;  // stacked away into a pile
};

struct Pile {
  std::size_t id = 0;
  TreeIndex scope = kRoot;
  int category = 1;
  Fingerprint fingerprint;
  std::vector<std::vector<TreeIndex>> members;       // scope-level nodes of each member
  std::vector<std::vector<TreeIndex>> member_nodes;  // every visible node of each member
  std::vector<std::size_t> member_edge_counts;       // visible edges touching each member
  std::vector<std::size_t> removed_edges;

  std::size_t repeat() const { return members.size(); }
};

struct VisibleStats {
  std::size_t node_count = 0;  // non-container visible nodes
  std::size_t edge_count = 0;  // visible, non-hidden edges
};

struct VisibleGraph {
  std::shared_ptr<const ProcessedGraph> graph;
  std::vector<TreeIndex> frontier;
  std::vector<VisibleNode> nodes;  // preorder; expanded containers and frontier nodes
  std::map<TreeIndex, std::size_t> node_index;
  PrunedEdges pruned;
  std::vector<bool> edge_removed;
  std::vector<bool> port_removed;
  std::vector<Pile> piles;
  std::map<TreeIndex, std::size_t> pile_of;  // any member node -> pile id
  VisibleStats stats;

  const HierarchyTree& tree() const { return graph->tree; }
  const std::vector<VisibleEdge>& edges() const { return pruned.edges; }
  const std::vector<Port>& ports() const { return pruned.ports; }

  const VisibleNode* node(TreeIndex i) const {
    const auto it = node_index.find(i);
    return it == node_index.end() ? nullptr : &nodes[it->second];
  }
  bool is_live(TreeIndex i) const {
    const auto* n = node(i);
    return n != nullptr && !n->removed;
  }
};

/// Expanded metanodes as tree indices; validates closure under ancestors.
inline std::set<TreeIndex> resolve_expansion(const HierarchyTree& tree, const std::set<std::string>& expanded) {
  std::set<TreeIndex> out{kRoot};
  for (const auto& path : expanded) {
    const auto idx = tree.find(path);
    if (!idx) throw Error(Errc::UnknownNode, path);
    if (!tree.is_meta(*idx)) throw Error(Errc::NotAMetaNode, path);
    out.insert(*idx);
  }
  for (const TreeIndex i : out)
    if (i != kRoot && !out.contains(tree[i].parent)) throw Error(Errc::NotExpandable, tree[i].path);
  return out;
}

struct FrontierInfo {
  std::vector<TreeIndex> frontier;    // antichain covering every leaf
  std::vector<TreeIndex> containers;  // expanded metanodes except the root, preorder
};

inline FrontierInfo compute_frontier(const HierarchyTree& tree, const std::set<TreeIndex>& expanded) {
  FrontierInfo info;
  std::vector<TreeIndex> stack{kRoot};
  while (!stack.empty()) {
    const TreeIndex v = stack.back();
    stack.pop_back();
    const auto& children = tree[v].children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      if (tree.is_meta(*it) && expanded.contains(*it)) {
        stack.push_back(*it);
      }
    }
    if (v != kRoot) info.containers.push_back(v);
    for (const TreeIndex c : children)
      if (!(tree.is_meta(c) && expanded.contains(c))) info.frontier.push_back(c);
  }
  std::sort(info.frontier.begin(), info.frontier.end());
  return info;
}

namespace detail {

inline int auxiliary_count(const ProcessedGraph& pg, TreeIndex op) {
  const auto it = pg.attachment.find(op);
  if (it == pg.attachment.end()) return 0;
  return static_cast<int>(it->second.constants.size() + it->second.parameters.size());
}

// Edge ids grouped for stacking: by the scope whose children they connect,
// and by every visible node they touch.
struct EdgeBuckets {
  std::map<TreeIndex, std::vector<std::size_t>> by_scope;
  std::map<TreeIndex, std::vector<std::size_t>> incident;
};

inline EdgeBuckets bucket_edges(const VisibleGraph& vg) {
  EdgeBuckets b;
  const auto& tree = vg.tree();
  for (std::size_t e = 0; e < vg.edges().size(); ++e) {
    const auto& ve = vg.edges()[e];
    b.incident[ve.src.node].push_back(e);
    if (ve.dst.node != ve.src.node) b.incident[ve.dst.node].push_back(e);
    const TreeIndex l = tree.lca(ve.src.node, ve.dst.node);
    if (l != ve.src.node && l != ve.dst.node) b.by_scope[l].push_back(e);
  }
  return b;
}

// Summary of an expanded child's visible contents, so that stacked expanded
// members also agree on what is drawn inside them.
inline std::string expanded_signature(const VisibleGraph& vg, TreeIndex container, const EdgeBuckets& buckets) {
  const auto& tree = vg.tree();
  const TreeIndex last = container + static_cast<TreeIndex>(tree[container].descendant_count);
  std::vector<std::string> types;
  std::size_t inner_edges = 0;
  for (TreeIndex v = container; v <= last; ++v) {
    // count each inner edge once, at its source
    if (const auto it = buckets.incident.find(v); it != buckets.incident.end())
      for (const std::size_t e : it->second) {
        const auto& ve = vg.edges()[e];
        if (!vg.edge_removed[e] && ve.src.node == v && ve.dst.node >= container && ve.dst.node <= last) ++inner_edges;
      }
    const auto* n = vg.node(v);
    if (v == container || n == nullptr || n->removed) continue;
    types.push_back(std::to_string(tree[v].depth - tree[container].depth) + ":" + type_string(tree[v]) + (n->expanded ? "+" : ""));
  }
  std::sort(types.begin(), types.end());
  std::string sig = "E" + std::to_string(inner_edges);
  for (const auto& t : types) sig += "|" + t;
  return sig;
}

inline void stack_scope(VisibleGraph& vg, TreeIndex scope, int min_repeat, const EdgeBuckets& buckets) {
  const auto& tree = vg.tree();
  const auto& pg = *vg.graph;

  std::vector<TreeIndex> children;
  std::map<TreeIndex, int> slot;
  for (const TreeIndex c : tree[scope].children) {
    if (!vg.is_live(c)) continue;
    slot[c] = static_cast<int>(children.size());
    children.push_back(c);
  }
  if (children.size() < 2) return;

  ScopeGraph sg;
  sg.parent = tree[scope].path;
  for (const TreeIndex c : children) {
    const auto* vn = vg.node(c);
    sg.nodes.push_back(ScopeNode{type_string(tree[c]), auxiliary_count(pg, c), vn->expanded ? expanded_signature(vg, c, buckets) : ""});
  }
  std::set<std::pair<int, int>> edge_set;
  const auto scoped = buckets.by_scope.find(scope);
  for (const std::size_t e : scoped == buckets.by_scope.end() ? std::vector<std::size_t>{} : scoped->second) {
    const auto& ve = vg.edges()[e];
    if (ve.hidden || vg.edge_removed[e]) continue;
    const auto a = tree.child_toward(scope, ve.src.node);
    const auto b = tree.child_toward(scope, ve.dst.node);
    if (!a || !b || *a == *b) continue;
    const auto sa = slot.find(*a), sb = slot.find(*b);
    if (sa == slot.end() || sb == slot.end()) continue;
    edge_set.insert({sa->second, sb->second});
  }
  sg.edges.assign(edge_set.begin(), edge_set.end());

  for (const auto& group : detect_iso_groups(sg)) {
    if (static_cast<int>(group.members.size()) < min_repeat) continue;
    Pile pile;
    pile.id = vg.piles.size();
    pile.scope = scope;
    pile.category = group.category;
    pile.fingerprint = group.fingerprint;
    for (const auto& m : group.members) {
      std::vector<TreeIndex> top, all;
      for (const int s : m) top.push_back(children[static_cast<std::size_t>(s)]);
      for (const TreeIndex t : top)
        for (TreeIndex v = t; v <= t + static_cast<TreeIndex>(tree[t].descendant_count); ++v)
          if (const auto* n = vg.node(v); n != nullptr && !n->removed) all.push_back(v);
      std::sort(all.begin(), all.end());
      pile.members.push_back(std::move(top));
      pile.member_nodes.push_back(std::move(all));
    }
    for (std::size_t k = 0; k < pile.members.size(); ++k) {
      std::set<TreeIndex> nodes(pile.member_nodes[k].begin(), pile.member_nodes[k].end());
      std::set<std::size_t> touched;
      for (const TreeIndex v : nodes)
        if (const auto it = buckets.incident.find(v); it != buckets.incident.end()) touched.insert(it->second.begin(), it->second.end());
      std::size_t touching = 0;
      for (const std::size_t e : touched) {
        if (vg.edge_removed[e]) continue;
        ++touching;
        if (k > 0) {
          vg.edge_removed[e] = true;
          pile.removed_edges.push_back(e);
        }
      }
      pile.member_edge_counts.push_back(touching);
      for (const TreeIndex v : nodes) {
        vg.pile_of[v] = pile.id;
        if (k == 0) {
          vg.nodes[vg.node_index.at(v)].pile = pile.id;
        } else {
          vg.nodes[vg.node_index.at(v)].removed = true;
        }
      }
    }
    for (std::size_t p = 0; p < vg.ports().size(); ++p)
      if (!vg.is_live(vg.ports()[p].owner)) vg.port_removed[p] = true;
    vg.piles.push_back(std::move(pile));
  }
}

}  // namespace detail

/// Derives the visible graph of `pg` for an expansion state. `layers` is
/// set in concept graph mode.
inline VisibleGraph derive_visible(std::shared_ptr<const ProcessedGraph> pg, const std::set<std::string>& expanded,
                                   const SessionOptions& options,
                                   const std::map<TreeIndex, LayerClass>* layers = nullptr) {
  options.validate();
  VisibleGraph vg;
  vg.graph = std::move(pg);
  const auto& tree = vg.graph->tree;
  const auto expansion = resolve_expansion(tree, expanded);
  const auto info = compute_frontier(tree, expansion);
  vg.frontier = info.frontier;

  std::vector<TreeIndex> visible = info.containers;
  for (const TreeIndex f : info.frontier)
    if (!vg.graph->is_attached(f)) visible.push_back(f);
  std::sort(visible.begin(), visible.end());
  for (const TreeIndex v : visible) {
    VisibleNode n;
    n.id = v;
    n.parent = tree[v].parent;
    n.expanded = expansion.contains(v);
    if (layers != nullptr && tree.is_meta(v)) {
      if (const auto it = layers->find(v); it != layers->end()) n.layer = it->second;
    }
    vg.node_index[v] = vg.nodes.size();
    vg.nodes.push_back(n);
  }

  const auto modules = recognize_modules(tree, options.module_threshold);
  vg.pruned = prune_edges(*vg.graph, info.frontier, modules);
  vg.edge_removed.assign(vg.pruned.edges.size(), false);
  vg.port_removed.assign(vg.pruned.ports.size(), false);

  if (options.stacking) {
    std::vector<TreeIndex> scopes{kRoot};
    scopes.insert(scopes.end(), info.containers.begin(), info.containers.end());
    const auto buckets = detail::bucket_edges(vg);
    for (const TreeIndex scope : scopes) {
      if (scope != kRoot && !vg.is_live(scope)) continue;
      detail::stack_scope(vg, scope, options.min_repeat, buckets);
    }
  }

  for (const auto& n : vg.nodes)
    if (!n.removed && !n.expanded) ++vg.stats.node_count;
  for (std::size_t e = 0; e < vg.pruned.edges.size(); ++e)
    if (!vg.edge_removed[e] && !vg.pruned.edges[e].hidden) ++vg.stats.edge_count;
  return vg;
}

/// Expansion set holding every metanode shallower than `depth`, i.e. the
/// nodes of hierarchy level `depth` become visible.
inline std::set<std::string> expansion_to_depth(const HierarchyTree& tree, int depth) {
  std::set<std::string> out;
  for (const TreeIndex m : tree.metanodes())
    if (tree[m].depth < depth) out.insert(tree[m].path);
  return out;
}

/// Ungroups `meta`: its children move into its parent. Child names that
/// collide with the parent's other children get a numeric suffix.
inline ProcessedGraph ungroup_graph(const ProcessedGraph& pg, TreeIndex meta, std::map<std::string, std::string>* renamed = nullptr) {
  const auto& tree = pg.tree;
  if (meta == kRoot || !tree.is_meta(meta)) throw Error(Errc::NotAMetaNode, tree[meta].path);
  const TreeIndex parent = tree[meta].parent;
  std::set<std::string> taken;
  for (const TreeIndex c : tree[parent].children)
    if (c != meta) taken.insert(tree[c].segment);
  std::map<TreeIndex, std::string> new_segment;
  for (const TreeIndex c : tree[meta].children) new_segment[c] = detail::unique_name(tree[c].segment, taken);

  std::vector<LeafSpec> specs;
  const std::size_t cut = static_cast<std::size_t>(tree[meta].depth) - 1;
  for (const TreeIndex leaf : tree.leaves()) {
    const auto& n = tree[leaf];
    auto segs = split_path(n.path);
    if (tree.contains(meta, leaf)) {
      const TreeIndex child = *tree.child_toward(meta, leaf);
      segs[cut + 1] = new_segment[child];
      segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(cut));
    }
    specs.push_back(LeafSpec{std::move(segs), n.kind, n.op_type, n.attrs, n.raw_name});
  }
  if (renamed != nullptr) {
    const std::string prefix = tree[parent].path.empty() ? "" : tree[parent].path + "/";
    for (const auto& [c, seg] : new_segment) (*renamed)[tree[c].path] = prefix + seg;
  }
  const auto edges = pg.raw_edges();
  return assemble(pg.name, specs, edges);
}

struct FoundPath {
  std::vector<std::string> nodes;                  // visible node paths
  std::vector<std::vector<std::size_t>> hop_edges;  // visible edge ids realizing each hop
};

inline constexpr std::size_t kMaxPaths = 10;

/// Directed paths from `start` to `end`. Existence is decided on leaf edges;
/// paths are reported on the visible frontier, shortest first.
inline std::vector<FoundPath> find_path(const VisibleGraph& vg, std::string_view start, std::string_view end) {
  const auto& pg = *vg.graph;
  const auto& tree = pg.tree;
  const TreeIndex s = tree.at(start);
  const TreeIndex t = tree.at(end);

  // visible representative of a leaf
  auto vis = [&](TreeIndex leaf) -> TreeIndex {
    if (pg.is_attached(leaf)) leaf = pg.data_targets.at(leaf).front();
    TreeIndex r = vg.pruned.rep[static_cast<std::size_t>(leaf)];
    if (vg.is_live(r)) return r;
    const auto pit = vg.pile_of.find(r);
    if (pit == vg.pile_of.end()) return r;
    const auto& pile = vg.piles[pit->second];
    for (std::size_t k = 0; k < pile.member_nodes.size(); ++k) {
      const auto& mn = pile.member_nodes[k];
      const auto pos = std::find(mn.begin(), mn.end(), r);
      if (pos != mn.end() && pos - mn.begin() < static_cast<std::ptrdiff_t>(pile.member_nodes[0].size()))
        return pile.member_nodes[0][static_cast<std::size_t>(pos - mn.begin())];
    }
    return r;
  };
  auto display = [&](TreeIndex i) {
    // a start/end given as an expanded container is shown as itself
    return tree[i].path;
  };

  if (s == t) return {FoundPath{{display(s)}, {}}};

  std::vector<std::vector<TreeIndex>> out(tree.size()), in(tree.size());
  auto add = [&](const LeafEdge& e) {
    out[static_cast<std::size_t>(e.src)].push_back(e.dst);
    in[static_cast<std::size_t>(e.dst)].push_back(e.src);
  };
  for (const auto& e : pg.leaf_edges) add(e);
  for (const auto& e : pg.data_edges) add(e);

  auto bfs = [&](TreeIndex root, const std::vector<std::vector<TreeIndex>>& next) {
    std::vector<bool> seen(tree.size(), false);
    std::deque<TreeIndex> q;
    const auto last = static_cast<std::size_t>(root) + tree[root].descendant_count;
    for (auto i = static_cast<std::size_t>(root); i <= last; ++i)
      if (tree.is_leaf(static_cast<TreeIndex>(i))) {
        seen[i] = true;
        q.push_back(static_cast<TreeIndex>(i));
      }
    while (!q.empty()) {
      const TreeIndex v = q.front();
      q.pop_front();
      for (const TreeIndex w : next[static_cast<std::size_t>(v)])
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          q.push_back(w);
        }
    }
    return seen;
  };
  const auto fwd = bfs(s, out);
  const auto bwd = bfs(t, in);

  // Leaf edges lying on some start->end path, lifted to visible nodes.
  std::map<TreeIndex, std::map<TreeIndex, std::set<std::size_t>>> lifted;
  std::set<TreeIndex> starts, ends;
  bool any = false;
  for (std::size_t i = 1; i < tree.size(); ++i) {
    if (!tree.is_leaf(static_cast<TreeIndex>(i)) || !fwd[i] || !bwd[i]) continue;
    any = true;
    if (tree.contains(s, static_cast<TreeIndex>(i))) starts.insert(vis(static_cast<TreeIndex>(i)));
    if (tree.contains(t, static_cast<TreeIndex>(i))) ends.insert(vis(static_cast<TreeIndex>(i)));
  }
  if (!any) return {};
  auto on_path = [&](TreeIndex v) { return fwd[static_cast<std::size_t>(v)] && bwd[static_cast<std::size_t>(v)]; };
  for (const auto& e : pg.leaf_edges) {
    if (!on_path(e.src) || !on_path(e.dst)) continue;
    const TreeIndex a = vis(e.src), b = vis(e.dst);
    if (a == b) continue;
    auto& hop = lifted[a][b];
    if (const auto it = vg.pruned.chains.find(e); it != vg.pruned.chains.end())
      for (const auto id : it->second) hop.insert(id);
  }

  // Breadth-first enumeration of simple paths, shortest first.
  std::vector<FoundPath> found;
  std::deque<std::vector<TreeIndex>> queue;
  for (const TreeIndex v : starts) queue.push_back({v});
  std::size_t budget = 50000;
  while (!queue.empty() && found.size() < kMaxPaths && budget-- > 0) {
    auto path = std::move(queue.front());
    queue.pop_front();
    const TreeIndex v = path.back();
    if (ends.contains(v)) {
      FoundPath fp;
      for (const TreeIndex x : path) fp.nodes.push_back(tree[x].path);
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const auto& ids = lifted[path[k]][path[k + 1]];
        fp.hop_edges.emplace_back(ids.begin(), ids.end());
      }
      found.push_back(std::move(fp));
      continue;
    }
    const auto it = lifted.find(v);
    if (it == lifted.end()) continue;
    for (const auto& [w, _] : it->second) {
      if (std::find(path.begin(), path.end(), w) != path.end()) continue;
      auto next = path;
      next.push_back(w);
      queue.push_back(std::move(next));
    }
  }
  return found;
}

struct NodeProfile {
  std::string path;
  NodeKind kind = NodeKind::Meta;
  std::string op_type;
  std::optional<LayerClass> layer;
  Attrs attrs;
  std::size_t in_degree = 0;
  std::size_t out_degree = 0;
  std::string parent;
  bool visible = false;
  std::vector<std::size_t> ports;
};

inline constexpr std::size_t kMinQueryLength = 2;

/// Case-insensitive substring search over node paths, in tree order.
inline std::vector<NodeProfile> search(const VisibleGraph& vg, std::string_view query,
                                       const std::map<TreeIndex, LayerClass>* layers = nullptr) {
  if (query.size() < kMinQueryLength) return {};
  const auto& pg = *vg.graph;
  const auto& tree = pg.tree;
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  const std::string q = lower(query);
  std::vector<NodeProfile> out;
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const auto idx = static_cast<TreeIndex>(i);
    const auto& n = tree[idx];
    if (lower(n.path).find(q) == std::string::npos) continue;
    NodeProfile p;
    p.path = n.path;
    p.kind = n.kind;
    p.op_type = n.op_type;
    p.attrs = n.attrs;
    p.parent = tree[n.parent].path;
    p.visible = vg.is_live(idx);
    if (layers != nullptr)
      if (const auto it = layers->find(idx); it != layers->end()) p.layer = it->second;
    auto count = [&](const std::vector<LeafEdge>& edges) {
      for (const auto& e : edges) {
        const bool s_in = tree.contains(idx, e.src), d_in = tree.contains(idx, e.dst);
        if (s_in && !d_in) ++p.out_degree;
        if (d_in && !s_in) ++p.in_degree;
      }
    };
    count(pg.leaf_edges);
    count(pg.data_edges);
    for (std::size_t k = 0; k < vg.ports().size(); ++k)
      if (!vg.port_removed[k] && vg.ports()[k].owner == idx) p.ports.push_back(k);
    out.push_back(std::move(p));
  }
  return out;
}

struct StatsRow {
  int depth = 0;
  std::size_t raw_nodes = 0;
  std::size_t raw_edges = 0;
  std::size_t vis_nodes = 0;
  std::size_t vis_edges = 0;

  double reduction_pct() const {
    const double raw = static_cast<double>(raw_nodes + raw_edges);
    if (raw == 0) return 0.0;
    return 100.0 * (1.0 - static_cast<double>(vis_nodes + vis_edges) / raw);
  }
};

/// Unsimplified counts for an expansion: every frontier node (data nodes
/// included) and every distinct lifted (src, dst) pair.
inline std::pair<std::size_t, std::size_t> raw_counts(const ProcessedGraph& pg, const std::set<std::string>& expanded) {
  const auto info = compute_frontier(pg.tree, resolve_expansion(pg.tree, expanded));
  const auto rep = frontier_map(pg.tree, info.frontier);
  std::set<std::pair<TreeIndex, TreeIndex>> pairs;
  for (const auto* edges : {&pg.leaf_edges, &pg.data_edges})
    for (const auto& e : *edges) {
      const TreeIndex a = rep[static_cast<std::size_t>(e.src)], b = rep[static_cast<std::size_t>(e.dst)];
      if (a != b) pairs.insert({a, b});
    }
  return {info.frontier.size(), pairs.size()};
}

inline std::vector<StatsRow> stats_by_depth(std::shared_ptr<const ProcessedGraph> pg, const SessionOptions& options, int max_depth,
                                            const std::map<TreeIndex, LayerClass>* layers = nullptr) {
  if (max_depth < 1) throw Error(Errc::InvalidOption, "max_depth must be >= 1");
  std::vector<StatsRow> rows;
  for (int d = 1; d <= max_depth; ++d) {
    const auto expanded = expansion_to_depth(pg->tree, d);
    StatsRow row;
    row.depth = d;
    std::tie(row.raw_nodes, row.raw_edges) = raw_counts(*pg, expanded);
    const auto vg = derive_visible(pg, expanded, options, layers);
    row.vis_nodes = vg.stats.node_count;
    row.vis_edges = vg.stats.edge_count;
    rows.push_back(row);
  }
  return rows;
}

/// One loaded graph with its expansion state. Mutations are serialized;
/// derived visible graphs are cached until the next mutation.
class Session {
 public:
  Session(std::shared_ptr<const ProcessedGraph> base, SessionOptions options) : options_(options) {
    options_.validate();
    if (options_.cgm) {
      auto cg = build_concept_graph(*base);
      report_ = cg.report;
      current_ = std::make_shared<const ProcessedGraph>(std::move(cg.graph));
      layers_ = classify_layers(*current_);
    } else {
      current_ = std::move(base);
    }
  }

  const SessionOptions& options() const { return options_; }
  const std::optional<CycleReport>& cycle_report() const { return report_; }

  std::shared_ptr<const ProcessedGraph> graph() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  std::uint64_t revision() const {
    std::lock_guard lock(mu_);
    return revision_;
  }

  std::set<std::string> expanded() const {
    std::lock_guard lock(mu_);
    return expanded_;
  }

  const std::map<TreeIndex, LayerClass>* layers() const { return options_.cgm ? &layers_ : nullptr; }

  void expand(std::string_view path) {
    std::lock_guard lock(mu_);
    const auto& tree = current_->tree;
    const TreeIndex i = require_meta(tree, path);
    if (tree[i].parent != kRoot && !expanded_.contains(tree[tree[i].parent].path))
      throw Error(Errc::NotExpandable, std::string(path));
    expanded_.insert(tree[i].path);
    bump();
  }

  void collapse(std::string_view path) {
    std::lock_guard lock(mu_);
    const auto& tree = current_->tree;
    const TreeIndex i = require_meta(tree, path);
    std::erase_if(expanded_, [&](const std::string& p) {
      const auto j = tree.find(p);
      return j && tree.contains(i, *j);
    });
    bump();
  }

  void ungroup(std::string_view path) {
    std::lock_guard lock(mu_);
    const auto& tree = current_->tree;
    const TreeIndex i = require_meta(tree, path);
    if (tree[i].parent != kRoot && !expanded_.contains(tree[tree[i].parent].path))
      throw Error(Errc::NotExpandable, std::string(path));
    history_.push_back({current_, expanded_});
    std::map<std::string, std::string> renamed;
    auto next = std::make_shared<const ProcessedGraph>(ungroup_graph(*current_, i, &renamed));
    const std::string prefix = tree[i].path + "/";
    std::set<std::string> remapped;
    for (const auto& p : expanded_) {
      if (p == tree[i].path) continue;
      if (p.starts_with(prefix)) {
        const auto child_end = p.find('/', prefix.size());
        const std::string child = p.substr(0, child_end);
        remapped.insert(renamed.at(child) + (child_end == std::string::npos ? "" : p.substr(child_end)));
      } else {
        remapped.insert(p);
      }
    }
    current_ = std::move(next);
    expanded_ = std::move(remapped);
    if (options_.cgm) layers_ = classify_layers(*current_);
    bump();
  }

  /// Reverts the most recent ungroup; returns false when there is none.
  bool undo_ungroup() {
    std::lock_guard lock(mu_);
    if (history_.empty()) return false;
    current_ = history_.back().graph;
    expanded_ = history_.back().expanded;
    history_.pop_back();
    if (options_.cgm) layers_ = classify_layers(*current_);
    bump();
    return true;
  }

  void expand_to_depth(int depth) {
    std::lock_guard lock(mu_);
    expanded_ = expansion_to_depth(current_->tree, depth);
    bump();
  }

  void set_expanded(std::set<std::string> expanded) {
    std::lock_guard lock(mu_);
    (void)resolve_expansion(current_->tree, expanded);
    expanded_ = std::move(expanded);
    bump();
  }

  std::shared_ptr<const VisibleGraph> visible() const {
    std::lock_guard lock(mu_);
    if (!cache_) cache_ = std::make_shared<const VisibleGraph>(derive_visible(current_, expanded_, options_, options_.cgm ? &layers_ : nullptr));
    return cache_;
  }

 private:
  struct Snapshot {
    std::shared_ptr<const ProcessedGraph> graph;
    std::set<std::string> expanded;
  };

  static TreeIndex require_meta(const HierarchyTree& tree, std::string_view path) {
    const auto i = tree.find(path);
    if (!i || *i == kRoot) throw Error(Errc::UnknownNode, std::string(path));
    if (!tree.is_meta(*i)) throw Error(Errc::NotAMetaNode, std::string(path));
    return *i;
  }

  void bump() {
    ++revision_;
    cache_.reset();
  }

  SessionOptions options_;
  std::shared_ptr<const ProcessedGraph> current_;
  std::optional<CycleReport> report_;
  std::map<TreeIndex, LayerClass> layers_;
  std::set<std::string> expanded_;
  std::vector<Snapshot> history_;
  std::uint64_t revision_ = 0;
  mutable std::shared_ptr<const VisibleGraph> cache_;
  mutable std::mutex mu_;
};

}  // namespace cgs
