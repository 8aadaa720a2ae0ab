#pragma once

// Raw, hierarchical and processed graph types.
//
// A RawGraph is a flat set of leaf nodes named by slash-delimited scopes
// ("Main/network_train/softmax/Softmax-op42") and the edges between them.
// build_hierarchy groups leaves by scope prefix into a HierarchyTree whose
// internal nodes are metanodes, and converts DataNode edges into attachments.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgs/error.hpp"

namespace cgs {

enum class NodeKind { Operation, Constant, Parameter, Meta };

constexpr std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Operation: return "operation";
    case NodeKind::Constant: return "constant";
    case NodeKind::Parameter: return "parameter";
    case NodeKind::Meta: return "meta";
  }
  return "meta";
}

constexpr bool is_data(NodeKind k) { return k == NodeKind::Constant || k == NodeKind::Parameter; }

using Attrs = std::map<std::string, std::string>;

struct RawNode {
  std::string name;
  NodeKind kind = NodeKind::Operation;
  std::string op_type;
  Attrs attrs;

  friend bool operator==(const RawNode&, const RawNode&) = default;
};

struct RawEdge {
  std::string src;
  std::string dst;

  friend bool operator==(const RawEdge&, const RawEdge&) = default;
  friend auto operator<=>(const RawEdge&, const RawEdge&) = default;
};

struct RawGraph {
  std::string name;
  std::vector<RawNode> nodes;
  std::vector<RawEdge> edges;

  friend bool operator==(const RawGraph&, const RawGraph&) = default;
};

/// Index into HierarchyTree::nodes. Trees are stored in preorder, so the
/// subtree of node i is the contiguous range [i, i + descendant_count].
using TreeIndex = int;
inline constexpr TreeIndex kRoot = 0;

struct TreeNode {
  std::string segment;
  std::string path;  // empty for the root
  TreeIndex parent = -1;
  std::vector<TreeIndex> children;
  int depth = 0;
  std::size_t descendant_count = 0;
  NodeKind kind = NodeKind::Meta;
  std::string op_type;
  Attrs attrs;
  std::string raw_name;  // leaves only; stays fixed when the tree is reshaped
};

// Numeric-prefix aware ordering: "2_Features" < "10_Features", "op9" < "op10".
inline int natural_compare(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      std::string_view na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size() ? -1 : 1;
      if (const int c = na.compare(nb); c != 0) return c < 0 ? -1 : 1;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]) ? -1 : 1;
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return (a.size() - i) < (b.size() - j) ? -1 : 1;
  const int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

struct NaturalLess {
  bool operator()(std::string_view a, std::string_view b) const { return natural_compare(a, b) < 0; }
};

inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = path.find('/', start);
    out.emplace_back(path.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string join_path(std::span<const std::string> segments) {
  std::string out;
  for (const auto& s : segments) {
    if (!out.empty()) out += '/';
    out += s;
  }
  return out;
}

class HierarchyTree {
 public:
  HierarchyTree() { nodes_.push_back(TreeNode{}); }

  const TreeNode& operator[](TreeIndex i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return nodes_.size(); }
  std::span<const TreeNode> nodes() const { return nodes_; }

  std::optional<TreeIndex> find(std::string_view path) const {
    if (path.empty() || path == "/") return kRoot;
    const auto it = by_path_.find(std::string(path));
    if (it == by_path_.end()) return std::nullopt;
    return it->second;
  }

  TreeIndex at(std::string_view path) const {
    if (auto i = find(path)) return *i;
    throw Error(Errc::UnknownNode, std::string(path));
  }

  std::optional<TreeIndex> find_raw(std::string_view raw_name) const {
    const auto it = by_raw_.find(std::string(raw_name));
    if (it == by_raw_.end()) return std::nullopt;
    return it->second;
  }

  bool is_meta(TreeIndex i) const { return (*this)[i].kind == NodeKind::Meta; }
  bool is_leaf(TreeIndex i) const { return !is_meta(i); }

  /// True when `anc` is `node` or one of its ancestors.
  bool contains(TreeIndex anc, TreeIndex node) const {
    return node >= anc && static_cast<std::size_t>(node) <= static_cast<std::size_t>(anc) + (*this)[anc].descendant_count;
  }

  /// Ancestor of `node` (or `node` itself) whose parent is `scope`.
  std::optional<TreeIndex> child_toward(TreeIndex scope, TreeIndex node) const {
    if (node == scope || !contains(scope, node)) return std::nullopt;
    while ((*this)[node].parent != scope) node = (*this)[node].parent;
    return node;
  }

  TreeIndex lca(TreeIndex a, TreeIndex b) const {
    while ((*this)[a].depth > (*this)[b].depth) a = (*this)[a].parent;
    while ((*this)[b].depth > (*this)[a].depth) b = (*this)[b].parent;
    while (a != b) {
      a = (*this)[a].parent;
      b = (*this)[b].parent;
    }
    return a;
  }

  std::vector<TreeIndex> leaves() const {
    std::vector<TreeIndex> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].kind != NodeKind::Meta) out.push_back(static_cast<TreeIndex>(i));
    return out;
  }

  std::vector<TreeIndex> metanodes() const {
    std::vector<TreeIndex> out;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (nodes_[i].kind == NodeKind::Meta) out.push_back(static_cast<TreeIndex>(i));
    return out;
  }

 private:
  friend struct TreeBuilder;
  std::vector<TreeNode> nodes_;
  std::unordered_map<std::string, TreeIndex> by_path_;
  std::unordered_map<std::string, TreeIndex> by_raw_;
};

/// A leaf placed at an explicit position in the hierarchy. Reshaping
/// operations (cycle splitting, ungrouping) rewrite `segments` and rebuild.
struct LeafSpec {
  std::vector<std::string> segments;
  NodeKind kind = NodeKind::Operation;
  std::string op_type;
  Attrs attrs;
  std::string raw_name;
};

struct TreeBuilder {
  struct Trie {
    std::map<std::string, Trie, NaturalLess> children;
    const LeafSpec* leaf = nullptr;
  };

  static HierarchyTree build(std::span<const LeafSpec> leaves) {
    Trie root;
    for (const auto& leaf : leaves) {
      Trie* cur = &root;
      for (std::size_t k = 0; k < leaf.segments.size(); ++k) {
        if (cur->leaf != nullptr)
          throw Error(Errc::PathConflict, "leaf " + cur->leaf->raw_name + " is a prefix of " + leaf.raw_name);
        cur = &cur->children[leaf.segments[k]];
      }
      if (cur->leaf != nullptr) throw Error(Errc::DuplicatePath, join_path(leaf.segments));
      if (!cur->children.empty())
        throw Error(Errc::PathConflict, "leaf " + leaf.raw_name + " is a prefix of another node");
      cur->leaf = &leaf;
    }

    HierarchyTree tree;
    tree.nodes_.front().kind = NodeKind::Meta;
    fill(tree, root, kRoot);
    for (std::size_t i = 1; i < tree.nodes_.size(); ++i) {
      tree.by_path_.emplace(tree.nodes_[i].path, static_cast<TreeIndex>(i));
      if (tree.nodes_[i].kind != NodeKind::Meta) tree.by_raw_.emplace(tree.nodes_[i].raw_name, static_cast<TreeIndex>(i));
    }
    return tree;
  }

 private:
  static void fill(HierarchyTree& tree, const Trie& trie, TreeIndex self) {
    for (const auto& [segment, child] : trie.children) {
      const auto idx = static_cast<TreeIndex>(tree.nodes_.size());
      TreeNode node;
      node.segment = segment;
      const auto& parent = tree.nodes_[static_cast<std::size_t>(self)];
      node.path = parent.path.empty() ? segment : parent.path + "/" + segment;
      node.parent = self;
      node.depth = parent.depth + 1;
      if (child.leaf != nullptr) {
        node.kind = child.leaf->kind;
        node.op_type = child.leaf->op_type;
        node.attrs = child.leaf->attrs;
        node.raw_name = child.leaf->raw_name;
      }
      tree.nodes_.push_back(std::move(node));
      tree.nodes_[static_cast<std::size_t>(self)].children.push_back(idx);
      fill(tree, child, idx);
    }
    auto& me = tree.nodes_[static_cast<std::size_t>(self)];
    me.descendant_count = tree.nodes_.size() - static_cast<std::size_t>(self) - 1;
  }
};

struct LeafEdge {
  TreeIndex src;
  TreeIndex dst;

  friend bool operator==(const LeafEdge&, const LeafEdge&) = default;
  friend auto operator<=>(const LeafEdge&, const LeafEdge&) = default;
};

struct Attachment {
  std::vector<TreeIndex> constants;
  std::vector<TreeIndex> parameters;
};

/// Immutable after construction.
struct ProcessedGraph {
  std::string name;
  HierarchyTree tree;
  std::vector<LeafEdge> leaf_edges;  // operation -> operation, sorted
  std::vector<LeafEdge> data_edges;  // data -> operation, sorted
  std::map<TreeIndex, Attachment> attachment;
  std::map<TreeIndex, std::vector<TreeIndex>> data_targets;

  bool is_attached(TreeIndex i) const { return data_targets.contains(i); }

  std::vector<LeafSpec> leaf_specs() const {
    std::vector<LeafSpec> out;
    for (const TreeIndex i : tree.leaves()) {
      const auto& n = tree[i];
      out.push_back(LeafSpec{split_path(n.path), n.kind, n.op_type, n.attrs, n.raw_name});
    }
    return out;
  }

  std::vector<RawEdge> raw_edges() const {
    std::vector<RawEdge> out;
    for (const auto& e : leaf_edges) out.push_back({tree[e.src].raw_name, tree[e.dst].raw_name});
    for (const auto& e : data_edges) out.push_back({tree[e.src].raw_name, tree[e.dst].raw_name});
    return out;
  }
};

/// Builds a processed graph from leaves at explicit tree positions and edges
/// given by raw name. Validates every RawGraph edge invariant.
inline ProcessedGraph assemble(std::string name, std::span<const LeafSpec> leaves, std::span<const RawEdge> edges) {
  ProcessedGraph pg;
  pg.name = std::move(name);
  pg.tree = TreeBuilder::build(leaves);
  const auto& tree = pg.tree;

  std::set<LeafEdge> seen;
  for (const auto& e : edges) {
    const auto s = tree.find_raw(e.src);
    const auto d = tree.find_raw(e.dst);
    if (!s) throw Error(Errc::DanglingEdge, e.src + " -> " + e.dst + " (missing " + e.src + ")");
    if (!d) throw Error(Errc::DanglingEdge, e.src + " -> " + e.dst + " (missing " + e.dst + ")");
    if (*s == *d) throw Error(Errc::SelfLoop, e.src);
    if (!seen.insert({*s, *d}).second) throw Error(Errc::DuplicateEdge, e.src + " -> " + e.dst);
    const bool src_data = is_data(tree[*s].kind);
    const bool dst_data = is_data(tree[*d].kind);
    if (src_data && dst_data) throw Error(Errc::DataToDataEdge, e.src + " -> " + e.dst);
    if (dst_data) throw Error(Errc::EdgeIntoDataNode, e.src + " -> " + e.dst);
    (src_data ? pg.data_edges : pg.leaf_edges).push_back({*s, *d});
  }
  std::sort(pg.leaf_edges.begin(), pg.leaf_edges.end());
  std::sort(pg.data_edges.begin(), pg.data_edges.end());

  for (const auto& e : pg.data_edges) pg.data_targets[e.src].push_back(e.dst);
  for (auto& [data, targets] : pg.data_targets) {
    std::sort(targets.begin(), targets.end());
    auto& slot = pg.attachment[targets.front()];
    (tree[data].kind == NodeKind::Constant ? slot.constants : slot.parameters).push_back(data);
  }
  return pg;
}

inline void validate_name(const std::string& name) {
  if (name.empty()) throw Error(Errc::InvalidPath, "empty node name");
  for (const auto& seg : split_path(name))
    if (seg.empty()) throw Error(Errc::InvalidPath, "empty path segment in \"" + name + "\"");
}

inline ProcessedGraph build_hierarchy(const RawGraph& raw) {
  std::vector<LeafSpec> leaves;
  leaves.reserve(raw.nodes.size());
  for (const auto& n : raw.nodes) {
    validate_name(n.name);
    if (n.kind == NodeKind::Meta) throw Error(Errc::InvalidPath, "metanodes are derived, not declared: " + n.name);
    leaves.push_back(LeafSpec{split_path(n.name), n.kind, n.op_type, n.attrs, n.name});
  }
  return assemble(raw.name, leaves, raw.edges);
}

inline std::size_t descendants(const HierarchyTree& tree, std::string_view meta) {
  const auto idx = tree.find(meta);
  if (!idx) throw Error(Errc::UnknownNode, std::string(meta));
  if (!tree.is_meta(*idx)) throw Error(Errc::NotAMetaNode, std::string(meta));
  return tree[*idx].descendant_count;
}

/// Flattens the tree back into a RawGraph using leaf raw names.
inline RawGraph to_raw(const ProcessedGraph& pg) {
  RawGraph g;
  g.name = pg.name;
  for (const TreeIndex i : pg.tree.leaves()) {
    const auto& n = pg.tree[i];
    g.nodes.push_back(RawNode{n.raw_name, n.kind, n.op_type, n.attrs});
  }
  g.edges = pg.raw_edges();
  return g;
}

// Type string used for hashing and display: op_type for operations, kind for
// data nodes, and the basename with any leading "<digits>_" stripped for
// metanodes ("0_SeqCell" and "1_SeqCell" share "SeqCell").
inline std::string type_string(const TreeNode& n) {
  switch (n.kind) {
    case NodeKind::Operation: return n.op_type;
    case NodeKind::Constant: return "Constant";
    case NodeKind::Parameter: return "Parameter";
    case NodeKind::Meta: break;
  }
  std::string_view s = n.segment;
  std::size_t k = 0;
  while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
  if (k > 0 && k < s.size() && s[k] == '_') s.remove_prefix(k + 1);
  return std::string(s);
}

}  // namespace cgs
