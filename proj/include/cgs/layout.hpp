#pragma once

// Layered orthogonal layout of a visible graph, computed bottom-up: every
// expanded metanode is laid out on its own, and its bounding box becomes
// the node size one level up. Flow runs left to right.
//
// Per container: back edges found by DFS are reversed for layering only,
// layers come from longest paths, edges spanning k > 1 layers get k - 1
// dummy nodes, and four down-up barycenter sweeps order each layer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cgs/edge_pruning.hpp"
#include "cgs/error.hpp"
#include "cgs/graph_model.hpp"
#include "cgs/visible_graph.hpp"

namespace cgs {

struct LayoutParams {
  double layer_gap = 60;
  double node_gap = 20;
  double margin = 16;
  double arc_radius = 8;
  double min_width = 40;
  double min_height = 24;
  double char_width = 7;
  double port_spacing = 10;
  double pile_offset = 6;
  int pile_echoes = 2;
  int sweeps = 4;

  void validate() const {
    if (layer_gap <= 0 || node_gap <= 0 || margin <= 0 || arc_radius <= 0 || min_width <= 0 || min_height <= 0 ||
        char_width <= 0 || port_spacing <= 0 || pile_offset <= 0 || pile_echoes < 0 || sweeps < 0)
      throw Error(Errc::InvalidOption, "layout parameters must be positive");
  }
};

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Arc {
  Point bend;
  Point center;
  double radius = 0;
  bool clockwise = true;  // in screen coordinates (y down)
  Point from;             // tangent point on the incoming segment
  Point to;               // tangent point on the outgoing segment
};

struct Route {
  std::vector<Point> points;
  std::vector<Arc> arcs;  // one per interior point
  bool feedback = false;  // reversed for layering
};

struct Badge {
  TreeIndex data = -1;
  TreeIndex target = -1;
  NodeKind kind = NodeKind::Constant;
  Point anchor;  // box corner
  int slot = 0;  // position among badges on the same corner
};

struct PileGeometry {
  std::vector<Box> echoes;
  Point badge;
};

struct ContainerOrder {
  std::string signature;
  std::vector<std::vector<std::string>> layers;
};

struct LayoutDiagnostics {
  std::size_t containers = 0;
  std::size_t layering_edges = 0;
  std::size_t feedback_edges = 0;
  std::size_t dummy_nodes = 0;
  std::size_t span_excess = 0;  // sum over layering edges of (span - 1)
};

struct LayoutResult {
  std::map<TreeIndex, Box> boxes;
  std::map<std::size_t, Point> port_anchors;
  std::map<std::size_t, Route> routes;
  std::vector<Badge> badges;
  std::map<std::size_t, PileGeometry> piles;
  std::map<std::string, ContainerOrder> orders;  // container path ("" = root)
  std::map<TreeIndex, std::vector<std::pair<TreeIndex, TreeIndex>>> layering_edges;  // per container, child pairs
  Box bounds;
  LayoutDiagnostics diagnostics;
};

namespace detail {

struct LayoutItem {
  std::string key;
  TreeIndex node = -1;  // -1 for dummies
  double w = 0;         // occupied area, pile echoes included
  double h = 0;
  int layer = 0;
  double x = 0;  // relative to the container's top-left
  double y = 0;
};

struct ContainerLayout {
  TreeIndex id = kRoot;
  std::vector<LayoutItem> items;
  std::vector<std::vector<int>> layers;
  std::map<std::pair<TreeIndex, TreeIndex>, std::vector<int>> dummies;  // oriented as laid out
  std::set<std::pair<TreeIndex, TreeIndex>> reversed;
  double w = 0;
  double h = 0;
};

inline std::string dummy_key(const HierarchyTree& tree, TreeIndex u, TreeIndex v, std::size_t k) {
  return "~" + tree[u].path + ">" + tree[v].path + "#" + std::to_string(k);
}

class Layouter {
 public:
  Layouter(const VisibleGraph& vg, const LayoutParams& params, const LayoutResult* previous)
      : vg_(vg), tree_(vg.tree()), p_(params), previous_(previous) {}

  LayoutResult run() {
    p_.validate();
    // live edges by the container whose children they connect
    for (std::size_t e = 0; e < vg_.edges().size(); ++e) {
      if (vg_.edge_removed[e]) continue;
      const auto& ve = vg_.edges()[e];
      const TreeIndex l = tree_.lca(ve.src.node, ve.dst.node);
      if (l != ve.src.node && l != ve.dst.node) by_scope_[l].push_back(e);
    }
    std::vector<TreeIndex> containers{kRoot};
    for (const auto& n : vg_.nodes)
      if (n.expanded && !n.removed) containers.push_back(n.id);
    count_ports();
    for (auto it = containers.rbegin(); it != containers.rend(); ++it) layout_container(*it);
    place(kRoot, 0, 0);
    const auto& root = layouts_.at(kRoot);
    result_.bounds = {0, 0, root.w, root.h};
    result_.diagnostics.containers = containers.size();
    anchor_ports();
    route_edges();
    place_badges();
    return std::move(result_);
  }

 private:
  void count_ports() {
    for (std::size_t k = 0; k < vg_.ports().size(); ++k) {
      if (vg_.port_removed[k]) continue;
      const auto& port = vg_.ports()[k];
      (port.side == PortSide::Input ? in_ports_ : out_ports_)[port.owner].push_back(k);
    }
    auto by_level = [&](std::map<TreeIndex, std::vector<std::size_t>>& m) {
      for (auto& [owner, ids] : m)
        std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
          const auto& pa = vg_.ports()[a];
          const auto& pb = vg_.ports()[b];
          return std::tie(pa.level, pa.kind) < std::tie(pb.level, pb.kind);
        });
    };
    by_level(in_ports_);
    by_level(out_ports_);
  }

  std::size_t port_count(const std::map<TreeIndex, std::vector<std::size_t>>& m, TreeIndex v) const {
    const auto it = m.find(v);
    return it == m.end() ? 0 : it->second.size();
  }

  bool is_pile_rep(TreeIndex v) const {
    const auto* n = vg_.node(v);
    if (n == nullptr || !n->pile) return false;
    const auto& top = vg_.piles[*n->pile].members.front();
    return std::find(top.begin(), top.end(), v) != top.end();
  }

  // Size of the node's own box, without pile echoes.
  std::pair<double, double> box_size(TreeIndex v) const {
    if (const auto it = layouts_.find(v); it != layouts_.end()) return {it->second.w, it->second.h};
    const double label = static_cast<double>(tree_[v].segment.size()) * p_.char_width + 12;
    const double ports = static_cast<double>(std::max(port_count(in_ports_, v), port_count(out_ports_, v)));
    return {std::max(p_.min_width, label), std::max(p_.min_height, 8 + ports * p_.port_spacing)};
  }

  double echo_extent() const { return p_.pile_offset * p_.pile_echoes; }

  void layout_container(TreeIndex c) {
    ContainerLayout cl;
    cl.id = c;
    std::map<TreeIndex, int> slot;
    for (const TreeIndex child : tree_[c].children) {
      if (!vg_.is_live(child)) continue;
      LayoutItem item;
      item.key = tree_[child].path;
      item.node = child;
      auto [w, h] = box_size(child);
      if (is_pile_rep(child)) {
        w += echo_extent();
        h += echo_extent();
      }
      item.w = w;
      item.h = h;
      slot[child] = static_cast<int>(cl.items.size());
      cl.items.push_back(std::move(item));
    }

    // layering edges between children of c
    std::set<std::pair<int, int>> pairs;
    const auto scoped = by_scope_.find(c);
    for (const std::size_t e : scoped == by_scope_.end() ? std::vector<std::size_t>{} : scoped->second) {
      const auto& ve = vg_.edges()[e];
      const auto a = tree_.child_toward(c, ve.src.node);
      const auto b = tree_.child_toward(c, ve.dst.node);
      if (!a || !b || *a == *b) continue;
      const auto sa = slot.find(*a), sb = slot.find(*b);
      if (sa == slot.end() || sb == slot.end()) continue;
      pairs.insert({sa->second, sb->second});
    }
    const std::size_t n = cl.items.size();
    std::vector<std::vector<int>> out(n);
    for (const auto& [a, b] : pairs) out[static_cast<std::size_t>(a)].push_back(b);

    // feedback edges: DFS back edges, in item order
    std::set<std::pair<int, int>> back;
    {
      std::vector<int> state(n, 0);
      for (std::size_t r = 0; r < n; ++r) {
        if (state[r] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{static_cast<int>(r), 0}};
        state[r] = 1;
        while (!stack.empty()) {
          auto& [v, i] = stack.back();
          const auto& next = out[static_cast<std::size_t>(v)];
          if (i == next.size()) {
            state[static_cast<std::size_t>(v)] = 2;
            stack.pop_back();
            continue;
          }
          const int w = next[i++];
          if (state[static_cast<std::size_t>(w)] == 1) {
            back.insert({v, w});
          } else if (state[static_cast<std::size_t>(w)] == 0) {
            state[static_cast<std::size_t>(w)] = 1;
            stack.push_back({w, 0});
          }
        }
      }
    }
    std::vector<std::pair<int, int>> dag;
    for (const auto& [a, b] : pairs) {
      if (back.contains({a, b})) {
        dag.push_back({b, a});
        cl.reversed.insert({cl.items[static_cast<std::size_t>(a)].node, cl.items[static_cast<std::size_t>(b)].node});
      } else {
        dag.push_back({a, b});
      }
    }
    std::sort(dag.begin(), dag.end());
    dag.erase(std::unique(dag.begin(), dag.end()), dag.end());
    result_.diagnostics.layering_edges += pairs.size();
    result_.diagnostics.feedback_edges += back.size();
    auto& recorded = result_.layering_edges[c];
    for (const auto& [a, b] : dag) recorded.push_back({cl.items[static_cast<std::size_t>(a)].node, cl.items[static_cast<std::size_t>(b)].node});

    // longest-path layering
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> dout(n);
    for (const auto& [a, b] : dag) {
      dout[static_cast<std::size_t>(a)].push_back(b);
      ++indeg[static_cast<std::size_t>(b)];
    }
    std::vector<int> queue;
    for (std::size_t v = 0; v < n; ++v)
      if (indeg[v] == 0) queue.push_back(static_cast<int>(v));
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int v = queue[q];
      for (const int w : dout[static_cast<std::size_t>(v)]) {
        auto& lw = cl.items[static_cast<std::size_t>(w)].layer;
        lw = std::max(lw, cl.items[static_cast<std::size_t>(v)].layer + 1);
        if (--indeg[static_cast<std::size_t>(w)] == 0) queue.push_back(w);
      }
    }
    if (queue.size() != n) throw Error(Errc::CycleWithoutFeedbackSet, tree_[c].path);

    // dummies
    for (const auto& [a, b] : dag) {
      const int la = cl.items[static_cast<std::size_t>(a)].layer;
      const int lb = cl.items[static_cast<std::size_t>(b)].layer;
      const TreeIndex na = cl.items[static_cast<std::size_t>(a)].node, nb = cl.items[static_cast<std::size_t>(b)].node;
      result_.diagnostics.span_excess += static_cast<std::size_t>(lb - la - 1);
      auto& chain = cl.dummies[{na, nb}];
      for (int l = la + 1; l < lb; ++l) {
        LayoutItem d;
        d.key = dummy_key(tree_, na, nb, static_cast<std::size_t>(l - la));
        d.layer = l;
        d.w = 0;
        d.h = p_.node_gap / 2;
        chain.push_back(static_cast<int>(cl.items.size()));
        cl.items.push_back(std::move(d));
        ++result_.diagnostics.dummy_nodes;
      }
    }

    // adjacency over items including dummies, for ordering
    const std::size_t total = cl.items.size();
    std::vector<std::vector<int>> up(total), down(total);
    for (const auto& [a, b] : dag) {
      const TreeIndex na = cl.items[static_cast<std::size_t>(a)].node, nb = cl.items[static_cast<std::size_t>(b)].node;
      std::vector<int> path{a};
      const auto& chain = cl.dummies[{na, nb}];
      path.insert(path.end(), chain.begin(), chain.end());
      path.push_back(b);
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        down[static_cast<std::size_t>(path[k])].push_back(path[k + 1]);
        up[static_cast<std::size_t>(path[k + 1])].push_back(path[k]);
      }
    }

    int layer_count = 0;
    for (const auto& it : cl.items) layer_count = std::max(layer_count, it.layer + 1);
    cl.layers.assign(static_cast<std::size_t>(layer_count), {});
    for (std::size_t i = 0; i < total; ++i) cl.layers[static_cast<std::size_t>(cl.items[i].layer)].push_back(static_cast<int>(i));

    const std::string signature = container_signature(cl, dag);
    const std::string cpath = tree_[c].path;
    bool seeded = false;
    bool reuse = false;
    if (previous_ != nullptr) {
      if (const auto it = previous_->orders.find(cpath); it != previous_->orders.end()) {
        seeded = true;
        reuse = it->second.signature == signature;
        std::map<std::string, std::size_t> rank;
        for (const auto& layer : it->second.layers)
          for (std::size_t k = 0; k < layer.size(); ++k) rank[layer[k]] = k;
        for (auto& layer : cl.layers) {
          std::stable_sort(layer.begin(), layer.end(), [&](int a, int b) {
            const auto ra = rank.find(cl.items[static_cast<std::size_t>(a)].key);
            const auto rb = rank.find(cl.items[static_cast<std::size_t>(b)].key);
            const bool ka = ra != rank.end(), kb = rb != rank.end();
            if (ka != kb) return ka;
            return ka && ra->second < rb->second;
          });
        }
      }
    }
    (void)seeded;
    if (!reuse) {
      for (int s = 0; s < p_.sweeps; ++s) {
        for (std::size_t l = 1; l < cl.layers.size(); ++l) reorder(cl, l, cl.layers[l - 1], up);
        for (std::size_t l = cl.layers.size() - 1; l-- > 0;) reorder(cl, l, cl.layers[l + 1], down);
      }
    }

    // coordinates: layers are columns, items stacked top to bottom
    double x = p_.margin;
    double max_bottom = 0;
    for (const auto& layer : cl.layers) {
      double col_w = 0;
      double y = p_.margin;
      for (const int i : layer) {
        auto& it = cl.items[static_cast<std::size_t>(i)];
        it.x = x;
        it.y = y;
        y += it.h + p_.node_gap;
        col_w = std::max(col_w, it.w);
      }
      max_bottom = std::max(max_bottom, y - p_.node_gap);
      x += col_w + p_.layer_gap;
    }
    const double content_w = cl.layers.empty() ? 0 : x - p_.layer_gap - p_.margin;
    const double content_h = cl.layers.empty() ? 0 : max_bottom - p_.margin;
    cl.w = std::max(p_.min_width, content_w + 2 * p_.margin);
    cl.h = std::max(p_.min_height, content_h + 2 * p_.margin);
    // room for ports on the container border
    const double ports = static_cast<double>(std::max(port_count(in_ports_, c), port_count(out_ports_, c)));
    cl.h = std::max(cl.h, 8 + ports * p_.port_spacing);

    ContainerOrder order;
    order.signature = signature;
    for (const auto& layer : cl.layers) {
      std::vector<std::string> keys;
      for (const int i : layer) keys.push_back(cl.items[static_cast<std::size_t>(i)].key);
      order.layers.push_back(std::move(keys));
    }
    result_.orders[cpath] = std::move(order);
    layouts_[c] = std::move(cl);
  }

  std::string container_signature(const ContainerLayout& cl, const std::vector<std::pair<int, int>>& dag) const {
    std::string s;
    for (const auto& it : cl.items)
      if (it.node != -1) s += it.key + ";";
    s += "|";
    for (const auto& [a, b] : dag) s += std::to_string(a) + ">" + std::to_string(b) + ";";
    return s;
  }

  // Barycenter ordering of layer `l` against the fixed neighbour layer.
  static void reorder(ContainerLayout& cl, std::size_t l, const std::vector<int>& fixed, const std::vector<std::vector<int>>& nbrs) {
    std::map<int, std::size_t> pos;
    for (std::size_t k = 0; k < fixed.size(); ++k) pos[fixed[k]] = k;
    auto& layer = cl.layers[l];
    std::vector<std::pair<double, int>> keyed;
    for (std::size_t k = 0; k < layer.size(); ++k) {
      const int v = layer[k];
      double sum = 0;
      int cnt = 0;
      for (const int w : nbrs[static_cast<std::size_t>(v)]) {
        if (const auto it = pos.find(w); it != pos.end()) {
          sum += static_cast<double>(it->second);
          ++cnt;
        }
      }
      keyed.push_back({cnt > 0 ? sum / cnt : static_cast<double>(k), v});
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < layer.size(); ++k) layer[k] = keyed[k].second;
  }

  void place(TreeIndex c, double ox, double oy) {
    auto& cl = layouts_.at(c);
    if (c != kRoot) result_.boxes[c] = {ox, oy, cl.w, cl.h};
    for (const auto& it : cl.items) {
      const double ax = ox + it.x, ay = oy + it.y;
      if (it.node == -1) {
        dummy_pos_[it.key] = {ax, ay + it.h / 2};
        continue;
      }
      if (layouts_.contains(it.node)) {
        place(it.node, ax, ay);
      } else {
        const auto [w, h] = box_size(it.node);
        result_.boxes[it.node] = {ax, ay, w, h};
      }
      if (is_pile_rep(it.node)) {
        // members spanning several nodes echo each of them, badge goes on the first
        const Box& b = result_.boxes.at(it.node);
        const std::size_t pid = *vg_.node(it.node)->pile;
        const bool first = !result_.piles.contains(pid);
        PileGeometry& g = result_.piles[pid];
        for (int k = 1; k <= p_.pile_echoes; ++k)
          g.echoes.push_back({b.x + k * p_.pile_offset, b.y + k * p_.pile_offset, b.w, b.h});
        if (first || vg_.piles[pid].members.front().front() == it.node) g.badge = {b.right() + echo_extent(), b.y};
      }
    }
  }

  void anchor_ports() {
    auto side = [&](const std::map<TreeIndex, std::vector<std::size_t>>& m, bool left) {
      for (const auto& [owner, ids] : m) {
        const auto bit = result_.boxes.find(owner);
        if (bit == result_.boxes.end()) continue;
        const Box& b = bit->second;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          const double y = b.y + b.h * static_cast<double>(k + 1) / static_cast<double>(ids.size() + 1);
          result_.port_anchors[ids[k]] = {left ? b.x : b.right(), y};
        }
      }
    };
    side(in_ports_, true);
    side(out_ports_, false);
  }

  Point endpoint(const Endpoint& ep, bool source) const {
    if (ep.port) return result_.port_anchors.at(*ep.port);
    const Box& b = result_.boxes.at(ep.node);
    return {source ? b.right() : b.x, b.y + b.h / 2};
  }

  // Axis-aligned connection between two points inside container box `cb`.
  void connect(std::vector<Point>& pts, Point p, Point q, const Box& cb) const {
    if (p.y == q.y && q.x >= p.x) {
      pts.push_back(q);
      return;
    }
    if (q.x > p.x) {
      const double mx = (p.x + q.x) / 2;
      pts.push_back({mx, p.y});
      pts.push_back({mx, q.y});
      pts.push_back(q);
      return;
    }
    // leftward: leave right, run along the top channel, come back in from the left
    const double c = p_.node_gap / 2;
    const double top = cb.y + p_.margin / 2;
    pts.push_back({p.x + c, p.y});
    pts.push_back({p.x + c, top});
    pts.push_back({q.x - c, top});
    pts.push_back({q.x - c, q.y});
    pts.push_back(q);
  }

  void route_edges() {
    for (std::size_t e = 0; e < vg_.edges().size(); ++e) {
      if (vg_.edge_removed[e]) continue;
      const auto& ve = vg_.edges()[e];
      if (!result_.boxes.contains(ve.src.node) || !result_.boxes.contains(ve.dst.node)) continue;
      const Point p = endpoint(ve.src, true);
      const Point q = endpoint(ve.dst, false);
      TreeIndex scope = tree_.lca(ve.src.node, ve.dst.node);
      const Box cb = scope == kRoot ? result_.bounds : result_.boxes.at(scope);

      Route r;
      std::vector<Point> waypoints;
      if (scope != ve.src.node && scope != ve.dst.node && layouts_.contains(scope)) {
        const TreeIndex u = *tree_.child_toward(scope, ve.src.node);
        const TreeIndex v = *tree_.child_toward(scope, ve.dst.node);
        const auto& cl = layouts_.at(scope);
        r.feedback = cl.reversed.contains({u, v});
        if (!r.feedback) {
          if (const auto it = cl.dummies.find({u, v}); it != cl.dummies.end())
            for (const int d : it->second) waypoints.push_back(dummy_pos_.at(cl.items[static_cast<std::size_t>(d)].key));
        }
      }
      std::vector<Point> pts{p};
      Point cur = p;
      for (const Point& w : waypoints) {
        connect(pts, cur, w, cb);
        cur = w;
      }
      connect(pts, cur, q, cb);
      r.points = simplify(pts);
      r.arcs = bends(r.points);
      result_.routes[e] = std::move(r);
    }
  }

  static std::vector<Point> simplify(const std::vector<Point>& in) {
    std::vector<Point> out;
    for (const auto& pt : in) {
      if (!out.empty() && out.back() == pt) continue;
      if (out.size() >= 2) {
        const auto& a = out[out.size() - 2];
        const auto& b = out.back();
        const bool collinear = (a.x == b.x && b.x == pt.x) || (a.y == b.y && b.y == pt.y);
        if (collinear) {
          // drop b only when it lies between a and pt
          const bool between = (std::min(a.x, pt.x) <= b.x && b.x <= std::max(a.x, pt.x)) &&
                               (std::min(a.y, pt.y) <= b.y && b.y <= std::max(a.y, pt.y));
          if (between) out.pop_back();
        }
      }
      out.push_back(pt);
    }
    return out;
  }

  std::vector<Arc> bends(const std::vector<Point>& pts) const {
    std::vector<Arc> arcs;
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
      const Point a = pts[k - 1], b = pts[k], c = pts[k + 1];
      const double din_x = b.x - a.x, din_y = b.y - a.y;
      const double dout_x = c.x - b.x, dout_y = c.y - b.y;
      const double len_in = std::abs(din_x) + std::abs(din_y);
      const double len_out = std::abs(dout_x) + std::abs(dout_y);
      const double r = std::min({p_.arc_radius, len_in / 2, len_out / 2});
      const double ux = din_x / len_in, uy = din_y / len_in;
      const double vx = dout_x / len_out, vy = dout_y / len_out;
      Arc arc;
      arc.bend = b;
      arc.radius = r;
      arc.from = {b.x - ux * r, b.y - uy * r};
      arc.to = {b.x + vx * r, b.y + vy * r};
      arc.center = {b.x - ux * r + vx * r, b.y - uy * r + vy * r};
      arc.clockwise = ux * vy - uy * vx > 0;
      arcs.push_back(arc);
    }
    return arcs;
  }

  void place_badges() {
    const auto& pg = *vg_.graph;
    std::map<std::pair<TreeIndex, NodeKind>, int> used;
    for (const auto& [data, targets] : pg.data_targets) {
      if (!pg.is_attached(data)) continue;
      const NodeKind kind = tree_[data].kind;
      for (const TreeIndex t : targets) {
        const auto bit = result_.boxes.find(t);
        if (bit == result_.boxes.end()) continue;
        const Box& b = bit->second;
        Badge badge;
        badge.data = data;
        badge.target = t;
        badge.kind = kind;
        badge.anchor = kind == NodeKind::Constant ? Point{b.x, b.bottom()} : Point{b.right(), b.bottom()};
        badge.slot = used[{t, kind}]++;
        result_.badges.push_back(badge);
      }
    }
  }

  const VisibleGraph& vg_;
  std::map<TreeIndex, std::vector<std::size_t>> by_scope_;
  const HierarchyTree& tree_;
  LayoutParams p_;
  const LayoutResult* previous_;
  LayoutResult result_;
  std::map<TreeIndex, ContainerLayout> layouts_;
  std::map<TreeIndex, std::vector<std::size_t>> in_ports_, out_ports_;
  std::map<std::string, Point> dummy_pos_;
};

}  // namespace detail

inline LayoutResult layout_graph(const VisibleGraph& vg, const LayoutParams& params = {}) {
  return detail::Layouter(vg, params, nullptr).run();
}

struct StableLayout {
  LayoutResult layout;
  std::map<std::string, std::string> correspondence;  // old node path -> new node path
};

/// Relayout seeded with the previous layer orders. Containers whose
/// children and edges did not change keep their previous order as is.
inline StableLayout stable_relayout(const LayoutResult& previous, const HierarchyTree& previous_tree, const VisibleGraph& next,
                                    const LayoutParams& params = {}) {
  StableLayout out;
  out.layout = detail::Layouter(next, params, &previous).run();
  const auto& tree = next.tree();
  for (const auto& [id, box] : previous.boxes) {
    const auto& path = previous_tree[id].path;
    // the node itself, else its nearest visible ancestor
    for (std::string p = path; !p.empty();) {
      const auto idx = tree.find(p);
      if (idx && next.is_live(*idx)) {
        out.correspondence[path] = p;
        break;
      }
      const auto slash = p.rfind('/');
      p = slash == std::string::npos ? "" : p.substr(0, slash);
    }
  }
  return out;
}

/// Crossings between consecutive layers of one container's order, given
/// the container's layering edges expanded through dummies.
inline std::size_t count_crossings(const std::vector<std::vector<std::string>>& layers,
                                   const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> where;
  for (std::size_t l = 0; l < layers.size(); ++l)
    for (std::size_t k = 0; k < layers[l].size(); ++k) where[layers[l][k]] = {l, k};
  std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> between;
  for (const auto& [a, b] : edges) {
    const auto ia = where.find(a), ib = where.find(b);
    if (ia == where.end() || ib == where.end()) continue;
    if (ib->second.first != ia->second.first + 1) continue;
    between[ia->second.first].push_back({ia->second.second, ib->second.second});
  }
  std::size_t crossings = 0;
  for (const auto& [l, es] : between)
    for (std::size_t i = 0; i < es.size(); ++i)
      for (std::size_t j = i + 1; j < es.size(); ++j)
        if ((es[i].first < es[j].first && es[i].second > es[j].second) || (es[i].first > es[j].first && es[i].second < es[j].second))
          ++crossings;
  return crossings;
}

}  // namespace cgs
