#pragma once

// JSON payloads for visible graphs, layouts, cycle reports, paths and
// search results, and the CSV depth table.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgs/concept_graph.hpp"
#include "cgs/edge_pruning.hpp"
#include "cgs/graph_model.hpp"
#include "cgs/layout.hpp"
#include "cgs/visible_graph.hpp"

namespace cgs {

using Json = nlohmann::ordered_json;

inline Json attrs_json(const Attrs& attrs) {
  Json j = Json::object();
  for (const auto& [k, v] : attrs) j[k] = v;
  return j;
}

inline Json endpoint_json(const VisibleGraph& vg, const Endpoint& ep) {
  Json j;
  j["node"] = vg.tree()[ep.node].path;
  if (ep.port) j["port"] = *ep.port;
  return j;
}

inline Json edge_json(const VisibleGraph& vg, std::size_t id) {
  const auto& e = vg.edges()[id];
  const auto& tree = vg.tree();
  Json j;
  j["id"] = id;
  j["kind"] = to_string(e.kind);
  j["src"] = endpoint_json(vg, e.src);
  j["dst"] = endpoint_json(vg, e.dst);
  j["hidden"] = e.hidden;
  Json contrib = Json::array();
  for (const auto& le : e.contributors) contrib.push_back(Json::array({tree[le.src].path, tree[le.dst].path}));
  j["contributors"] = std::move(contrib);
  return j;
}

inline Json port_json(const VisibleGraph& vg, std::size_t id) {
  const auto& p = vg.ports()[id];
  Json j;
  j["id"] = id;
  j["owner"] = vg.tree()[p.owner].path;
  j["side"] = to_string(p.side);
  j["level"] = p.level;
  j["kind"] = to_string(p.kind);
  j["hidden_edges"] = p.hidden_edges;
  return j;
}

inline Json pile_json(const VisibleGraph& vg, const Pile& pile) {
  const auto& tree = vg.tree();
  Json j;
  j["id"] = pile.id;
  j["scope"] = tree[pile.scope].path;
  j["category"] = pile.category;
  j["repeat"] = pile.repeat();
  j["fingerprint"] = pile.fingerprint.value;
  Json members = Json::array();
  for (const auto& m : pile.members) {
    Json one = Json::array();
    for (const TreeIndex v : m) one.push_back(tree[v].path);
    members.push_back(std::move(one));
  }
  j["members"] = std::move(members);
  Json nodes = Json::array();
  for (const auto& m : pile.member_nodes) {
    Json one = Json::array();
    for (const TreeIndex v : m) one.push_back(tree[v].path);
    nodes.push_back(std::move(one));
  }
  j["member_nodes"] = std::move(nodes);
  j["member_edge_counts"] = pile.member_edge_counts;
  j["removed_edges"] = pile.removed_edges;
  return j;
}

inline Json visible_json(const VisibleGraph& vg) {
  const auto& pg = *vg.graph;
  const auto& tree = vg.tree();
  Json j;
  j["graph"] = pg.name;
  j["stats"] = {{"nodes", vg.stats.node_count}, {"edges", vg.stats.edge_count}};
  Json nodes = Json::array();
  for (const auto& n : vg.nodes) {
    if (n.removed) continue;
    const auto& t = tree[n.id];
    Json o;
    o["id"] = t.path;
    o["kind"] = to_string(t.kind);
    o["type"] = type_string(t);
    if (t.kind == NodeKind::Operation) o["op_type"] = t.op_type;
    o["parent"] = tree[t.parent].path;
    o["depth"] = t.depth;
    o["expanded"] = n.expanded;
    if (tree.is_meta(n.id)) o["descendants"] = t.descendant_count;
    if (n.layer) o["layer"] = to_string(*n.layer);
    if (n.pile) o["pile"] = *n.pile;
    if (const auto it = pg.attachment.find(n.id); it != pg.attachment.end()) {
      Json c = Json::array(), p = Json::array();
      for (const TreeIndex d : it->second.constants) c.push_back(tree[d].path);
      for (const TreeIndex d : it->second.parameters) p.push_back(tree[d].path);
      o["constants"] = std::move(c);
      o["parameters"] = std::move(p);
    }
    if (!t.attrs.empty()) o["attrs"] = attrs_json(t.attrs);
    nodes.push_back(std::move(o));
  }
  j["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (std::size_t e = 0; e < vg.edges().size(); ++e)
    if (!vg.edge_removed[e]) edges.push_back(edge_json(vg, e));
  j["edges"] = std::move(edges);
  Json ports = Json::array();
  for (std::size_t p = 0; p < vg.ports().size(); ++p)
    if (!vg.port_removed[p]) ports.push_back(port_json(vg, p));
  j["ports"] = std::move(ports);
  Json piles = Json::array();
  for (const auto& p : vg.piles) piles.push_back(pile_json(vg, p));
  j["piles"] = std::move(piles);
  return j;
}

inline Json point_json(const Point& p) { return Json::array({p.x, p.y}); }

inline Json box_json(const Box& b) { return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

inline Json layout_json(const LayoutResult& lay, const VisibleGraph& vg) {
  const auto& tree = vg.tree();
  Json j;
  j["bounds"] = box_json(lay.bounds);
  Json boxes = Json::object();
  for (const auto& [id, b] : lay.boxes) boxes[tree[id].path] = box_json(b);
  j["boxes"] = std::move(boxes);
  Json ports = Json::object();
  for (const auto& [id, p] : lay.port_anchors) ports[std::to_string(id)] = point_json(p);
  j["ports"] = std::move(ports);
  Json routes = Json::object();
  for (const auto& [id, r] : lay.routes) {
    Json o;
    Json pts = Json::array();
    for (const auto& p : r.points) pts.push_back(point_json(p));
    o["points"] = std::move(pts);
    Json arcs = Json::array();
    for (const auto& a : r.arcs)
      arcs.push_back({{"bend", point_json(a.bend)},
                      {"center", point_json(a.center)},
                      {"radius", a.radius},
                      {"sweep", a.clockwise ? 1 : 0},
                      {"from", point_json(a.from)},
                      {"to", point_json(a.to)}});
    o["arcs"] = std::move(arcs);
    o["hidden"] = vg.edges()[id].hidden;
    if (r.feedback) o["feedback"] = true;
    routes[std::to_string(id)] = std::move(o);
  }
  j["routes"] = std::move(routes);
  Json badges = Json::array();
  for (const auto& b : lay.badges)
    badges.push_back({{"data", tree[b.data].path},
                      {"target", tree[b.target].path},
                      {"kind", to_string(b.kind)},
                      {"corner", b.kind == NodeKind::Constant ? "bottom-left" : "bottom-right"},
                      {"anchor", point_json(b.anchor)},
                      {"slot", b.slot}});
  j["badges"] = std::move(badges);
  Json piles = Json::object();
  for (const auto& [id, g] : lay.piles) {
    Json echoes = Json::array();
    for (const auto& e : g.echoes) echoes.push_back(box_json(e));
    piles[std::to_string(id)] = {{"echoes", std::move(echoes)}, {"badge", point_json(g.badge)}, {"repeat", vg.piles[id].repeat()}};
  }
  j["piles"] = std::move(piles);
  const auto& d = lay.diagnostics;
  j["diagnostics"] = {{"containers", d.containers},
                      {"layering_edges", d.layering_edges},
                      {"feedback_edges", d.feedback_edges},
                      {"dummy_nodes", d.dummy_nodes}};
  return j;
}

inline Json report_json(const CycleReport& r) {
  Json j;
  j["cycles_found"] = r.cycles_found;
  j["passes"] = r.passes;
  j["residual_cycles"] = r.residual_cycles;
  j["cap_exceeded"] = r.cap_exceeded;
  Json splits = Json::array();
  for (const auto& s : r.splits) splits.push_back({{"original", s.original}, {"parts", s.parts}, {"members", s.members}});
  j["splits"] = std::move(splits);
  return j;
}

inline Json paths_json(const std::vector<FoundPath>& paths) {
  Json arr = Json::array();
  for (const auto& p : paths) arr.push_back({{"nodes", p.nodes}, {"edges", p.hop_edges}});
  return arr;
}

inline Json profile_json(const NodeProfile& p) {
  Json j;
  j["path"] = p.path;
  j["kind"] = to_string(p.kind);
  if (!p.op_type.empty()) j["op_type"] = p.op_type;
  if (p.layer) j["layer"] = to_string(*p.layer);
  j["attrs"] = attrs_json(p.attrs);
  j["in_degree"] = p.in_degree;
  j["out_degree"] = p.out_degree;
  j["parent"] = p.parent;
  j["visible"] = p.visible;
  j["ports"] = p.ports;
  return j;
}

inline std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string stats_csv(const std::vector<StatsRow>& rows) {
  std::string out = "depth,raw_nodes,raw_edges,vis_nodes,vis_edges,reduction_pct\n";
  for (const auto& r : rows)
    out += std::to_string(r.depth) + "," + std::to_string(r.raw_nodes) + "," + std::to_string(r.raw_edges) + "," +
           std::to_string(r.vis_nodes) + "," + std::to_string(r.vis_edges) + "," + format_pct(r.reduction_pct()) + "\n";
  return out;
}

}  // namespace cgs
