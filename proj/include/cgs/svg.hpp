#pragma once

// SVG 1.1 rendering of a layout: boxes, routes with arc bends, port glyphs
// sized by level, data badges and pile echoes.

#include <cstdio>
#include <string>

#include "cgs/error.hpp"
#include "cgs/layout.hpp"
#include "cgs/visible_graph.hpp"

namespace cgs {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

inline std::string xml_escape(std::string_view in) {
  std::string out;
  for (const char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// level 1 large ring, level 2 medium, deeper levels small
inline double port_radius(int level) { return level <= 1 ? 5 : level == 2 ? 4 : 3; }

inline const char* node_fill(const VisibleGraph& vg, TreeIndex v) {
  const auto& tree = vg.tree();
  const auto* n = vg.node(v);
  if (n != nullptr && n->expanded) return "#f7f7f7";
  if (!tree.is_meta(v)) return tree[v].kind == NodeKind::Operation ? "#ffffff" : "#e8f0e0";
  if (n != nullptr && n->layer) {
    switch (*n->layer) {
      case LayerClass::CNNLayer: return "#fde2c8";
      case LayerClass::RNNLayer: return "#d9e8fb";
      case LayerClass::FCLayer: return "#e4dcf5";
      case LayerClass::NormalLayer: break;
    }
  }
  return "#dde6ee";
}

}  // namespace detail

inline std::string render_svg(const VisibleGraph& vg, const LayoutResult& lay, double scale = 1.0) {
  using detail::num;
  if (!(scale > 0)) throw Error(Errc::InvalidOption, "scale must be positive");
  const auto& tree = vg.tree();
  auto s = [&](double v) { return num(v * scale); };
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + s(lay.bounds.w) + "\" height=\"" + s(lay.bounds.h) +
         "\" viewBox=\"0 0 " + s(lay.bounds.w) + " " + s(lay.bounds.h) + "\" font-family=\"sans-serif\" font-size=\"" + s(10) + "\">\n";

  // pile echoes sit behind the representative
  for (const auto& [id, g] : lay.piles)
    for (auto it = g.echoes.rbegin(); it != g.echoes.rend(); ++it)
      out += "<rect class=\"echo\" x=\"" + s(it->x) + "\" y=\"" + s(it->y) + "\" width=\"" + s(it->w) + "\" height=\"" + s(it->h) +
             "\" fill=\"#eeeeee\" stroke=\"#999\"/>\n";

  for (const auto& [id, b] : lay.boxes) {
    const bool expanded = vg.node(id) != nullptr && vg.node(id)->expanded;
    out += "<g class=\"node\" data-id=\"" + detail::xml_escape(tree[id].path) + "\">";
    out += "<rect x=\"" + s(b.x) + "\" y=\"" + s(b.y) + "\" width=\"" + s(b.w) + "\" height=\"" + s(b.h) + "\" rx=\"" + s(3) +
           "\" fill=\"" + detail::node_fill(vg, id) + "\" stroke=\"#555\"/>";
    const double ty = expanded ? b.y + 11 : b.y + b.h / 2 + 3;
    out += "<text x=\"" + s(b.x + 4) + "\" y=\"" + s(ty) + "\">" + detail::xml_escape(tree[id].segment) + "</text>";
    out += "</g>\n";
  }

  for (const auto& [id, r] : lay.routes) {
    if (r.points.size() < 2) continue;
    const bool hidden = vg.edges()[id].hidden;
    std::string d = "M" + s(r.points.front().x) + " " + s(r.points.front().y);
    for (std::size_t k = 1; k + 1 < r.points.size(); ++k) {
      const auto& a = r.arcs[k - 1];
      d += " L" + s(a.from.x) + " " + s(a.from.y);
      d += " A" + s(a.radius) + " " + s(a.radius) + " 0 0 " + (a.clockwise ? "1" : "0") + " " + s(a.to.x) + " " + s(a.to.y);
    }
    d += " L" + s(r.points.back().x) + " " + s(r.points.back().y);
    const auto kind = vg.edges()[id].kind;
    const char* stroke = kind == EdgeKind::ModuleEdge ? "#2b6cb0" : "#444";
    out += "<path class=\"edge\" data-id=\"" + std::to_string(id) + "\" d=\"" + d + "\" fill=\"none\" stroke=\"" + stroke + "\"" +
           (hidden ? " visibility=\"hidden\"" : "") + "/>\n";
  }

  for (const auto& [id, p] : lay.port_anchors) {
    const auto& port = vg.ports()[id];
    out += "<circle class=\"port\" data-id=\"" + std::to_string(id) + "\" cx=\"" + s(p.x) + "\" cy=\"" + s(p.y) + "\" r=\"" +
           s(detail::port_radius(port.level)) + "\" fill=\"" + (port.kind == PortKind::Module ? "#ffffff" : "#555") +
           "\" stroke=\"#333\"/>\n";
  }

  for (const auto& b : lay.badges) {
    const double dx = b.kind == NodeKind::Constant ? 2 + 8 * b.slot : -10 - 8 * b.slot;
    out += "<rect class=\"badge\" x=\"" + s(b.anchor.x + dx) + "\" y=\"" + s(b.anchor.y - 8) + "\" width=\"" + s(8) + "\" height=\"" +
           s(6) + "\" fill=\"" + (b.kind == NodeKind::Constant ? "#9ae6b4" : "#fbd38d") + "\"/>\n";
  }

  for (const auto& [id, g] : lay.piles)
    out += "<text class=\"repeat\" x=\"" + s(g.badge.x) + "\" y=\"" + s(g.badge.y) + "\" text-anchor=\"end\">x" +
           std::to_string(vg.piles[id].repeat()) + "</text>\n";

  out += "</svg>\n";
  return out;
}

}  // namespace cgs
