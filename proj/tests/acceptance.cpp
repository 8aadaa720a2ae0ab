// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "cgs/concept_graph.hpp"
#include "cgs/layout.hpp"
#include "cgs/serialize.hpp"
#include "cgs/svg.hpp"
#include "cgs/synthetic.hpp"
#include "layout_checks.hpp"
#include "oracles.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::shared_ptr<const cgs::ProcessedGraph> shared(cgs::ProcessedGraph pg) { return std::make_shared<const cgs::ProcessedGraph>(std::move(pg)); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Cycle removal on the cycle fixture and 500 random hierarchical DAGs.
Verdict cycles() {
  std::ostringstream d;
  const auto fixture = oracle::load("cycle");
  const auto [fx, frep] = cgs::detect_and_split_cycles(*fixture);
  const auto [fn, fe] = oracle::top_level_graph(fx);
  const bool fixture_ok = oracle::acyclic(fn, fe) && frep.residual_cycles == 0;

  int ok = 0, honest = 0;
  double worst = 0;
  const int n = 500;
  for (int s = 0; s < n; ++s) {
    const auto raw = cgs::random_hierarchical_dag(static_cast<std::uint64_t>(s), 20 + s % 181, 2 + s % 6, 1 + s % 5);
    const auto pg = cgs::build_hierarchy(raw);
    const auto start = Clock::now();
    const auto [out, report] = cgs::detect_and_split_cycles(pg);
    worst = std::max(worst, seconds_since(start));
    const auto [an, ae] = oracle::top_level_graph(out);
    const bool acyclic = oracle::acyclic(an, ae);
    ok += acyclic && report.passes <= 2;
    honest += acyclic == (report.residual_cycles == 0);
  }
  d << "fixture " << (fixture_ok ? "acyclic" : "CYCLIC") << ", " << ok << "/" << n << " acyclic, " << honest << "/" << n
    << " residuals reported, worst " << worst * 1000 << " ms";
  return {fixture_ok && ok * 100 >= n * 99 && honest == n && worst < 0.05, d.str()};
}

// Frontier node holding each leaf, by path prefix.
std::map<std::string, std::string> owner_of(const cgs::RawGraph& raw, const std::set<std::string>& frontier) {
  std::map<std::string, std::string> out;
  for (const auto& n : raw.nodes)
    for (std::string p = n.name;; p = p.substr(0, p.rfind('/'))) {
      if (frontier.contains(p)) {
        out[n.name] = p;
        break;
      }
      if (p.find('/') == std::string::npos) break;
    }
  return out;
}

std::map<std::string, std::set<std::string>> closure(const std::map<std::string, std::set<std::string>>& adj, const std::set<std::string>& nodes) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& s : nodes) {
    auto& seen = out[s];
    std::deque<std::string> q{s};
    while (!q.empty()) {
      const auto v = q.front();
      q.pop_front();
      if (const auto it = adj.find(v); it != adj.end())
        for (const auto& w : it->second)
          if (seen.insert(w).second) q.push_back(w);
    }
  }
  return out;
}

// Contributors equal the leaf edges that cross frontier nodes, and the
// lifted graph has exactly the reachability of the leaf graph quotient.
Verdict pruning() {
  std::size_t configs = 0, bad = 0;
  std::string first;
  for (const auto& name : oracle::fixture_names()) {
    const auto pg = oracle::load(name);
    const auto raw = cgs::to_raw(*pg);
    for (const long long threshold : {1LL, 3LL, 20LL, static_cast<long long>(cgs::kDefaultModuleThreshold)}) {
      const auto modules = cgs::recognize_modules(pg->tree, threshold);
      for (int depth = 0; depth <= 5; ++depth) {
        ++configs;
        const auto expanded = cgs::resolve_expansion(pg->tree, cgs::expansion_to_depth(pg->tree, depth));
        const auto fr = cgs::compute_frontier(pg->tree, expanded).frontier;
        const auto p = cgs::prune_edges(*pg, fr, modules);
        std::set<std::string> frontier;
        for (const auto v : fr) frontier.insert(pg->tree[v].path);
        const auto owner = owner_of(raw, frontier);

        // multiset of leaf edges between distinct frontier nodes
        std::multiset<std::pair<std::string, std::string>> expected, got;
        std::map<std::string, std::set<std::string>> leaf_quotient, lifted;
        // data nodes are attachments, only operation edges are pruned
        std::set<std::string> data;
        for (const auto& n : raw.nodes)
          if (n.kind != cgs::NodeKind::Operation) data.insert(n.name);
        for (const auto& e : raw.edges) {
          if (data.contains(e.src)) continue;
          const auto &a = owner.at(e.src), &b = owner.at(e.dst);
          if (a == b) continue;
          expected.insert({e.src, e.dst});
          leaf_quotient[a].insert(b);
        }
        for (const auto& [le, chain] : p.chains) {
          if (chain.empty()) continue;
          got.insert({pg->tree[le.src].path, pg->tree[le.dst].path});
          const auto& head = p.edges[chain.front()];
          const auto& tail = p.edges[chain.back()];
          lifted[pg->tree[head.src.node].path].insert(pg->tree[tail.dst.node].path);
          bool linked = true;
          for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            linked &= p.edges[chain[i]].dst == p.edges[chain[i + 1]].src;
          for (const auto id : chain) {
            const auto& c = p.edges[id].contributors;
            linked &= std::count(c.begin(), c.end(), le) == 1;
          }
          if (!linked) {
            ++bad;
            if (first.empty()) first = name + ": broken chain";
          }
        }
        std::multiset<std::pair<std::string, std::string>> listed;
        for (const auto& e : p.edges)
          for (const auto& c : e.contributors) listed.insert({pg->tree[c.src].path, pg->tree[c.dst].path});
        std::set<std::pair<std::string, std::string>> listed_set(listed.begin(), listed.end()), expected_set(expected.begin(), expected.end());
        const bool conserved = got == expected && listed_set == expected_set;
        const bool reach = frontier.size() > 300 || closure(lifted, frontier) == closure(leaf_quotient, frontier);
        if (!conserved || !reach) {
          ++bad;
          if (first.empty()) first = name + " d=" + std::to_string(depth) + (conserved ? " reachability" : " contributors");
        }
      }
    }
  }
  std::ostringstream d;
  d << configs << " fixture configurations, " << bad << " violations" << (first.empty() ? "" : ", first: " + first);
  return {bad == 0, d.str()};
}

// Scope graph of a container from leaf edges, every child treated as collapsed.
cgs::ScopeGraph scope_graph(const cgs::ProcessedGraph& pg, cgs::TreeIndex scope) {
  const auto& t = pg.tree;
  cgs::ScopeGraph g;
  g.parent = t[scope].path;
  std::map<cgs::TreeIndex, int> slot;
  for (const auto c : t[scope].children) {
    if (t[c].kind != cgs::NodeKind::Operation && t[c].kind != cgs::NodeKind::Meta) continue;
    slot[c] = static_cast<int>(g.nodes.size());
    g.nodes.push_back({cgs::type_string(t[c]), 0, ""});
  }
  std::set<std::pair<int, int>> edges;
  for (const auto& e : pg.leaf_edges) {
    const auto a = t.child_toward(scope, e.src), b = t.child_toward(scope, e.dst);
    if (!a || !b || *a == *b || !slot.contains(*a) || !slot.contains(*b)) continue;
    edges.insert({slot[*a], slot[*b]});
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

oracle::Labelled labelled(const cgs::ScopeGraph& g, std::optional<int> source, std::optional<int> target, const std::vector<int>& member) {
  oracle::Labelled l;
  std::map<int, int> id;
  for (const int v : member) {
    id[v] = static_cast<int>(l.labels.size());
    l.labels.push_back(g.nodes[static_cast<std::size_t>(v)].type);
  }
  if (source) {
    id[*source] = static_cast<int>(l.labels.size());
    l.labels.push_back("<source>");
  }
  if (target) {
    id[*target] = static_cast<int>(l.labels.size());
    l.labels.push_back("<target>");
  }
  for (const auto& [s, d] : g.edges)
    if (id.contains(s) && id.contains(d)) l.edges.insert({id[s], id[d]});
  return l;
}

// Every merge is a true isomorphism, and no two groups sharing anchors and
// category hold isomorphic members.
Verdict iso() {
  std::size_t scopes = 0, groups = 0, checked = 0, false_merges = 0, missed = 0;
  auto check = [&](const cgs::ScopeGraph& g) {
    ++scopes;
    const auto found = cgs::detect_iso_groups(g);
    for (const auto& grp : found) {
      ++groups;
      if (grp.members[0].size() + 2 > 8) continue;
      const auto base = labelled(g, grp.source, grp.target, grp.members[0]);
      for (const auto& m : grp.members) {
        ++checked;
        false_merges += !oracle::isomorphic(base, labelled(g, grp.source, grp.target, m));
      }
    }
    for (std::size_t i = 0; i < found.size(); ++i)
      for (std::size_t j = i + 1; j < found.size(); ++j) {
        const auto &a = found[i], &b = found[j];
        if (a.source != b.source || a.target != b.target || a.members[0].size() != b.members[0].size() || a.members[0].size() + 2 > 8) continue;
        missed += oracle::isomorphic(labelled(g, a.source, a.target, a.members[0]), labelled(g, b.source, b.target, b.members[0]));
      }
  };
  for (const auto& name : oracle::fixture_names()) {
    const auto pg = oracle::load(name);
    check(scope_graph(*pg, cgs::kRoot));
    for (const auto m : pg->tree.metanodes()) check(scope_graph(*pg, m));
  }
  // a hash collision between distinct types must be caught by the checksum
  std::map<std::uint64_t, std::string> by_residue;
  std::string t1, t2;
  for (int i = 0; t1.empty(); ++i) {
    const std::string name = "Op" + std::to_string(i);
    const auto [it, inserted] = by_residue.emplace(oracle::djb("t:" + name) % 10000019, name);
    if (!inserted) {
      t1 = it->second;
      t2 = name;
    }
  }
  cgs::ScopeGraph collide;
  collide.nodes = {{"S", 0, ""}, {"T", 0, ""}, {t1, 0, ""}, {t2, 0, ""}};
  collide.edges = {{0, 2}, {0, 3}, {2, 1}, {3, 1}};
  check(collide);
  const bool collision_caught = cgs::detect_iso_groups(collide).empty();

  std::ostringstream d;
  d << scopes << " scopes, " << groups << " groups, " << checked << " members checked, " << false_merges << " false merges, " << missed
    << " missed merges, collision " << t1 << "/" << t2 << (collision_caught ? " caught" : " MERGED");
  return {false_merges == 0 && missed == 0 && collision_caught, d.str()};
}

Verdict reduction() {
  const auto start = Clock::now();
  const auto raw = cgs::resnet_like();
  const auto pg = shared(cgs::build_hierarchy(cgs::parse_graph_file(cgs::emit_graph_file(cgs::canonical(raw)))));
  const auto rows = cgs::stats_by_depth(pg, {}, 3);
  const double t = seconds_since(start);
  std::size_t ops = 0;
  for (const auto& n : raw.nodes) ops += n.kind == cgs::NodeKind::Operation;
  const auto& r = rows.back();
  std::ostringstream d;
  d << ops << " operators, depth 3 " << r.raw_nodes + r.raw_edges << " -> " << r.vis_nodes + r.vis_edges << " elements, reduction "
    << cgs::format_pct(r.reduction_pct()) << "%, " << t << " s";
  return {ops >= 1000 && r.reduction_pct() >= 50 && t < 2, d.str()};
}

Verdict scale() {
  const auto text = cgs::emit_graph_file(cgs::canonical(cgs::random_hierarchical_dag(1, 10000, 20, 10)));
  const auto start = Clock::now();
  const auto pg = shared(cgs::build_hierarchy(cgs::parse_graph_file(text)));
  std::set<std::string> all;
  for (const auto m : pg->tree.metanodes()) all.insert(pg->tree[m].path);
  const auto vg = cgs::derive_visible(pg, all, {});
  const auto lay = cgs::layout_graph(vg);
  const double t = seconds_since(start);
  std::ostringstream d;
  d << pg->tree.size() - 1 << " nodes, " << pg->leaf_edges.size() << " edges, " << lay.boxes.size() << " boxes, " << t << " s";
  return {pg->tree.size() - 1 >= 10000 && t < 5, d.str()};
}

Verdict layout() {
  std::size_t layouts = 0, bad = 0, unstable = 0;
  std::string first;
  auto run = [&](const std::string& what, std::shared_ptr<const cgs::ProcessedGraph> pg, int depth, bool stacking) {
    cgs::SessionOptions o;
    o.stacking = stacking;
    const auto vg = cgs::derive_visible(pg, cgs::expansion_to_depth(pg->tree, depth), o);
    const auto lay = cgs::layout_graph(vg);
    ++layouts;
    const auto v = checks::layout_violations(vg, lay);
    if (!v.empty()) {
      ++bad;
      if (first.empty()) first = what + ": " + v.front();
    }
    unstable += !checks::same_geometry(lay, cgs::stable_relayout(lay, pg->tree, vg).layout);
  };
  for (const auto& name : oracle::fixture_names())
    for (int d = 0; d <= 5; ++d)
      for (const bool s : {true, false}) run(name, oracle::load(name), d, s);
  const auto resnet = shared(cgs::build_hierarchy(cgs::resnet_like()));
  for (int d = 1; d <= 4; ++d) run("resnet", resnet, d, true);
  std::ostringstream d;
  d << layouts << " layouts, " << bad << " with violations, " << unstable << " moved on unchanged relayout" << (first.empty() ? "" : ", first: " + first);
  return {bad == 0 && unstable == 0, d.str()};
}

std::string pipeline(const std::string& path) {
  const auto pg = shared(cgs::build_hierarchy(cgs::load_graph_file(path)));
  std::string out;
  for (const bool cgm : {false, true}) {
    cgs::SessionOptions o;
    o.cgm = cgm;
    cgs::Session s(pg, o);
    s.expand_to_depth(3);
    const auto vg = s.visible();
    out += cgs::visible_json(*vg).dump(2);
    out += cgs::render_svg(*vg, cgs::layout_graph(*vg));
    out += cgs::stats_csv(cgs::stats_by_depth(s.graph(), o, 4, s.layers()));
  }
  return out;
}

Verdict determinism() {
  std::size_t same = 0;
  for (const auto& name : oracle::fixture_names()) same += pipeline(oracle::fixture_path(name)) == pipeline(oracle::fixture_path(name));
  std::ostringstream d;
  d << same << "/" << oracle::fixture_names().size() << " fixtures byte-identical across runs";
  return {same == oracle::fixture_names().size(), d.str()};
}

Verdict paths() {
  std::size_t pairs = 0, wrong = 0;
  for (const auto& name : oracle::fixture_names()) {
    const auto pg = oracle::load(name);
    const auto raw = cgs::to_raw(*pg);
    const oracle::Reachability reach(raw);
    for (int d = 0; d <= 5; ++d) {
      const auto vg = cgs::derive_visible(pg, cgs::expansion_to_depth(pg->tree, d), {});
      std::vector<std::string> live;
      for (const auto& n : vg.nodes)
        if (!n.removed && !n.expanded) live.push_back(vg.tree()[n.id].path);
      for (const auto& a : live)
        for (const auto& b : live) {
          if (a == b) continue;
          ++pairs;
          wrong += cgs::find_path(vg, a, b).empty() == reach.reaches(oracle::leaves_under(raw, a), oracle::leaves_under(raw, b));
        }
    }
  }
  std::ostringstream d;
  d << pairs << " node pairs, " << wrong << " disagreements";
  return {wrong == 0, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"cycle-removal", cycles},         {"pruning-conservation", pruning}, {"hash-iso-oracle", iso}, {"element-reduction", reduction},
      {"scale-10k", scale},              {"layout-invariants", layout},     {"determinism", determinism}, {"path-finding", paths},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
