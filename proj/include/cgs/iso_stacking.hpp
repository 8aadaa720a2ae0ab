#pragma once

// Isomorphic sibling subgraph detection.
//
// Works on the graph of one expanded parent's visible children. Three kinds
// of repeated branches are searched, in this order:
//   1. branches leaving a shared source and all entering one shared target,
//   2. branches leaving a shared source with no target,
//   3. branches entering a shared target with no source.
// A branch of source s through successor x is the set of nodes reachable
// from x (without passing s) that no other successor of s reaches; it must
// be entered only from s and left only toward a single target. Branches
// with the same anchors are grouped when both their fingerprint and their
// structural checksum agree.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cgs/hashing.hpp"

namespace cgs {

inline constexpr int kDefaultMinRepeat = 2;

struct ScopeNode {
  std::string type;
  int auxiliary = 0;
  std::string signature;  // extra structure folded into the checksum (e.g. expanded contents)
};

struct ScopeGraph {
  std::string parent;  // parent id used in node hashes
  std::vector<ScopeNode> nodes;
  std::vector<std::pair<int, int>> edges;  // deduplicated, no self loops
};

struct StructuralChecksum {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::vector<std::string> types;       // sorted
  std::vector<std::string> signatures;  // sorted

  friend auto operator<=>(const StructuralChecksum&, const StructuralChecksum&) = default;
  friend bool operator==(const StructuralChecksum&, const StructuralChecksum&) = default;
};

struct IsoGroup {
  int category = 1;
  std::optional<int> source;
  std::optional<int> target;
  std::vector<std::vector<int>> members;  // each sorted ascending; members ordered by first node
  Fingerprint fingerprint;
  StructuralChecksum checksum;
};

namespace detail {

struct ScopeAdjacency {
  std::vector<std::vector<int>> out, in;

  explicit ScopeAdjacency(const ScopeGraph& g) : out(g.nodes.size()), in(g.nodes.size()) {
    for (const auto& [s, d] : g.edges) {
      out[static_cast<std::size_t>(s)].push_back(d);
      in[static_cast<std::size_t>(d)].push_back(s);
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
    for (auto& v : in) std::sort(v.begin(), v.end());
  }
};

}  // namespace detail

/// Fingerprint of a candidate member: nodes hashed with their degrees and
/// neighbor types restricted to the member plus its anchors; edges are the
/// member's internal edges.
inline Fingerprint member_fingerprint(const ScopeGraph& g, const std::vector<int>& member, std::optional<int> source,
                                      std::optional<int> target) {
  std::set<int> inside(member.begin(), member.end());
  std::set<int> context = inside;
  if (source) context.insert(*source);
  if (target) context.insert(*target);

  std::map<int, NodeHashInput> input;
  for (const int v : member) {
    auto& n = input[v];
    n.type = g.nodes[static_cast<std::size_t>(v)].type;
    n.parent = g.parent;
    n.auxiliary = g.nodes[static_cast<std::size_t>(v)].auxiliary;
  }
  std::vector<Fingerprint> edge_hashes;
  for (const auto& [s, d] : g.edges) {
    const bool s_in = inside.contains(s), d_in = inside.contains(d);
    if (!(s_in || d_in) || !context.contains(s) || !context.contains(d)) continue;
    if (s_in) {
      ++input[s].outdegree;
      input[s].neighbor_types.push_back(g.nodes[static_cast<std::size_t>(d)].type);
    }
    if (d_in) {
      ++input[d].indegree;
      input[d].neighbor_types.push_back(g.nodes[static_cast<std::size_t>(s)].type);
    }
    if (s_in && d_in)
      edge_hashes.push_back(edge_hash(g.nodes[static_cast<std::size_t>(s)].type, g.nodes[static_cast<std::size_t>(d)].type));
  }
  std::vector<Fingerprint> node_hashes;
  for (const auto& [v, n] : input) node_hashes.push_back(node_hash(n));
  return subgraph_hash(node_hashes, edge_hashes);
}

inline StructuralChecksum member_checksum(const ScopeGraph& g, const std::vector<int>& member) {
  std::set<int> inside(member.begin(), member.end());
  StructuralChecksum c;
  c.nodes = member.size();
  for (const auto& [s, d] : g.edges)
    if (inside.contains(s) && inside.contains(d)) ++c.edges;
  for (const int v : member) {
    c.types.push_back(g.nodes[static_cast<std::size_t>(v)].type);
    c.signatures.push_back(g.nodes[static_cast<std::size_t>(v)].signature);
  }
  std::sort(c.types.begin(), c.types.end());
  std::sort(c.signatures.begin(), c.signatures.end());
  return c;
}

inline std::vector<IsoGroup> detect_iso_groups(const ScopeGraph& g) {
  const std::size_t n = g.nodes.size();
  const detail::ScopeAdjacency adj(g);
  std::vector<bool> used(n, false), anchor(n, false);
  std::vector<IsoGroup> groups;

  struct Candidate {
    std::vector<int> member;
    std::optional<int> source, target;
  };

  // Private regions of each start node, traversing `next` and never entering
  // `blocked` or used nodes. Returns one region per start (empty if the
  // start itself is shared).
  auto private_regions = [&](const std::vector<int>& starts, int blocked, const std::vector<std::vector<int>>& next) {
    std::vector<int> owner(n, -1);  // -1 unseen, -2 shared, else start slot
    std::vector<int> stamp(n, -1);
    std::vector<std::vector<int>> reached(starts.size());
    for (std::size_t k = 0; k < starts.size(); ++k) {
      std::vector<int> stack{starts[k]};
      stamp[static_cast<std::size_t>(starts[k])] = static_cast<int>(k);
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        reached[k].push_back(v);
        auto& o = owner[static_cast<std::size_t>(v)];
        o = o == -1 ? static_cast<int>(k) : -2;
        for (const int w : next[static_cast<std::size_t>(v)]) {
          if (w == blocked || used[static_cast<std::size_t>(w)] || stamp[static_cast<std::size_t>(w)] == static_cast<int>(k)) continue;
          stamp[static_cast<std::size_t>(w)] = static_cast<int>(k);
          stack.push_back(w);
        }
      }
    }
    std::vector<std::vector<int>> regions(starts.size());
    for (std::size_t k = 0; k < starts.size(); ++k) {
      if (owner[static_cast<std::size_t>(starts[k])] != static_cast<int>(k)) continue;
      for (const int v : reached[k])
        if (owner[static_cast<std::size_t>(v)] == static_cast<int>(k)) regions[k].push_back(v);
      std::sort(regions[k].begin(), regions[k].end());
    }
    return regions;
  };

  // Checks that `member` is entered only from `entry_anchor` (or not at all
  // when nullopt) along `in`, and left only toward at most one node along
  // `out`. Returns {ok, exit node}.
  auto closed = [&](const std::vector<int>& member, std::optional<int> entry_anchor, const std::vector<std::vector<int>>& in,
                    const std::vector<std::vector<int>>& out) -> std::pair<bool, std::optional<int>> {
    std::set<int> inside(member.begin(), member.end());
    std::optional<int> exit;
    for (const int v : member) {
      if (used[static_cast<std::size_t>(v)] || anchor[static_cast<std::size_t>(v)]) return {false, std::nullopt};
      for (const int u : in[static_cast<std::size_t>(v)])
        if (!inside.contains(u) && (!entry_anchor || u != *entry_anchor)) return {false, std::nullopt};
      for (const int w : out[static_cast<std::size_t>(v)]) {
        if (inside.contains(w)) continue;
        if (entry_anchor && w == *entry_anchor) return {false, std::nullopt};
        if (exit && *exit != w) return {false, std::nullopt};
        exit = w;
      }
    }
    if (exit && used[static_cast<std::size_t>(*exit)]) return {false, std::nullopt};
    return {true, exit};
  };

  auto register_groups = [&](int category, std::vector<Candidate>& cands) {
    std::map<std::tuple<std::optional<int>, std::optional<int>, Fingerprint, StructuralChecksum>, std::vector<std::size_t>> buckets;
    std::vector<std::tuple<std::optional<int>, std::optional<int>, Fingerprint, StructuralChecksum>> order;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto& c = cands[i];
      auto key = std::make_tuple(c.source, c.target, member_fingerprint(g, c.member, c.source, c.target), member_checksum(g, c.member));
      auto [it, inserted] = buckets.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(i);
    }
    for (const auto& key : order) {
      const auto& idx = buckets[key];
      if (idx.size() < 2) continue;
      // a node may appear in candidates of different sources; keep the first claim
      std::vector<std::vector<int>> members;
      for (const auto i : idx) {
        const auto& m = cands[i].member;
        if (std::any_of(m.begin(), m.end(), [&](int v) { return used[static_cast<std::size_t>(v)]; })) continue;
        members.push_back(m);
        for (const int v : m) used[static_cast<std::size_t>(v)] = true;
      }
      if (members.size() < 2) {
        for (const auto& m : members)
          for (const int v : m) used[static_cast<std::size_t>(v)] = false;
        continue;
      }
      std::sort(members.begin(), members.end());
      IsoGroup grp;
      grp.category = category;
      grp.source = std::get<0>(key);
      grp.target = std::get<1>(key);
      grp.members = std::move(members);
      grp.fingerprint = std::get<2>(key);
      grp.checksum = std::get<3>(key);
      if (grp.source) anchor[static_cast<std::size_t>(*grp.source)] = true;
      if (grp.target) anchor[static_cast<std::size_t>(*grp.target)] = true;
      groups.push_back(std::move(grp));
    }
  };

  // Categories 1 and 2: anchored at a shared source.
  for (const int category : {1, 2}) {
    std::vector<Candidate> cands;
    for (std::size_t s = 0; s < n; ++s) {
      if (used[s]) continue;
      std::vector<int> succ;
      for (const int x : adj.out[s])
        if (!used[static_cast<std::size_t>(x)]) succ.push_back(x);
      if (succ.size() < 2) continue;
      const auto regions = private_regions(succ, static_cast<int>(s), adj.out);
      for (const auto& region : regions) {
        if (region.empty()) continue;
        const auto [ok, exit] = closed(region, static_cast<int>(s), adj.in, adj.out);
        if (!ok) continue;
        if ((category == 1) != exit.has_value()) continue;
        if (exit && *exit == static_cast<int>(s)) continue;
        cands.push_back({region, static_cast<int>(s), exit});
      }
    }
    register_groups(category, cands);
  }

  // Category 3: anchored at a shared target, no source.
  {
    std::vector<Candidate> cands;
    for (std::size_t t = 0; t < n; ++t) {
      if (used[t]) continue;
      std::vector<int> pred;
      for (const int x : adj.in[t])
        if (!used[static_cast<std::size_t>(x)]) pred.push_back(x);
      if (pred.size() < 2) continue;
      const auto regions = private_regions(pred, static_cast<int>(t), adj.in);
      for (const auto& region : regions) {
        if (region.empty()) continue;
        std::set<int> inside(region.begin(), region.end());
        bool ok = true;
        for (const int v : region) {
          if (used[static_cast<std::size_t>(v)] || anchor[static_cast<std::size_t>(v)]) ok = false;
          for (const int u : adj.in[static_cast<std::size_t>(v)])
            if (!inside.contains(u)) ok = false;
          for (const int w : adj.out[static_cast<std::size_t>(v)])
            if (!inside.contains(w) && w != static_cast<int>(t)) ok = false;
        }
        if (!ok) continue;
        cands.push_back({region, std::nullopt, static_cast<int>(t)});
      }
    }
    register_groups(3, cands);
  }
  return groups;
}

}  // namespace cgs
