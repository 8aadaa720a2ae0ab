#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace cgs::algo {

using Adjacency = std::vector<std::vector<int>>;

/// Tarjan's strongly connected components, iterative. Returns the component
/// id of every vertex; ids are assigned in reverse topological order of the
/// condensation.
inline std::vector<int> strongly_connected(const Adjacency& adj, int* count = nullptr) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(adj.size(), -1), low(adj.size(), 0), comp(adj.size(), -1);
  std::vector<bool> on_stack(adj.size(), false);
  std::vector<int> stack;
  std::vector<std::pair<int, std::size_t>> call;
  int next_index = 0, next_comp = 0;
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, child] = call.back();
      const auto vs = static_cast<std::size_t>(v);
      if (child == 0 && index[vs] == -1) {
        index[vs] = low[vs] = next_index++;
        stack.push_back(v);
        on_stack[vs] = true;
      }
      if (child < adj[vs].size()) {
        const int w = adj[vs][child++];
        const auto ws = static_cast<std::size_t>(w);
        if (index[ws] == -1) {
          call.emplace_back(w, 0);
        } else if (on_stack[ws]) {
          low[vs] = std::min(low[vs], index[ws]);
        }
        continue;
      }
      if (low[vs] == index[vs]) {
        while (true) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = false;
          comp[static_cast<std::size_t>(w)] = next_comp;
          if (w == v) break;
        }
        ++next_comp;
      }
      const int finished = v;
      call.pop_back();
      if (!call.empty()) {
        const auto ps = static_cast<std::size_t>(call.back().first);
        low[ps] = std::min(low[ps], low[static_cast<std::size_t>(finished)]);
      }
    }
  }
  if (count != nullptr) *count = next_comp;
  return comp;
}

/// Sizes of SCCs with more than one vertex (self loops are not expected).
inline std::vector<std::vector<int>> cyclic_components(const Adjacency& adj) {
  int count = 0;
  const auto comp = strongly_connected(adj, &count);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(count));
  for (std::size_t v = 0; v < adj.size(); ++v) members[static_cast<std::size_t>(comp[v])].push_back(static_cast<int>(v));
  std::vector<std::vector<int>> out;
  for (auto& m : members)
    if (m.size() > 1) out.push_back(std::move(m));
  return out;
}

}  // namespace cgs::algo
