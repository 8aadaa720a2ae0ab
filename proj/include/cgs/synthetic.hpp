#pragma once

// Synthetic graph generators: k copies of a template block wired between
// shared endpoints, ResNet-like multi-family corpora, and random layered
// DAGs with namespace hierarchies.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cgs/error.hpp"
#include "cgs/graph_model.hpp"

namespace cgs {

struct BlockOp {
  std::string name;  // relative path inside the block, may contain '/'
  std::string op_type;
  int constants = 0;
  int parameters = 0;
};

struct BlockTemplate {
  std::vector<BlockOp> ops;
  std::vector<std::pair<int, int>> edges;  // indices into ops
  int entry = 0;
  int exit = 0;
};

enum class Wiring { Chain, ParallelSameEndpoints, FanOut, FanIn };

struct SyntheticSpec {
  std::string name = "synthetic";
  BlockTemplate block;
  int repeats = 1;
  Wiring wiring = Wiring::ParallelSameEndpoints;
  std::vector<std::string> scope = {"net"};  // namespace of the copies and endpoints
  std::string block_name = "Block";
};

/// Number of data nodes a template contributes per copy.
inline std::size_t data_nodes_per_block(const BlockTemplate& b) {
  std::size_t n = 0;
  for (const auto& op : b.ops) n += static_cast<std::size_t>(op.constants + op.parameters);
  return n;
}

namespace detail {

inline void validate(const SyntheticSpec& spec) {
  const auto& b = spec.block;
  if (spec.repeats < 1) throw Error(Errc::InvalidSpec, "repeats must be >= 1");
  if (b.ops.empty()) throw Error(Errc::InvalidSpec, "block has no operations");
  if (spec.scope.empty()) throw Error(Errc::InvalidSpec, "namespace depth must be >= 1");
  const auto n = static_cast<int>(b.ops.size());
  if (b.entry < 0 || b.entry >= n || b.exit < 0 || b.exit >= n) throw Error(Errc::InvalidSpec, "entry/exit out of range");
  std::set<std::string> names;
  for (const auto& op : b.ops) {
    if (op.op_type.empty()) throw Error(Errc::InvalidSpec, "op without type: " + op.name);
    if (op.constants < 0 || op.parameters < 0) throw Error(Errc::InvalidSpec, "negative data count: " + op.name);
    if (!names.insert(op.name).second) throw Error(Errc::InvalidSpec, "duplicate op name: " + op.name);
  }
  for (const auto& [s, d] : b.edges)
    if (s < 0 || s >= n || d < 0 || d >= n || s == d) throw Error(Errc::InvalidSpec, "bad block edge");
}

}  // namespace detail

/// Appends the nodes and edges of `spec` to `g`; returns the raw names of
/// the (source, sink) endpoints, empty strings when the wiring has none.
inline std::pair<std::string, std::string> append_synthetic(RawGraph& g, const SyntheticSpec& spec) {
  detail::validate(spec);
  const std::string prefix = join_path(spec.scope);
  const bool has_source = spec.wiring != Wiring::FanIn;
  const bool has_sink = spec.wiring != Wiring::FanOut;
  const std::string source = prefix + "/source";
  const std::string sink = prefix + "/sink";
  if (has_source) g.nodes.push_back({source, NodeKind::Operation, "Input", {}});
  if (has_sink) g.nodes.push_back({sink, NodeKind::Operation, "Output", {}});

  const auto& b = spec.block;
  std::string prev_exit = has_source ? source : std::string();
  for (int k = 0; k < spec.repeats; ++k) {
    const std::string copy = prefix + "/" + std::to_string(k) + "_" + spec.block_name + "/";
    for (const auto& op : b.ops) {
      const std::string name = copy + op.name;
      g.nodes.push_back({name, NodeKind::Operation, op.op_type, {}});
      for (int c = 0; c < op.constants; ++c) {
        g.nodes.push_back({name + "_const" + std::to_string(c), NodeKind::Constant, "", {}});
        g.edges.push_back({name + "_const" + std::to_string(c), name});
      }
      for (int p = 0; p < op.parameters; ++p) {
        g.nodes.push_back({name + "_param" + std::to_string(p), NodeKind::Parameter, "", {}});
        g.edges.push_back({name + "_param" + std::to_string(p), name});
      }
    }
    for (const auto& [s, d] : b.edges) g.edges.push_back({copy + b.ops[s].name, copy + b.ops[d].name});
    const std::string entry = copy + b.ops[b.entry].name;
    const std::string exit = copy + b.ops[b.exit].name;
    switch (spec.wiring) {
      case Wiring::Chain:
        g.edges.push_back({prev_exit, entry});
        prev_exit = exit;
        break;
      case Wiring::ParallelSameEndpoints:
        g.edges.push_back({source, entry});
        g.edges.push_back({exit, sink});
        break;
      case Wiring::FanOut:
        g.edges.push_back({source, entry});
        break;
      case Wiring::FanIn:
        g.edges.push_back({exit, sink});
        break;
    }
  }
  if (spec.wiring == Wiring::Chain) g.edges.push_back({prev_exit, sink});
  return {has_source ? source : std::string(), has_sink ? sink : std::string()};
}

inline RawGraph generate_synthetic(const SyntheticSpec& spec) {
  RawGraph g;
  g.name = spec.name;
  append_synthetic(g, spec);
  return g;
}

/// A linear chain of `n` ops named "<prefix>/<i>" with the given types cycled.
inline BlockTemplate chain_block(int n, const std::vector<std::string>& types) {
  BlockTemplate b;
  for (int i = 0; i < n; ++i) {
    b.ops.push_back({"op" + std::to_string(i), types[static_cast<std::size_t>(i) % types.size()]});
    if (i > 0) b.edges.emplace_back(i - 1, i);
  }
  b.entry = 0;
  b.exit = n - 1;
  return b;
}

/// Bottleneck-style residual block: an entry op fanning out to a main path
/// and a shortcut path of three units each, merged by Add then ReLU. Each
/// unit is a namespace holding `unit_ops` chained ops; the first op of each
/// unit carries one parameter.
inline BlockTemplate bottleneck_block(int unit_ops = 10) {
  static const std::vector<std::string> kUnitTypes = {"Conv2D", "BiasAdd", "BatchNorm", "Mul",     "Add",
                                                      "ReLU",   "Cast",    "Reshape",   "Transpose", "Identity"};
  BlockTemplate b;
  b.ops.push_back({"in", "Identity"});
  const char* units[] = {"conv1", "conv2", "conv3", "ds1", "ds2", "ds3"};
  std::vector<std::pair<int, int>> unit_range;
  for (const char* u : units) {
    const int first = static_cast<int>(b.ops.size());
    for (int i = 0; i < unit_ops; ++i) {
      b.ops.push_back({std::string(u) + "/" + kUnitTypes[static_cast<std::size_t>(i) % kUnitTypes.size()] + "-op" +
                           std::to_string(i),
                       kUnitTypes[static_cast<std::size_t>(i) % kUnitTypes.size()], 0, i == 0 ? 1 : 0});
      if (i > 0) b.edges.emplace_back(first + i - 1, first + i);
    }
    unit_range.emplace_back(first, first + unit_ops - 1);
  }
  const int add = static_cast<int>(b.ops.size());
  b.ops.push_back({"add", "Add"});
  const int relu = static_cast<int>(b.ops.size());
  b.ops.push_back({"relu", "ReLU"});
  // main path: in -> conv1 -> conv2 -> conv3 -> add; shortcut: in -> ds1 -> ds2 -> ds3 -> add
  for (int path = 0; path < 2; ++path) {
    b.edges.emplace_back(0, unit_range[static_cast<std::size_t>(path * 3)].first);
    for (int k = 0; k < 2; ++k)
      b.edges.emplace_back(unit_range[static_cast<std::size_t>(path * 3 + k)].second,
                           unit_range[static_cast<std::size_t>(path * 3 + k + 1)].first);
    b.edges.emplace_back(unit_range[static_cast<std::size_t>(path * 3 + 2)].second, add);
  }
  b.edges.emplace_back(add, relu);
  b.entry = 0;
  b.exit = relu;
  return b;
}

/// ResNet-like corpus: one top-level family "layer<i>" per entry of
/// `repeats`, each holding repeats[i] parallel bottleneck blocks between a
/// shared source and sink; family i's sink feeds family i+1's source.
inline RawGraph resnet_like(const std::vector<int>& repeats = {3, 4, 6, 3}, int unit_ops = 10) {
  if (repeats.empty()) throw Error(Errc::InvalidSpec, "no families");
  RawGraph g;
  g.name = "resnet_like";
  std::string prev_sink;
  for (std::size_t i = 0; i < repeats.size(); ++i) {
    SyntheticSpec spec;
    spec.block = bottleneck_block(unit_ops);
    spec.repeats = repeats[i];
    spec.wiring = Wiring::ParallelSameEndpoints;
    spec.scope = {"layer" + std::to_string(i + 1)};
    spec.block_name = "Bottleneck";
    const auto [source, sink] = append_synthetic(g, spec);
    if (!prev_sink.empty()) g.edges.push_back({prev_sink, source});
    prev_sink = sink;
  }
  return g;
}

/// Random layered DAG over `leaves` ops whose namespaces group contiguous
/// runs of the topological order into top-level metanodes (with nested
/// sub-scopes), then move up to `moved` leaves into a neighbouring group,
/// which is how grouping introduces false cycles.
inline RawGraph random_hierarchical_dag(std::uint64_t seed, int leaves, int groups, int moved) {
  if (leaves < 2 || groups < 1 || groups > leaves) throw Error(Errc::InvalidSpec, "bad random graph parameters");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static const std::vector<std::string> kTypes = {"Conv2D", "MatMul", "Add", "Mul", "ReLU", "BiasAdd", "Reshape"};

  std::vector<int> cuts;
  for (int i = 1; i < leaves; ++i) cuts.push_back(i);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(static_cast<std::size_t>(groups - 1));
  std::sort(cuts.begin(), cuts.end());

  std::vector<int> group(static_cast<std::size_t>(leaves));
  for (int i = 0, gidx = 0; i < leaves; ++i) {
    while (gidx < static_cast<int>(cuts.size()) && i >= cuts[static_cast<std::size_t>(gidx)]) ++gidx;
    group[static_cast<std::size_t>(i)] = gidx;
  }
  for (int m = 0; m < moved && groups > 1; ++m) {
    const int i = uniform(0, leaves - 1);
    int& gi = group[static_cast<std::size_t>(i)];
    gi = gi == 0 ? 1 : (gi == groups - 1 ? gi - 1 : gi + (uniform(0, 1) == 0 ? -1 : 1));
  }

  RawGraph g;
  g.name = "random_" + std::to_string(seed);
  std::vector<std::string> names(static_cast<std::size_t>(leaves));
  std::vector<int> pos_in_group(static_cast<std::size_t>(groups), 0);
  const int sub_size = uniform(2, 6);
  for (int i = 0; i < leaves; ++i) {
    const int gi = group[static_cast<std::size_t>(i)];
    const int sub = pos_in_group[static_cast<std::size_t>(gi)]++ / sub_size;
    const auto& type = kTypes[static_cast<std::size_t>(uniform(0, static_cast<int>(kTypes.size()) - 1))];
    names[static_cast<std::size_t>(i)] =
        "G" + std::to_string(gi) + "/sub" + std::to_string(sub) + "/" + type + "-op" + std::to_string(i);
    g.nodes.push_back({names[static_cast<std::size_t>(i)], NodeKind::Operation, type, {}});
  }
  for (int i = 1; i < leaves; ++i) {
    const int preds = uniform(1, 2);
    std::set<int> chosen;
    for (int p = 0; p < preds; ++p) chosen.insert(uniform(std::max(0, i - 8), i - 1));
    for (const int p : chosen) g.edges.push_back({names[static_cast<std::size_t>(p)], names[static_cast<std::size_t>(i)]});
  }
  return g;
}

}  // namespace cgs
