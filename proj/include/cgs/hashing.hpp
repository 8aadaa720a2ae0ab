#pragma once

// Subgraph fingerprints. Every string is hashed with djb2 (h = h * 33 + b,
// 64-bit wraparound, seed 5381); node, edge and subgraph hashes are sums of
// such values reduced modulo the prime 10000019.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cgs {

inline constexpr std::uint64_t kHashPrime = 10000019;

struct Fingerprint {
  std::uint64_t value = 0;

  friend auto operator<=>(const Fingerprint&, const Fingerprint&) = default;
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

constexpr std::uint64_t djb(std::string_view s) {
  std::uint64_t h = 5381;
  for (const char c : s) h = h * 33 + static_cast<unsigned char>(c);
  return h;
}

/// Sum of djb values of `strings`, mod P. Each term is reduced first so the
/// sum equals the exact integer sum taken mod P.
inline Fingerprint hash_strings(std::span<const std::string> strings) {
  std::uint64_t acc = 0;
  for (const auto& s : strings) acc = (acc + djb(s) % kHashPrime) % kHashPrime;
  return {acc};
}

struct NodeHashInput {
  std::string type;
  std::vector<std::string> neighbor_types;
  std::string parent;
  int indegree = 0;
  int outdegree = 0;
  int auxiliary = 0;  // attached Constant + Parameter nodes
};

/// The key-prefixed string set hashed for a node. Neighbor types are sorted
/// and joined into one "nbr:" entry, omitted when there are none.
inline std::vector<std::string> node_strings(const NodeHashInput& n) {
  std::vector<std::string> s;
  s.push_back("t:" + n.type);
  if (!n.neighbor_types.empty()) {
    auto nbr = n.neighbor_types;
    std::sort(nbr.begin(), nbr.end());
    std::string joined = "nbr:";
    for (std::size_t i = 0; i < nbr.size(); ++i) {
      if (i > 0) joined += ',';
      joined += nbr[i];
    }
    s.push_back(std::move(joined));
  }
  s.push_back("p:" + n.parent);
  s.push_back("in:" + std::to_string(n.indegree));
  s.push_back("out:" + std::to_string(n.outdegree));
  s.push_back("aux:" + std::to_string(n.auxiliary));
  return s;
}

inline Fingerprint node_hash(const NodeHashInput& n) { return hash_strings(node_strings(n)); }

inline std::string edge_string(std::string_view src_type, std::string_view dst_type) {
  return std::string(src_type) + "→" + std::string(dst_type);
}

inline Fingerprint edge_hash(std::string_view src_type, std::string_view dst_type) {
  return {djb(edge_string(src_type, dst_type)) % kHashPrime};
}

inline Fingerprint subgraph_hash(std::span<const Fingerprint> nodes, std::span<const Fingerprint> edges) {
  std::uint64_t acc = 0;
  for (const auto& h : nodes) acc = (acc + h.value) % kHashPrime;
  for (const auto& h : edges) acc = (acc + h.value) % kHashPrime;
  return {acc};
}

}  // namespace cgs
