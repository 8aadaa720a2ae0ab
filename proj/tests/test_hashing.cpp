#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cgs/hashing.hpp"
#include "oracles.hpp"

namespace {

TEST(Djb, KnownValues) {
  EXPECT_EQ(cgs::djb(""), 5381u);
  EXPECT_EQ(cgs::djb("a"), 177670u);
  // 177670 * 33 + 98
  EXPECT_EQ(cgs::djb("ab"), 5863208u);
  static_assert(cgs::djb("a") == 5381u * 33u + 97u);
}

TEST(Djb, MatchesOracleOnLongStrings) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::string s(static_cast<std::size_t>(rng() % 64), ' ');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    EXPECT_EQ(cgs::djb(s), oracle::djb(s));
  }
}

TEST(NodeHash, IsolatedNode) {
  cgs::NodeHashInput n;
  n.type = "ReLU";
  n.parent = "M";
  const auto expected = oracle::sum_mod({"t:ReLU", "p:M", "in:0", "out:0", "aux:0"});
  EXPECT_EQ(cgs::node_hash(n).value, expected);
}

TEST(NodeHash, NeighborsSortedIntoOneString) {
  cgs::NodeHashInput n;
  n.type = "Add";
  n.parent = "blk";
  n.neighbor_types = {"Relu", "Conv"};
  n.indegree = 2;
  const auto expected = oracle::sum_mod({"t:Add", "nbr:Conv,Relu", "p:blk", "in:2", "out:0", "aux:0"});
  EXPECT_EQ(cgs::node_hash(n).value, expected);
  std::swap(n.neighbor_types[0], n.neighbor_types[1]);
  EXPECT_EQ(cgs::node_hash(n).value, expected);
}

TEST(NodeHash, EqualInputsEqualHash) {
  cgs::NodeHashInput a{"Conv2D", {"Relu"}, "x", 0, 1, 2};
  cgs::NodeHashInput b = a;
  EXPECT_EQ(cgs::node_hash(a), cgs::node_hash(b));
}

TEST(NodeHash, AttachmentsChangeHash) {
  cgs::NodeHashInput a{"MatMul", {}, "fc", 1, 1, 0};
  cgs::NodeHashInput b = a;
  b.auxiliary = 1;
  EXPECT_EQ(cgs::node_hash(a).value, oracle::sum_mod({"t:MatMul", "p:fc", "in:1", "out:1", "aux:0"}));
  EXPECT_EQ(cgs::node_hash(b).value, oracle::sum_mod({"t:MatMul", "p:fc", "in:1", "out:1", "aux:1"}));
  EXPECT_NE(cgs::node_hash(a), cgs::node_hash(b));
}

TEST(EdgeHash, DirectionMatters) {
  EXPECT_EQ(cgs::edge_string("A", "B"), "A\xE2\x86\x92" "B");
  EXPECT_EQ(cgs::edge_hash("A", "B").value, oracle::djb("A\xE2\x86\x92" "B") % 10000019);
  EXPECT_NE(cgs::edge_hash("A", "B"), cgs::edge_hash("B", "A"));
  EXPECT_EQ(cgs::edge_hash("ReLU", "ReLU"), cgs::edge_hash("ReLU", "ReLU"));
  EXPECT_EQ(cgs::edge_hash("SeqCell", "FCLayer").value, oracle::djb("SeqCell\xE2\x86\x92" "FCLayer") % 10000019);
}

TEST(SubgraphHash, EmptyIsZero) { EXPECT_EQ(cgs::subgraph_hash({}, {}).value, 0u); }

TEST(SubgraphHash, ExactSumModP) {
  // terms near P exercise the per-term reduction
  std::vector<cgs::Fingerprint> nodes{{10000018}, {10000018}, {5}}, edges{{10000000}};
  EXPECT_EQ(cgs::subgraph_hash(nodes, edges).value, oracle::sum_values_mod({10000018, 10000018, 5, 10000000}));
}

TEST(SubgraphHash, PermutationInvariant) {
  std::vector<cgs::Fingerprint> nodes, edges;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 12; ++i) nodes.push_back({rng() % 10000019});
  for (int i = 0; i < 7; ++i) edges.push_back({rng() % 10000019});
  const auto h = cgs::subgraph_hash(nodes, edges);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(nodes.begin(), nodes.end(), rng);
    std::shuffle(edges.begin(), edges.end(), rng);
    EXPECT_EQ(cgs::subgraph_hash(nodes, edges), h);
  }
}

TEST(SubgraphHash, TwoChainCopiesAgree) {
  // Conv -> Relu -> Pool under parent "blk", built twice from scratch
  auto chain = [] {
    std::vector<cgs::NodeHashInput> n{{"Conv", {"Relu"}, "blk", 0, 1, 1}, {"Relu", {"Conv", "Pool"}, "blk", 1, 1, 0}, {"Pool", {"Relu"}, "blk", 1, 0, 0}};
    std::vector<cgs::Fingerprint> nh, eh;
    for (const auto& x : n) nh.push_back(cgs::node_hash(x));
    eh.push_back(cgs::edge_hash("Conv", "Relu"));
    eh.push_back(cgs::edge_hash("Relu", "Pool"));
    return cgs::subgraph_hash(nh, eh);
  };
  const auto expected = oracle::sum_values_mod({
      oracle::sum_mod({"t:Conv", "nbr:Relu", "p:blk", "in:0", "out:1", "aux:1"}),
      oracle::sum_mod({"t:Relu", "nbr:Conv,Pool", "p:blk", "in:1", "out:1", "aux:0"}),
      oracle::sum_mod({"t:Pool", "nbr:Relu", "p:blk", "in:1", "out:0", "aux:0"}),
      oracle::djb("Conv\xE2\x86\x92Relu") % 10000019,
      oracle::djb("Relu\xE2\x86\x92Pool") % 10000019,
  });
  EXPECT_EQ(chain().value, expected);
  EXPECT_EQ(chain(), chain());
}

}  // namespace
