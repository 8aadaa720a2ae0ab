#include <gtest/gtest.h>

#include "cgs/ingest.hpp"
#include "cgs/synthetic.hpp"
#include "oracles.hpp"

namespace {

cgs::Error parse_error(std::string_view text) {
  try {
    (void)cgs::parse_graph_file(text);
  } catch (const cgs::Error& e) {
    return e;
  }
  ADD_FAILURE() << "parsed: " << text;
  return cgs::Error(cgs::Errc::InvalidSpec, "none");
}

TEST(Ingest, MinimalFile) {
  const auto g = cgs::parse_graph_file(
      R"({"format_version": "1", "name": "m", "nodes": [{"name": "x", "kind": "operation", "op_type": "Relu"}], "edges": []})");
  ASSERT_EQ(g.nodes.size(), 1u);
  EXPECT_EQ(g.nodes[0].op_type, "Relu");
  EXPECT_TRUE(g.edges.empty());
}

TEST(Ingest, MissingOpTypeIsSchemaError) {
  const auto e = parse_error(R"({"format_version": "1", "name": "m", "nodes": [{"name": "x", "kind": "operation"}], "edges": []})");
  EXPECT_EQ(e.code(), cgs::Errc::SchemaError);
  EXPECT_EQ(e.field(), "op_type");
}

TEST(Ingest, SchemaRejections) {
  EXPECT_EQ(parse_error(R"({"format_version": "2", "name": "m", "nodes": [], "edges": []})").code(), cgs::Errc::SchemaError);
  EXPECT_EQ(parse_error(R"({"format_version": "1", "name": "m", "nodes": [], "edges": [], "x": 1})").field(), "x");
  EXPECT_EQ(parse_error(R"({"format_version": "1", "name": "m", "nodes": [{"name": "c", "kind": "constant", "op_type": "C"}], "edges": []})").field(),
            "op_type");
  EXPECT_EQ(parse_error(R"({"format_version": "1", "name": "m", "nodes": [{"name": "c", "kind": "tensor"}], "edges": []})").code(),
            cgs::Errc::SchemaError);
  EXPECT_EQ(
      parse_error(R"({"format_version": "1", "name": "m", "nodes": [{"name": "a", "kind": "operation", "op_type": "A", "attrs": {"k": 1}}], "edges": []})")
          .field(),
      "attrs.k");
  EXPECT_EQ(parse_error(R"([])").code(), cgs::Errc::SchemaError);
}

TEST(Ingest, SyntaxErrorIsPositioned) {
  const auto e = parse_error("{\n  \"format_version\": \"1\",\n  \"name\": }");
  EXPECT_EQ(e.code(), cgs::Errc::SyntaxError);
  EXPECT_EQ(e.line(), 3u);
  EXPECT_GT(e.column(), 0u);
}

TEST(Ingest, SemanticErrorsSurface) {
  const auto e = parse_error(
      R"({"format_version": "1", "name": "m", "nodes": [{"name": "a", "kind": "operation", "op_type": "A"}], "edges": [{"src": "a", "dst": "b"}]})");
  EXPECT_EQ(e.code(), cgs::Errc::DanglingEdge);
  EXPECT_FALSE(cgs::is_parse_error(e.code()));
}

TEST(Ingest, LenetHasBackboneWithBothConvs) {
  const auto g = cgs::load_graph_file(oracle::fixture_path("lenet"));
  const auto pg = cgs::build_hierarchy(g);
  const auto backbone = pg.tree.at("backbone");
  EXPECT_TRUE(pg.tree.is_meta(backbone));
  EXPECT_EQ(pg.tree[pg.tree.at("backbone/Conv1")].parent, backbone);
  EXPECT_EQ(pg.tree[pg.tree.at("backbone/Conv2")].parent, backbone);
  EXPECT_TRUE(pg.tree.find("backbone/Conv2/Conv2D-op211").has_value());
}

TEST(Ingest, EmptyGraphEmitsEmptyArrays) {
  cgs::RawGraph g;
  g.name = "empty";
  const auto text = cgs::emit_graph_file(g);
  EXPECT_NE(text.find("\"nodes\": []"), std::string::npos);
  EXPECT_NE(text.find("\"edges\": []"), std::string::npos);
  EXPECT_TRUE(cgs::parse_graph_file(text).nodes.empty());
}

TEST(Ingest, RoundTripAndByteStableEmit) {
  for (const auto& name : oracle::fixture_names()) {
    const auto g = cgs::load_graph_file(oracle::fixture_path(name));
    const auto text = cgs::emit_graph_file(g);
    EXPECT_EQ(text, cgs::emit_graph_file(g)) << name;
    const auto back = cgs::parse_graph_file(text);
    EXPECT_EQ(cgs::emit_graph_file(back), text) << name;
    const auto a = cgs::canonical(g), b = cgs::canonical(back);
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      EXPECT_EQ(a.nodes[i].name, b.nodes[i].name);
      EXPECT_EQ(a.nodes[i].kind, b.nodes[i].kind);
      EXPECT_EQ(a.nodes[i].op_type, b.nodes[i].op_type);
      EXPECT_EQ(a.nodes[i].attrs, b.nodes[i].attrs);
    }
    ASSERT_EQ(a.edges.size(), b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      EXPECT_EQ(a.edges[i].src, b.edges[i].src);
      EXPECT_EQ(a.edges[i].dst, b.edges[i].dst);
    }
  }
}

TEST(Synthetic, ParallelChainBlock) {
  cgs::SyntheticSpec spec;
  spec.name = "s";
  spec.block = cgs::chain_block(3, {"Conv", "Relu", "Pool"});
  spec.repeats = 3;
  spec.wiring = cgs::Wiring::ParallelSameEndpoints;
  const auto g = cgs::generate_synthetic(spec);
  std::size_t ops = 0;
  for (const auto& n : g.nodes) ops += n.kind == cgs::NodeKind::Operation;
  EXPECT_EQ(ops, 9u + 2u);
}

TEST(Synthetic, SingleRepeat) {
  cgs::SyntheticSpec spec;
  spec.name = "s";
  spec.block = cgs::chain_block(3, {"Conv", "Relu", "Pool"});
  spec.repeats = 1;
  spec.wiring = cgs::Wiring::ParallelSameEndpoints;
  const auto g = cgs::generate_synthetic(spec);
  EXPECT_EQ(g.nodes.size(), 3u + 2u);
  EXPECT_EQ(g.edges.size(), 2u + 2u);
}

TEST(Synthetic, ResnetLikeSize) {
  const auto g = cgs::resnet_like();
  std::size_t ops = 0, params = 0;
  for (const auto& n : g.nodes) {
    ops += n.kind == cgs::NodeKind::Operation;
    params += n.kind == cgs::NodeKind::Parameter;
  }
  // 16 blocks of (in + 6 units x 10 + add + relu) plus a source and sink per family
  EXPECT_EQ(ops, 16u * 63u + 8u);
  EXPECT_EQ(params, 16u * 6u);
  EXPECT_GE(ops, 1000u);
}

TEST(Synthetic, RandomCorpusIsDeterministicAndAcyclic) {
  const auto a = cgs::emit_graph_file(cgs::random_hierarchical_dag(7, 120, 5, 3));
  const auto b = cgs::emit_graph_file(cgs::random_hierarchical_dag(7, 120, 5, 3));
  EXPECT_EQ(a, b);
  const auto g = cgs::random_hierarchical_dag(7, 120, 5, 3);
  std::map<std::string, int> id;
  for (const auto& n : g.nodes) id.emplace(n.name, static_cast<int>(id.size()));
  oracle::Edges edges;
  for (const auto& e : g.edges) edges.push_back({id[e.src], id[e.dst]});
  EXPECT_TRUE(oracle::acyclic(static_cast<int>(id.size()), edges));
  EXPECT_EQ(g.nodes.size(), 120u);
}

}  // namespace
