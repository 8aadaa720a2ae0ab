// cgs: batch simplification, statistics, synthetic corpora and the HTTP
// session server.
//
// Exit codes: 0 ok, 1 I/O, 2 parse, 3 semantic.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "cgs/api.hpp"
#include "cgs/ingest.hpp"
#include "cgs/layout.hpp"
#include "cgs/serialize.hpp"
#include "cgs/svg.hpp"
#include "cgs/synthetic.hpp"
#include "cgs/visible_graph.hpp"

namespace {

enum Exit { kOk = 0, kIo = 1, kParse = 2, kSemantic = 3 };

struct PipelineFlags {
  std::string input;
  int depth = 1;
  bool cgm = false;
  bool no_stacking = false;
  long long threshold = cgs::kDefaultModuleThreshold;
  int min_repeat = cgs::kDefaultMinRepeat;

  cgs::SessionOptions options() const {
    cgs::SessionOptions o;
    o.cgm = cgm;
    o.stacking = !no_stacking;
    o.module_threshold = threshold;
    o.min_repeat = min_repeat;
    return o;
  }
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--input,-i", f.input, "graph file (JSON)")->required();
  cmd->add_option("--depth,-d", f.depth, "expand every metanode above this hierarchy level")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--cgm", f.cgm, "concept graph mode: split cycles, classify layers");
  cmd->add_flag("--no-stacking", f.no_stacking, "disable isomorphic stacking");
  cmd->add_option("--threshold", f.threshold, "module descendant threshold");
  cmd->add_option("--min-repeat", f.min_repeat, "minimum repeat count for a pile");
}

int simplify(const PipelineFlags& f, const std::string& out, const std::string& svg, double scale, bool stats, const std::string& report) {
  auto pg = std::make_shared<const cgs::ProcessedGraph>(cgs::build_hierarchy(cgs::load_graph_file(f.input)));
  cgs::Session session(pg, f.options());
  session.expand_to_depth(f.depth);
  const auto vg = session.visible();
  if (!out.empty()) cgs::write_file(out, cgs::visible_json(*vg).dump(2) + "\n");
  if (!svg.empty()) cgs::write_file(svg, cgs::render_svg(*vg, cgs::layout_graph(*vg), scale));
  if (!report.empty()) {
    const auto& r = session.cycle_report();
    cgs::write_file(report, (r ? cgs::report_json(*r) : cgs::report_json({})).dump(2) + "\n");
  }
  if (stats) std::cout << cgs::stats_csv(cgs::stats_by_depth(session.graph(), f.options(), f.depth, session.layers()));
  if (out.empty() && svg.empty() && !stats && report.empty()) std::cout << cgs::visible_json(*vg).dump(2) << "\n";
  return kOk;
}

int stats(const PipelineFlags& f) {
  auto pg = std::make_shared<const cgs::ProcessedGraph>(cgs::build_hierarchy(cgs::load_graph_file(f.input)));
  cgs::Session session(pg, f.options());
  std::cout << cgs::stats_csv(cgs::stats_by_depth(session.graph(), f.options(), f.depth, session.layers()));
  return kOk;
}

int generate(const std::string& kind, const std::string& out, std::uint64_t seed, int leaves, int groups, int moved, int unit_ops) {
  cgs::RawGraph g;
  if (kind == "resnet") {
    g = cgs::resnet_like({3, 4, 6, 3}, unit_ops);
  } else if (kind == "random") {
    g = cgs::random_hierarchical_dag(seed, leaves, groups, moved);
  } else {
    throw cgs::Error(cgs::Errc::InvalidOption, "unknown corpus: " + kind);
  }
  const auto text = cgs::emit_graph_file(cgs::canonical(g));
  if (out.empty()) {
    std::cout << text;
  } else {
    cgs::write_file(out, text);
  }
  return kOk;
}

int serve(const std::string& dir, const std::string& host) {
  cgs::Api api(dir);
  httplib::Server server;
  cgs::install_routes(server, api);
  const int port = cgs::server_port();
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on port " << port << "\n";
    return kIo;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"computational graph simplification"};
  app.require_subcommand(1);

  PipelineFlags sf;
  std::string out, svg, report;
  double scale = 1.0;
  bool with_stats = false;
  auto* simp = app.add_subcommand("simplify", "derive the visible graph at a depth");
  add_pipeline_flags(simp, sf);
  simp->add_option("--out,-o", out, "visible graph JSON output");
  simp->add_option("--svg", svg, "SVG output");
  simp->add_option("--scale", scale, "SVG scale factor");
  simp->add_flag("--stats", with_stats, "print the depth table up to --depth");
  simp->add_option("--report", report, "cycle report JSON output");

  PipelineFlags tf;
  tf.depth = 4;
  auto* st = app.add_subcommand("stats", "CSV table of raw vs simplified counts per depth");
  add_pipeline_flags(st, tf);

  std::string kind = "resnet", gen_out;
  std::uint64_t seed = 0;
  int leaves = 100, groups = 4, moved = 2, unit_ops = 10;
  auto* gen = app.add_subcommand("generate", "write a synthetic graph");
  gen->add_option("--kind", kind, "resnet or random")->check(CLI::IsMember({"resnet", "random"}));
  gen->add_option("--out,-o", gen_out, "output file");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--leaves", leaves, "leaf count (random)");
  gen->add_option("--groups", groups, "top-level groups (random)");
  gen->add_option("--moved", moved, "leaves moved across groups (random)");
  gen->add_option("--unit-ops", unit_ops, "ops per unit (resnet)");

  std::string dir, host = "127.0.0.1";
  auto* srv = app.add_subcommand("serve", "HTTP session server (port from CGS_PORT)");
  srv->add_option("--graphs", dir, "directory of graph files")->required();
  srv->add_option("--host", host, "bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kSemantic;
  }

  try {
    if (*simp) return simplify(sf, out, svg, scale, with_stats, report);
    if (*st) return stats(tf);
    if (*gen) return generate(kind, gen_out, seed, leaves, groups, moved, unit_ops);
    if (*srv) return serve(dir, host);
  } catch (const cgs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cgs::is_parse_error(e.code()) ? kParse : kSemantic;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
