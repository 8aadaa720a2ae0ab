#pragma once

// JSON session service over a directory of graph files, and its binding to
// an HTTP server. Every response carries the session revision; mutations
// must quote the current revision or are rejected with 409.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "cgs/error.hpp"
#include "cgs/ingest.hpp"
#include "cgs/layout.hpp"
#include "cgs/serialize.hpp"
#include "cgs/visible_graph.hpp"

namespace cgs {

inline constexpr int kDefaultPort = 8321;

struct ApiResponse {
  int status = 200;
  Json body;
};

inline int http_status(Errc c) {
  switch (c) {
    case Errc::UnknownNode:
    case Errc::UnknownPort:
    case Errc::UnknownPile: return 404;
    default: return 400;
  }
}

inline ApiResponse error_response(int status, std::string_view code, std::string_view message, std::optional<std::uint64_t> revision = {}) {
  ApiResponse r;
  r.status = status;
  r.body["error"] = {{"code", code}, {"message", message}};
  if (revision) r.body["revision"] = *revision;
  return r;
}

class Api {
 public:
  explicit Api(std::filesystem::path graph_dir) : dir_(std::move(graph_dir)) {}

  /// Registers an in-memory graph under `name` (used by tests and `serve`).
  void add_graph(const std::string& name, std::shared_ptr<const ProcessedGraph> pg) {
    std::lock_guard lock(mu_);
    graphs_[name] = std::move(pg);
  }

  ApiResponse list_graphs() {
    std::set<std::string> names;
    {
      std::lock_guard lock(mu_);
      for (const auto& [n, _] : graphs_) names.insert(n);
    }
    std::error_code ec;
    if (!dir_.empty() && std::filesystem::is_directory(dir_, ec))
      for (const auto& entry : std::filesystem::directory_iterator(dir_, ec))
        if (entry.path().extension() == ".json") names.insert(entry.path().stem().string());
    ApiResponse r;
    r.body["graphs"] = std::vector<std::string>(names.begin(), names.end());
    return r;
  }

  ApiResponse create_session(std::string_view body) {
    const auto j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return error_response(400, "SchemaError", "body must be a JSON object");
    if (!j.contains("graph") || !j["graph"].is_string()) return error_response(400, "SchemaError", "graph: string required");
    SessionOptions opts;
    std::optional<int> depth;
    if (j.contains("options")) {
      const auto& o = j["options"];
      if (!o.is_object()) return error_response(400, "SchemaError", "options must be an object");
      for (const auto& [k, v] : o.items()) {
        if (k == "cgm" && v.is_boolean()) {
          opts.cgm = v.get<bool>();
        } else if (k == "stacking" && v.is_boolean()) {
          opts.stacking = v.get<bool>();
        } else if (k == "module_threshold" && v.is_number_integer()) {
          opts.module_threshold = v.get<long long>();
        } else if (k == "min_repeat" && v.is_number_integer()) {
          opts.min_repeat = v.get<int>();
        } else if (k == "depth" && v.is_number_integer()) {
          depth = v.get<int>();
        } else {
          return error_response(400, "SchemaError", "options." + k + ": unknown field or wrong type");
        }
      }
    }
    const std::string name = j["graph"].get<std::string>();
    try {
      auto pg = graph(name);
      if (!pg) return error_response(404, "UnknownGraph", name);
      auto entry = std::make_shared<Entry>(pg, opts);
      if (depth) entry->session.expand_to_depth(*depth);
      std::lock_guard lock(mu_);
      const std::string id = "s" + std::to_string(++next_id_);
      entry->graph_name = name;
      sessions_[id] = entry;
      ApiResponse r;
      r.body["session"] = id;
      r.body["graph"] = name;
      r.body["revision"] = entry->session.revision();
      r.body["options"] = {{"cgm", opts.cgm},
                           {"stacking", opts.stacking},
                           {"module_threshold", opts.module_threshold},
                           {"min_repeat", opts.min_repeat}};
      if (const auto& rep = entry->session.cycle_report()) r.body["cycle_report"] = report_json(*rep);
      return r;
    } catch (const Error& e) {
      return error_response(is_parse_error(e.code()) ? 400 : http_status(e.code()), to_string(e.code()), e.what());
    }
  }

  ApiResponse visible(const std::string& id) {
    return with_session(id, [&](Entry& s) {
      ApiResponse r;
      r.body["revision"] = s.session.revision();
      r.body["visible"] = visible_json(*s.session.visible());
      return r;
    });
  }

  /// op is one of expand, collapse, ungroup, undo-ungroup.
  ApiResponse mutate(const std::string& id, std::string_view op, std::string_view body) {
    const auto j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return error_response(400, "SchemaError", "body must be a JSON object");
    if (!j.contains("revision") || !j["revision"].is_number_unsigned())
      return error_response(400, "SchemaError", "revision: non-negative integer required");
    const bool needs_path = op != "undo-ungroup";
    if (needs_path && (!j.contains("path") || !j["path"].is_string())) return error_response(400, "SchemaError", "path: string required");
    const auto revision = j["revision"].get<std::uint64_t>();
    return with_session(id, [&](Entry& s) {
      std::lock_guard write(s.write_mu);
      const auto current = s.session.revision();
      if (revision != current) return error_response(409, "StaleRevision", "session is at revision " + std::to_string(current), current);
      try {
        if (op == "expand") {
          s.session.expand(j["path"].get<std::string>());
        } else if (op == "collapse") {
          s.session.collapse(j["path"].get<std::string>());
        } else if (op == "ungroup") {
          s.session.ungroup(j["path"].get<std::string>());
        } else if (op == "undo-ungroup") {
          if (!s.session.undo_ungroup()) return error_response(400, "NothingToUndo", "no ungroup to undo", current);
        } else {
          return error_response(404, "UnknownOperation", std::string(op), current);
        }
      } catch (const Error& e) {
        return error_response(http_status(e.code()), to_string(e.code()), e.what(), current);
      }
      ApiResponse r;
      r.body["revision"] = s.session.revision();
      return r;
    });
  }

  ApiResponse layout(const std::string& id) {
    return with_session(id, [&](Entry& s) {
      std::lock_guard write(s.write_mu);
      const auto vg = s.session.visible();
      const auto rev = s.session.revision();
      if (!s.layout || s.layout_revision != rev) {
        if (s.layout) {
          auto next = stable_relayout(*s.layout, s.layout_graph->tree, *vg);
          s.correspondence = std::move(next.correspondence);
          s.layout = std::make_shared<LayoutResult>(std::move(next.layout));
        } else {
          s.layout = std::make_shared<LayoutResult>(layout_graph(*vg));
        }
        s.layout_graph = vg->graph;
        s.layout_revision = rev;
      }
      ApiResponse r;
      r.body["revision"] = rev;
      r.body["layout"] = layout_json(*s.layout, *vg);
      r.body["correspondence"] = s.correspondence;
      return r;
    });
  }

  ApiResponse path(const std::string& id, const std::string& from, const std::string& to) {
    if (from.empty() || to.empty()) return error_response(400, "SchemaError", "from and to are required");
    return with_session(id, [&](Entry& s) {
      const auto vg = s.session.visible();
      try {
        ApiResponse r;
        r.body["revision"] = s.session.revision();
        r.body["paths"] = paths_json(find_path(*vg, from, to));
        return r;
      } catch (const Error& e) {
        return error_response(http_status(e.code()), to_string(e.code()), e.what(), s.session.revision());
      }
    });
  }

  ApiResponse search(const std::string& id, const std::string& q) {
    return with_session(id, [&](Entry& s) {
      const auto vg = s.session.visible();
      ApiResponse r;
      r.body["revision"] = s.session.revision();
      Json results = Json::array();
      for (const auto& p : cgs::search(*vg, q, s.session.layers())) results.push_back(profile_json(p));
      r.body["results"] = std::move(results);
      return r;
    });
  }

  ApiResponse port_hidden(const std::string& id, const std::string& port) {
    return with_session(id, [&](Entry& s) {
      const auto vg = s.session.visible();
      const auto rev = s.session.revision();
      const auto pid = parse_index(port);
      if (!pid || *pid >= vg->ports().size() || vg->port_removed[*pid]) return error_response(404, "UnknownPort", port, rev);
      ApiResponse r;
      r.body["revision"] = rev;
      r.body["port"] = port_json(*vg, *pid);
      Json edges = Json::array();
      for (const auto e : reveal_hidden(vg->pruned, *pid))
        if (!vg->edge_removed[e]) edges.push_back(edge_json(*vg, e));
      r.body["hidden_edges"] = std::move(edges);
      return r;
    });
  }

  ApiResponse pile_members(const std::string& id, const std::string& pile) {
    return with_session(id, [&](Entry& s) {
      const auto vg = s.session.visible();
      const auto rev = s.session.revision();
      const auto pid = parse_index(pile);
      if (!pid || *pid >= vg->piles.size()) return error_response(404, "UnknownPile", pile, rev);
      ApiResponse r;
      r.body["revision"] = rev;
      r.body["pile"] = pile_json(*vg, vg->piles[*pid]);
      return r;
    });
  }

 private:
  struct Entry {
    Entry(std::shared_ptr<const ProcessedGraph> pg, SessionOptions opts) : session(std::move(pg), opts) {}
    Session session;
    std::string graph_name;
    std::mutex write_mu;
    std::shared_ptr<LayoutResult> layout;
    std::shared_ptr<const ProcessedGraph> layout_graph;
    std::uint64_t layout_revision = 0;
    std::map<std::string, std::string> correspondence;
  };

  static std::optional<std::size_t> parse_index(const std::string& s) {
    if (s.empty() || s.size() > 18 || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
  }

  std::shared_ptr<const ProcessedGraph> graph(const std::string& name) {
    {
      std::lock_guard lock(mu_);
      if (const auto it = graphs_.find(name); it != graphs_.end()) return it->second;
    }
    if (dir_.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name.starts_with("."))
      return nullptr;
    const auto file = dir_ / (name + ".json");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec)) return nullptr;
    auto pg = std::make_shared<const ProcessedGraph>(build_hierarchy(load_graph_file(file.string())));
    std::lock_guard lock(mu_);
    return graphs_.try_emplace(name, std::move(pg)).first->second;
  }

  template <class F>
  ApiResponse with_session(const std::string& id, F&& f) {
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard lock(mu_);
      const auto it = sessions_.find(id);
      if (it == sessions_.end()) return error_response(404, "UnknownSession", id);
      entry = it->second;
    }
    try {
      return f(*entry);
    } catch (const Error& e) {
      return error_response(http_status(e.code()), to_string(e.code()), e.what(), entry->session.revision());
    }
  }

  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const ProcessedGraph>> graphs_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 0;
};

inline void install_routes(httplib::Server& server, Api& api) {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get("/graphs", [&api, reply](const httplib::Request&, httplib::Response& res) { reply(res, api.list_graphs()); });
  server.Post("/sessions", [&api, reply](const httplib::Request& req, httplib::Response& res) { reply(res, api.create_session(req.body)); });
  server.Get(R"(/sessions/([^/]+)/visible)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.visible(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/(expand|collapse|ungroup|undo-ungroup))", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.mutate(req.matches[1], req.matches[2].str(), req.body));
  });
  server.Get(R"(/sessions/([^/]+)/layout)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.layout(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/path)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.path(req.matches[1], req.get_param_value("from"), req.get_param_value("to")));
  });
  server.Get(R"(/sessions/([^/]+)/search)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.search(req.matches[1], req.get_param_value("q")));
  });
  server.Get(R"(/sessions/([^/]+)/port/([^/]+)/hidden)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.port_hidden(req.matches[1], req.matches[2]));
  });
  server.Get(R"(/sessions/([^/]+)/pile/([^/]+)/members)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.pile_members(req.matches[1], req.matches[2]));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(Json{{"error", {{"code", "Internal"}, {"message", what}}}}.dump(), "application/json");
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(Json{{"error", {{"code", "NotFound"}, {"message", "no such route"}}}}.dump(), "application/json");
  });
}

/// Port from CGS_PORT, else the default.
inline int server_port() {
  const char* env = std::getenv("CGS_PORT");
  if (env == nullptr || *env == '\0') return kDefaultPort;
  const int port = std::atoi(env);
  return port > 0 && port < 65536 ? port : kDefaultPort;
}

}  // namespace cgs
