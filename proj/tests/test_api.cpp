#include <gtest/gtest.h>

#include <thread>

#include "cgs/api.hpp"
#include "oracles.hpp"

namespace {

using cgs::Json;

class Http : public ::testing::Test {
 protected:
  void SetUp() override {
    cgs::install_routes(server_, api_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::pair<int, Json> get(const std::string& url) {
    auto res = client_->Get(url);
    if (!res) return {0, {}};
    return {res->status, Json::parse(res->body, nullptr, false)};
  }

  std::pair<int, Json> post(const std::string& url, const std::string& body) {
    auto res = client_->Post(url, body, "application/json");
    if (!res) return {0, {}};
    return {res->status, Json::parse(res->body, nullptr, false)};
  }

  std::string open(const std::string& graph, const std::string& options = "{}") {
    auto [status, j] = post("/sessions", R"({"graph":")" + graph + R"(","options":)" + options + "}");
    EXPECT_EQ(status, 200) << j.dump();
    return j.value("session", "");
  }

  cgs::Api api_{CGS_FIXTURES};
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(Http, ListsFixtureGraphs) {
  auto [status, j] = get("/graphs");
  EXPECT_EQ(status, 200);
  std::vector<std::string> names = j["graphs"];
  for (const auto& n : oracle::fixture_names()) EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

TEST_F(Http, SessionLifecycle) {
  const auto id = open("lenet");
  auto [s0, v0] = get("/sessions/" + id + "/visible");
  EXPECT_EQ(s0, 200);
  EXPECT_EQ(v0["revision"], 0);

  auto [s1, m1] = post("/sessions/" + id + "/expand", R"({"revision":0,"path":"backbone"})");
  EXPECT_EQ(s1, 200) << m1.dump();
  EXPECT_EQ(m1["revision"], 1);

  // stale revision
  auto [s2, m2] = post("/sessions/" + id + "/collapse", R"({"revision":0,"path":"backbone"})");
  EXPECT_EQ(s2, 409);
  EXPECT_EQ(m2["error"]["code"], "StaleRevision");
  EXPECT_EQ(m2["revision"], 1);

  auto [s3, m3] = post("/sessions/" + id + "/collapse", R"({"revision":1,"path":"backbone"})");
  EXPECT_EQ(s3, 200);
  auto [s4, v4] = get("/sessions/" + id + "/visible");
  EXPECT_EQ(v4["visible"], v0["visible"]);
}

TEST_F(Http, VisibleIsByteStable) {
  const auto id = open("bert_like", R"({"depth":2})");
  auto a = client_->Get("/sessions/" + id + "/visible");
  auto b = client_->Get("/sessions/" + id + "/visible");
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->body, b->body);
  auto la = client_->Get("/sessions/" + id + "/layout");
  auto lb = client_->Get("/sessions/" + id + "/layout");
  ASSERT_TRUE(la && lb);
  EXPECT_EQ(la->status, 200);
  EXPECT_EQ(la->body, lb->body);
}

TEST_F(Http, NotFoundCases) {
  EXPECT_EQ(get("/sessions/nope/visible").first, 404);
  EXPECT_EQ(get("/no/such/route").first, 404);
  EXPECT_EQ(post("/sessions", R"({"graph":"missing"})").first, 404);
  const auto id = open("lenet");
  auto [s, j] = post("/sessions/" + id + "/expand", R"({"revision":0,"path":"no/such"})");
  EXPECT_EQ(s, 404);
  EXPECT_EQ(j["error"]["code"], "UnknownNode");
  EXPECT_EQ(get("/sessions/" + id + "/port/999/hidden").first, 404);
  EXPECT_EQ(get("/sessions/" + id + "/pile/x/members").first, 404);
  EXPECT_EQ(get("/sessions/" + id + "/path?from=Conv1&to=nowhere").first, 404);
}

TEST_F(Http, MalformedBodies) {
  const auto id = open("lenet");
  for (const std::string body : {"", "not json", "[]", "{\"graph\":3}", "{\"graph\":\"lenet\",\"options\":{\"depth\":\"x\"}}",
                                 "{\"graph\":\"lenet\",\"options\":{\"bogus\":1}}", "{\"graph\":\"lenet\",\"options\":[]}"}) {
    EXPECT_EQ(post("/sessions", body).first, 400) << body;
  }
  for (const std::string body : {"", "{", "{}", "{\"revision\":-1,\"path\":\"backbone\"}", "{\"revision\":0}", "{\"revision\":0,\"path\":7}"}) {
    EXPECT_EQ(post("/sessions/" + id + "/expand", body).first, 400) << body;
  }
  auto [s, j] = post("/sessions/" + id + "/undo-ungroup", R"({"revision":0})");
  EXPECT_EQ(s, 400);
  EXPECT_EQ(j["error"]["code"], "NothingToUndo");
  EXPECT_EQ(post("/sessions/" + id + "/expand", R"({"revision":0,"path":"backbone/Conv1/Conv2D-op11"})").first, 400);
  // server still answers
  EXPECT_EQ(get("/sessions/" + id + "/visible").first, 200);
}

TEST_F(Http, PathAndSearch) {
  const auto id = open("lenet", R"({"depth":3})");
  auto [s, j] = get("/sessions/" + id + "/path?from=backbone/Conv1&to=backbone/Conv2");
  EXPECT_EQ(s, 200) << j.dump();
  EXPECT_FALSE(j["paths"].empty());
  EXPECT_EQ(get("/sessions/" + id + "/path?from=&to=x").first, 400);

  auto [q, r] = get("/sessions/" + id + "/search?q=conv");
  EXPECT_EQ(q, 200);
  EXPECT_FALSE(r["results"].empty());
  auto [q2, r2] = get("/sessions/" + id + "/search?q=c");
  EXPECT_TRUE(r2["results"].empty());
}

TEST_F(Http, PortsAndPiles) {
  const auto pd = open("port_design", R"({"depth":2})");
  auto [s, v] = get("/sessions/" + pd + "/visible");
  ASSERT_FALSE(v["visible"]["ports"].empty());
  auto [ps, pj] = get("/sessions/" + pd + "/port/0/hidden");
  EXPECT_EQ(ps, 200) << pj.dump();
  EXPECT_TRUE(pj.contains("hidden_edges"));

  const auto iso = open("iso_branches", R"({"depth":1})");
  auto [is, ij] = get("/sessions/" + iso + "/pile/0/members");
  EXPECT_EQ(is, 200) << ij.dump();
}

TEST_F(Http, CycleReportOnCreate) {
  auto [s, j] = post("/sessions", R"({"graph":"cycle","options":{"cgm":true}})");
  EXPECT_EQ(s, 200);
  EXPECT_TRUE(j.contains("cycle_report"));
}

TEST_F(Http, ConcurrentReaders) {
  const auto id = open("bert_like", R"({"depth":2})");
  const auto expected = client_->Get("/sessions/" + id + "/layout")->body;
  std::vector<std::thread> readers;
  std::atomic<int> mismatches = 0;
  for (int t = 0; t < 4; ++t)
    readers.emplace_back([&] {
      httplib::Client c("127.0.0.1", port_);
      for (int i = 0; i < 5; ++i) {
        auto r = c.Get("/sessions/" + id + "/layout");
        if (!r || r->body != expected) ++mismatches;
      }
    });
  for (auto& t : readers) t.join();
  EXPECT_EQ(mismatches, 0);
}

}  // namespace
