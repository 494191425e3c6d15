#include "gvdb/gvdb.hpp"
#include "gvdb/server.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <future>
#include <thread>

using namespace gvdb;
using json = nlohmann::json;

namespace {

std::shared_ptr<const QueryEngine> three_node_engine() {
  auto s = gvdb::testing::store_from_edgelist("alpha beta\nbeta alphabet\n", 1);
  return std::make_shared<const QueryEngine>(std::make_shared<const StoreData>(std::move(s)));
}

QueryParams whole_plane() { return {{"x0", "-1e9"}, {"y0", "-1e9"}, {"x1", "1e9"}, {"y1", "1e9"}}; }

void expect_error(const HttpResponse& r, const std::string& param) {
  EXPECT_EQ(r.status, 400);
  const auto j = json::parse(r.body);
  ASSERT_TRUE(j.contains("error")) << r.body;
  EXPECT_FALSE(j["error"]["code"].get<std::string>().empty());
  EXPECT_EQ(j["error"]["param"], param) << r.body;
  EXPECT_TRUE(j["error"].contains("message"));
}

class ServerFixture : public ::testing::Test {
protected:
  void SetUp() override {
    engine_ = three_node_engine();
    ServerConfig cfg;
    cfg.port = 0;
    server_ = std::make_unique<HttpServer>(engine_, cfg);
    port_ = server_->bind();
    thread_ = std::thread([this] { server_->run(); });
    server_->wait_until_ready();
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  httplib::Result get(const std::string& path) {
    httplib::Client c("127.0.0.1", port_);
    return c.Get(path);
  }

  std::shared_ptr<const QueryEngine> engine_;
  std::unique_ptr<HttpServer> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST(Api, Meta) {
  const auto engine = three_node_engine();
  ApiHandlers api(engine);
  const auto r = api.meta();
  EXPECT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["nodes"], 3);
  EXPECT_EQ(j["edges"], 2);
  EXPECT_EQ(j["levels"], json::array({0, 1}));
  // Oracle: union of the node bbox grown by margin then by gap/2.
  const auto& d = engine->data();
  Rect nodes;
  for (const auto& n : d.nodes) nodes.expand(n.pos);
  const Rect expected = nodes.padded(d.manifest.params.margin + d.manifest.params.gap / 2);
  EXPECT_NEAR(j["global_bbox"]["x_min"].get<double>(), expected.x_min, 1e-9);
  EXPECT_NEAR(j["global_bbox"]["y_min"].get<double>(), expected.y_min, 1e-9);
  EXPECT_NEAR(j["global_bbox"]["x_max"].get<double>(), expected.x_max, 1e-9);
  EXPECT_NEAR(j["global_bbox"]["y_max"].get<double>(), expected.y_max, 1e-9);
  EXPECT_EQ(api.meta().body, r.body);
}

TEST(Api, WholePlaneWindow) {
  ApiHandlers api(three_node_engine());
  const auto r = api.window(whole_plane());
  ASSERT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["nodes"].size(), 3u);
  EXPECT_EQ(j["edges"].size(), 2u);
  EXPECT_EQ(j["truncated"], false);
  EXPECT_EQ(j["level"], 0);
  for (const auto& n : j["nodes"]) EXPECT_EQ(n["in_window"], true);
  EXPECT_EQ(j["nodes"][0]["label"], "alpha");
  auto p = whole_plane();
  p.emplace("level", "1");
  const auto l1 = json::parse(api.window(p).body);
  EXPECT_EQ(l1["nodes"].size(), 1u);
  EXPECT_EQ(l1["nodes"][0]["member_count"], 3);
  EXPECT_EQ(l1["edges"].size(), 0u);
}

TEST(Api, WindowOutsideBboxIsEmpty) {
  ApiHandlers api(three_node_engine());
  const auto r = api.window({{"x0", "1e8"}, {"y0", "1e8"}, {"x1", "1.1e8"}, {"y1", "1.1e8"}});
  EXPECT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_TRUE(j["nodes"].empty());
  EXPECT_TRUE(j["edges"].empty());
}

TEST(Api, ReversedCoordinatesNormalized) {
  ApiHandlers api(three_node_engine());
  const auto a = api.window({{"x0", "-100"}, {"y0", "-50"}, {"x1", "80"}, {"y1", "90"}});
  const auto b = api.window({{"x0", "80"}, {"y0", "90"}, {"x1", "-100"}, {"y1", "-50"}});
  EXPECT_EQ(a.status, 200);
  EXPECT_EQ(a.body, b.body);
}

TEST(Api, BadParametersAre400WithParamName) {
  ApiHandlers api(three_node_engine());
  auto p = whole_plane();
  p.find("y1")->second = "abc";
  expect_error(api.window(p), "y1");
  p = whole_plane();
  p.find("x0")->second = "nan";
  expect_error(api.window(p), "x0");
  p = whole_plane();
  p.erase("x1");
  expect_error(api.window(p), "x1");
  p = whole_plane();
  p.emplace("level", "2");
  expect_error(api.window(p), "level");
  p = whole_plane();
  p.emplace("level", "one");
  expect_error(api.window(p), "level");
  p = whole_plane();
  p.emplace("max_items", "0");
  expect_error(api.window(p), "max_items");
  expect_error(api.search({{"q", ""}}), "q");
  expect_error(api.search({{"q", "   "}}), "q");
  expect_error(api.search({}), "q");
  expect_error(api.search({{"q", "a"}, {"limit", "0"}}), "limit");
  expect_error(api.search({{"q", "a"}, {"limit", "x"}}), "limit");
}

TEST(Api, Search) {
  ApiHandlers api(three_node_engine());
  const auto lower = api.search({{"q", "alpha"}});
  const auto upper = api.search({{"q", "ALPHA"}});
  ASSERT_EQ(lower.status, 200);
  EXPECT_EQ(lower.body, upper.body);
  const auto j = json::parse(lower.body);
  EXPECT_EQ(j["count"], 2);
  EXPECT_EQ(j["results"][0]["label"], "alpha");
  EXPECT_EQ(j["results"][1]["label"], "alphabet");
  const auto one = json::parse(api.search({{"q", "alpha"}, {"limit", "1"}}).body);
  ASSERT_EQ(one["results"].size(), 1u);
  EXPECT_EQ(one["results"][0]["label"], "alpha");
  EXPECT_EQ(json::parse(api.search({{"q", "zzz"}}).body)["count"], 0);
}

TEST(Api, JsonEscaping) {
  auto s = gvdb::testing::store_from_edgelist("\"quoted\\\" tab\x01x\n", 1);
  ApiHandlers api(std::make_shared<const QueryEngine>(std::make_shared<const StoreData>(std::move(s))));
  const auto j = json::parse(api.window(whole_plane()).body);
  EXPECT_EQ(j["nodes"][0]["label"], "\"quoted\\\"");
  EXPECT_EQ(j["nodes"][1]["label"], "tab\x01x");
}

TEST_F(ServerFixture, EndpointsOverHttp) {
  auto meta = get("/api/meta");
  ASSERT_TRUE(meta);
  EXPECT_EQ(meta->status, 200);
  EXPECT_EQ(json::parse(meta->body)["nodes"], 3);
  auto bad = get("/api/window?x0=1&y0=2&x1=zz&y1=4");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["error"]["param"], "x1");
  auto search = get("/api/search?q=ALPHA&limit=1");
  ASSERT_TRUE(search);
  EXPECT_EQ(json::parse(search->body)["results"][0]["label"], "alpha");
  auto missing = get("/api/nothing");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}

TEST_F(ServerFixture, ConcurrentRequestsAgree) {
  const std::string path = "/api/window?x0=-1e9&y0=-1e9&x1=1e9&y1=1e9";
  std::vector<std::future<std::pair<int, std::string>>> futures;
  for (int i = 0; i < 64; ++i) {
    futures.push_back(std::async(std::launch::async, [&] {
      httplib::Client c("127.0.0.1", port_);
      auto r = c.Get(path);
      return r ? std::pair{r->status, r->body} : std::pair{-1, std::string()};
    }));
  }
  std::vector<std::pair<int, std::string>> results;
  for (auto& f : futures) results.push_back(f.get());
  const auto expected = ApiHandlers(engine_).window(whole_plane()).body;
  for (const auto& [status, body] : results) {
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body, expected);
  }
}

TEST(Api, PrerenderedRecordsMatchPlainRendering) {
  for (const char* text : {"\"quoted\\\" tab\x01x\nb c\n", ""}) {
    StoreData s = *text ? gvdb::testing::store_from_edgelist(text, 1)
                        : gvdb::testing::run_small_pipeline(synthetic::barabasi_albert(400, 2, 5), 4).store;
    const auto engine = std::make_shared<const QueryEngine>(std::make_shared<const StoreData>(std::move(s)));
    const NodeRecords records(engine->data());
    ASSERT_EQ(records.size(), engine->data().nodes.size());
    std::mt19937_64 rng(9);
    const Rect b = engine->data().manifest.global_bbox;
    for (int w = 0; w < 50; ++w) {
      const Rect win = w == 0 ? Rect{-1e9, -1e9, 1e9, 1e9} : gvdb::testing::random_window(rng, b, 0.5);
      for (Level level : {Level::detail, Level::abstraction}) {
        const ViewResult v = engine->view(win, level, w % 3 == 0 ? 7 : 5000);
        ASSERT_EQ(view_to_json(v, &records), view_to_json(v)) << "window " << w;
      }
    }
  }
}
