#include <gtest/gtest.h>

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hgec/config.hpp"
#include "hgec/service.hpp"
#include "support.hpp"

namespace hgec::service {
namespace {

using json = nlohmann::json;
using hgec::testing::ScratchDir;

ToolkitConfig test_config(const std::filesystem::path& data_dir) {
  ToolkitConfig cfg = default_config();
  cfg.service.data_dir = data_dir;
  cfg.service.cors_allow = {"chrome-extension://kogec"};
  engines::EngineConfig dead;
  dead.engine_id = "dead";
  dead.kind = engines::EngineKind::translation_endpoint;
  dead.base_url = "http://127.0.0.1:" + std::to_string(hgec::testing::unused_port()) + "/translate";
  dead.max_retries = 0;
  dead.timeout = std::chrono::milliseconds(500);
  cfg.engines.push_back(dead);
  return cfg;
}

Response post(Service& s, const std::string& path, const std::string& body, const std::string& origin = {}) {
  return s.handle({"POST", path, body, origin});
}

Response get(Service& s, const std::string& path) { return s.handle({"GET", path, "", ""}); }

std::string header(const Response& r, const std::string& name) {
  for (const auto& [k, v] : r.headers) {
    if (k == name) return v;
  }
  return {};
}

// "한국어" with conjoining jamo.
const std::string kDecomposed = "\xE1\x84\x92\xE1\x85\xA1\xE1\x86\xAB\xE1\x84\x80\xE1\x85\xAE\xE1\x86\xA8"
                                "\xE1\x84\x8B\xE1\x85\xA5";

// --- /v1/correct -------------------------------------------------------------

TEST(Correct, PartExampleByteExact) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  const auto r = post(s, "/v1/correct", R"({"text":"삼촌가 하와이를 갔다.","engine_id":"mock"})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, R"({"corrected":"삼촌이 하와이를 갔다.","engine_id":"mock","latency_ms":0})");
  EXPECT_EQ(header(r, "Content-Type"), "application/json; charset=utf-8");
  EXPECT_EQ(post(s, "/v1/correct", R"({"text":"삼촌가 하와이를 갔다.","engine_id":"mock"})").body, r.body);
  EXPECT_EQ(post(s, "/v1/correct", R"({"text":"삼촌가 하와이를 갔다."})").body, r.body);
}

TEST(Correct, ErrorStatuses) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  EXPECT_EQ(post(s, "/v1/correct", R"({"text":"","engine_id":"mock"})").status, 400);
  EXPECT_EQ(post(s, "/v1/correct", R"({"text":"   ","engine_id":"mock"})").status, 400);
  EXPECT_EQ(post(s, "/v1/correct", R"({"engine_id":"mock"})").status, 400);
  EXPECT_EQ(post(s, "/v1/correct", R"({"text":5})").status, 400);
  EXPECT_EQ(post(s, "/v1/correct", "not json").status, 400);
  EXPECT_EQ(post(s, "/v1/correct", "[1]").status, 400);
  std::string long_text;
  for (int i = 0; i < 129; ++i) long_text += "가 ";
  EXPECT_EQ(post(s, "/v1/correct", json{{"text", long_text}}.dump()).status, 400);

  const auto nope = post(s, "/v1/correct", R"({"text":"x","engine_id":"nope"})");
  EXPECT_EQ(nope.status, 404);
  const auto err = json::parse(nope.body);
  EXPECT_EQ(err.at("status"), 404);
  EXPECT_TRUE(err.at("error").is_string());

  EXPECT_EQ(post(s, "/v1/correct", R"({"text":"가","engine_id":"dead"})").status, 502);
  EXPECT_EQ(get(s, "/v1/correct").status, 405);
  EXPECT_EQ(get(s, "/v2/whatever").status, 404);
}

TEST(Correct, TimeoutMapsTo504) {
  httplib::Server slow;
  slow.Post("/translate", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    res.set_content(R"({"text":"late"})", "application/json");
  });
  const int port = slow.bind_to_any_port("127.0.0.1");
  std::thread t([&] { slow.listen_after_bind(); });
  slow.wait_until_ready();

  ScratchDir dir("svc");
  ToolkitConfig cfg = default_config();
  cfg.service.data_dir = dir.path();
  engines::EngineConfig e;
  e.engine_id = "slow";
  e.kind = engines::EngineKind::translation_endpoint;
  e.base_url = "http://127.0.0.1:" + std::to_string(port) + "/translate";
  e.max_retries = 0;
  e.timeout = std::chrono::milliseconds(100);
  cfg.engines.push_back(e);
  Service s(cfg);
  EXPECT_EQ(post(s, "/v1/correct", R"({"text":"가","engine_id":"slow"})").status, 504);
  slow.stop();
  t.join();
}

// --- /v1/evaluate -------------------------------------------------------------

TEST(Evaluate, InlinePairs) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  const auto r = post(s, "/v1/evaluate",
                      R"({"pairs":[{"hypothesis":"감자가 맛있어요.","reference":"감자가 맛있어요."}]})");
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = json::parse(r.body);
  EXPECT_DOUBLE_EQ(j.at("bleu").at("score").get<double>(), 100.0);
  EXPECT_DOUBLE_EQ(j.at("match").at("rate").get<double>(), 100.0);
  EXPECT_TRUE(j.at("run_id").is_string());
}

TEST(Evaluate, NormalizationFlag) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  const json pairs = json::array({{{"hypothesis", kDecomposed}, {"reference", "한국어"}}});
  const auto on = json::parse(post(s, "/v1/evaluate", json{{"pairs", pairs}, {"normalize", true}}.dump()).body);
  const auto off = json::parse(post(s, "/v1/evaluate", json{{"pairs", pairs}, {"normalize", false}}.dump()).body);
  EXPECT_DOUBLE_EQ(on.at("match").at("rate").get<double>(), 100.0);
  EXPECT_DOUBLE_EQ(off.at("match").at("rate").get<double>(), 0.0);
  EXPECT_EQ(post(s, "/v1/evaluate", json{{"pairs", pairs}, {"normalize", "yes"}}.dump()).status, 400);
}

TEST(Evaluate, FilesInsideDataDir) {
  ScratchDir dir("svc");
  hgec::testing::write_file(dir / "h.txt", "가 나\n다\n");
  hgec::testing::write_file(dir / "r.txt", "가 나\n라\n");
  hgec::testing::write_file(dir / "short.txt", "가 나\n");
  Service s(test_config(dir.path()));
  const auto r = post(s, "/v1/evaluate", R"({"hyp_file":"h.txt","ref_file":"r.txt"})");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_DOUBLE_EQ(json::parse(r.body).at("match").at("rate").get<double>(), 50.0);
  EXPECT_EQ(post(s, "/v1/evaluate", R"({"hyp_file":"h.txt","ref_file":"missing.txt"})").status, 404);
  EXPECT_EQ(post(s, "/v1/evaluate", R"({"hyp_file":"../h.txt","ref_file":"r.txt"})").status, 400);
  EXPECT_EQ(post(s, "/v1/evaluate", R"({"hyp_file":"/etc/passwd","ref_file":"r.txt"})").status, 400);
  EXPECT_EQ(post(s, "/v1/evaluate", R"({"hyp_file":"h.txt","ref_file":"short.txt"})").status, 400);
  EXPECT_EQ(post(s, "/v1/evaluate", R"({"pairs":[]})").status, 400);
  EXPECT_EQ(post(s, "/v1/evaluate", R"({"pairs":[{"hypothesis":"a"}]})").status, 400);
  EXPECT_EQ(post(s, "/v1/evaluate", R"({})").status, 400);
}

// --- /v1/runs ----------------------------------------------------------------

TEST(Runs, ListAndLookup) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  EXPECT_EQ(get(s, "/v1/runs").body, "[]");
  const auto ev = json::parse(
      post(s, "/v1/evaluate", R"({"pairs":[{"hypothesis":"가","reference":"가"}]})").body);
  const auto list = json::parse(get(s, "/v1/runs").body);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].at("run_id"), ev.at("run_id"));
  EXPECT_EQ(list[0].at("status"), "done");
  EXPECT_EQ(list[0].at("kind"), "evaluation");

  const auto one = get(s, "/v1/runs/" + ev.at("run_id").get<std::string>());
  EXPECT_EQ(one.status, 200);
  EXPECT_EQ(json::parse(one.body).at("result").at("match").at("rate"), 100.0);
  EXPECT_EQ(get(s, "/v1/runs/evaluation-0-ffff").status, 404);
  EXPECT_EQ(get(s, "/v1/runs/..%2F..").status, 404);
  EXPECT_EQ(post(s, "/v1/runs", "{}").status, 405);
}

TEST(Runs, NewestFirst) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  std::vector<std::string> ids;
  for (int i = 0; i < 3; ++i) {
    ids.push_back(json::parse(post(s, "/v1/evaluate", R"({"pairs":[{"hypothesis":"가","reference":"가"}]})").body)
                      .at("run_id"));
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  const auto list = json::parse(get(s, "/v1/runs").body);
  ASSERT_EQ(list.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(list[i].at("run_id"), ids[2 - i]);
}

// --- health and CORS ------------------------------------------------------------

TEST(Health, ReportsReachability) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  const auto r = get(s, "/v1/health");
  ASSERT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j.at("status"), "ok");
  bool saw_dead = false;
  for (const auto& e : j.at("engines")) {
    if (e.at("engine_id") == "mock") {
      EXPECT_TRUE(e.at("reachable").get<bool>());
    }
    if (e.at("engine_id") == "dead") {
      saw_dead = true;
      EXPECT_FALSE(e.at("reachable").get<bool>());
    }
  }
  EXPECT_TRUE(saw_dead);
}

TEST(Cors, AllowlistedOriginOnly) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  const auto allowed = post(s, "/v1/correct", R"({"text":"가"})", "chrome-extension://kogec");
  EXPECT_EQ(header(allowed, "Access-Control-Allow-Origin"), "chrome-extension://kogec");
  const auto other = post(s, "/v1/correct", R"({"text":"가"})", "https://evil.example");
  EXPECT_EQ(other.status, 200);
  EXPECT_EQ(header(other, "Access-Control-Allow-Origin"), "");
  const auto pre = s.handle({"OPTIONS", "/v1/correct", "", "chrome-extension://kogec"});
  EXPECT_EQ(pre.status, 204);
  EXPECT_NE(header(pre, "Access-Control-Allow-Methods").find("POST"), std::string::npos);
  EXPECT_EQ(s.handle({"OPTIONS", "/v1/correct", "", "https://evil.example"}).status, 403);
}

// --- over HTTP ---------------------------------------------------------------------

TEST(Http, EndToEndOverLoopback) {
  ScratchDir dir("svc");
  Service s(test_config(dir.path()));
  HttpServer server(s);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  const auto r = client.Post("/v1/correct", R"({"text":"삼촌가 하와이를 갔다.","engine_id":"mock"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, R"({"corrected":"삼촌이 하와이를 갔다.","engine_id":"mock","latency_ms":0})");
  EXPECT_NE(r->get_header_value("Content-Type").find("application/json"), std::string::npos);

  EXPECT_EQ(client.Post("/v1/correct", R"({"text":""})", "application/json")->status, 400);
  EXPECT_EQ(client.Post("/v1/correct", R"({"text":"x","engine_id":"nope"})", "application/json")->status, 404);
  EXPECT_EQ(client.Post("/v1/correct", R"({"text":"x","engine_id":"dead"})", "application/json")->status, 502);

  const httplib::Headers origin = {{"Origin", "chrome-extension://kogec"}};
  const auto with_origin = client.Get("/v1/runs", origin);
  ASSERT_TRUE(with_origin);
  EXPECT_EQ(with_origin->body, "[]");
  EXPECT_EQ(with_origin->get_header_value("Access-Control-Allow-Origin"), "chrome-extension://kogec");
  const auto pre = client.Options("/v1/correct", origin);
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  server.stop();
}

TEST(Http, ConcurrentRequests) {
  ScratchDir dir("svc");
  auto cfg = test_config(dir.path());
  cfg.service.max_concurrency = 2;
  Service s(cfg);
  HttpServer server(s);
  const int port = server.start("127.0.0.1", 0);
  std::atomic<int> ok{0};
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 8; ++t) {
      pool.emplace_back([&] {
        httplib::Client client("127.0.0.1", port);
        for (int i = 0; i < 10; ++i) {
          const auto r = client.Post("/v1/correct", R"({"text":"감ㄱ자가 맛있어요."})", "application/json");
          if (r && r->status == 200 && r->body.find("감자가 맛있어요.") != std::string::npos) ++ok;
        }
      });
    }
  }
  EXPECT_EQ(ok.load(), 80);
}

}  // namespace
}  // namespace hgec::service
