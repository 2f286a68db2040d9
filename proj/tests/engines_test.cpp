#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hgec/engines.hpp"
#include "hgec/error.hpp"
#include "hgec/taxonomy.hpp"
#include "support.hpp"

namespace hgec::engines {
namespace {

using json = nlohmann::json;
using hgec::testing::ScratchDir;

// Loopback HTTP server standing in for a remote model endpoint.
class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/translate", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      if (fail_remaining_ > 0) {
        --fail_remaining_;
        res.status = 503;
        return;
      }
      const auto body = json::parse(req.body);
      res.set_content(json{{"text", " " + body.at("text").get<std::string>() + "(교정) "}}.dump(), "application/json");
    });
    server_.Post("/chat", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      if (fail_remaining_ > 0) {
        --fail_remaining_;
        res.status = 500;
        return;
      }
      res.set_content(json{{"content", reply_}}.dump(), "application/json");
    });
    server_.Post("/openai", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      res.set_content(json{{"choices", {{{"message", {{"content", reply_}}}}}}}.dump(), "application/json");
    });
    server_.Post("/forbidden", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      res.status = 403;
    });
    server_.Post("/slow", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      std::this_thread::sleep_for(std::chrono::milliseconds(400));
      res.set_content(R"({"text":"late"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  int hits() const { return hits_.load(); }
  json last_body() {
    const std::lock_guard lock(mutex_);
    return last_body_;
  }
  std::string last_auth() {
    const std::lock_guard lock(mutex_);
    return last_auth_;
  }
  void fail_next(int n) { fail_remaining_ = n; }
  void set_reply(std::string r) { reply_ = std::move(r); }

 private:
  void record(const httplib::Request& req) {
    ++hits_;
    const std::lock_guard lock(mutex_);
    last_body_ = json::parse(req.body, nullptr, false);
    last_auth_ = req.get_header_value("Authorization");
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::atomic<int> fail_remaining_{0};
  std::mutex mutex_;
  json last_body_;
  std::string last_auth_;
  std::string reply_ = "감자가 맛있어요.";
};

EngineConfig remote(EngineKind kind, std::string url) {
  EngineConfig c;
  c.engine_id = kind == EngineKind::chat_llm ? "chat" : "nllb";
  c.kind = kind;
  c.base_url = std::move(url);
  c.max_retries = 2;
  c.initial_backoff = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(2000);
  return c;
}

EngineConfig mock_config() {
  EngineConfig c;
  c.engine_id = "mock";
  return c;
}

corpus::SentencePair pair(std::string id, std::string original) {
  return {std::move(id), corpus::Source::other, std::move(original), "", {}};
}

// --- mock --------------------------------------------------------------------

TEST(Mock, TaxonomyExamplesAreCorrected) {
  const auto engine = make_engine(mock_config());
  EXPECT_EQ(engine->correct("삼촌가 하와이를 갔다.").hypothesis, "삼촌이 하와이를 갔다.");
  for (const auto& info : judge::taxonomy()) {
    const auto r = engine->correct(info.incorrect, "p");
    EXPECT_EQ(r.hypothesis, std::string(info.correct)) << info.name;
    EXPECT_EQ(r.latency_ms, 0);
    EXPECT_EQ(r.system_id, "mock");
    EXPECT_EQ(r.pair_id, "p");
  }
}

TEST(Mock, UnknownInputUnchangedButCanonical) {
  const auto engine = make_engine(mock_config());
  EXPECT_EQ(engine->correct("처음 보는 문장").hypothesis, "처음 보는 문장");
  EXPECT_EQ(engine->correct("\xE1\x84\x8F\xE1\x84\x8F").hypothesis, "ㅋㅋ");
  EXPECT_EQ(engine->correct(" 처음 보는 문장 "), engine->correct(" 처음 보는 문장 "));
}

TEST(Mock, CustomTableFile) {
  ScratchDir dir("mock");
  hgec::testing::write_file(dir / "t.tsv", "# comment\n틀림\t맞음\n");
  auto c = mock_config();
  c.mock_table_path = dir / "t.tsv";
  const auto engine = make_engine(c);
  EXPECT_EQ(engine->correct("틀림").hypothesis, "맞음");
  EXPECT_EQ(engine->correct("삼촌가 하와이를 갔다.").hypothesis, "삼촌가 하와이를 갔다.");
  hgec::testing::write_file(dir / "bad.tsv", "no tab here\n");
  c.mock_table_path = dir / "bad.tsv";
  EXPECT_THROW(make_engine(c), FormatError);
}

TEST(Engine, InputValidation) {
  auto c = mock_config();
  c.max_input_tokens = 3;
  const auto engine = make_engine(c);
  EXPECT_THROW(engine->correct(""), InvalidArgument);
  EXPECT_THROW(engine->correct("   "), InvalidArgument);
  EXPECT_NO_THROW(engine->correct("하나 둘 셋"));
  EXPECT_THROW(engine->correct("하나 둘 셋 넷"), InputTooLong);
}

TEST(Engine, DefaultLengthLimitIs128Tokens) {
  const auto engine = make_engine(mock_config());
  std::string text;
  for (int i = 0; i < 128; ++i) text += "가 ";
  EXPECT_NO_THROW(engine->correct(text));
  EXPECT_THROW(engine->correct(text + "나"), InputTooLong);
}

// --- config validation -----------------------------------------------------------

TEST(Config, RemoteKindsNeedUrl) {
  EngineConfig c;
  c.engine_id = "x";
  c.kind = EngineKind::translation_endpoint;
  EXPECT_THROW(c.validate(), ConfigError);
  c.kind = EngineKind::chat_llm;
  EXPECT_THROW(make_engine(c), ConfigError);
  c.base_url = "http://127.0.0.1:1/chat";
  c.prompt_mode = PromptMode::guideline;
  c.guideline_path = "/nonexistent/guideline.txt";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, SnapshotCarriesNoSecret) {
  ::setenv("HGEC_TEST_TOKEN", "s3cr3t-value", 1);
  auto c = remote(EngineKind::chat_llm, "http://127.0.0.1:1/chat");
  c.credential_ref = "HGEC_TEST_TOKEN";
  const std::string dumped = to_json(c).dump();
  EXPECT_EQ(dumped.find("s3cr3t-value"), std::string::npos);
  EXPECT_NE(dumped.find("HGEC_TEST_TOKEN"), std::string::npos);
}

// --- prompts ------------------------------------------------------------------------

TEST(Prompt, ZeroShotAndGuideline) {
  const std::string zero = build_gec_prompt("문장입니다", PromptMode::zero_shot);
  const std::string guided = build_gec_prompt("문장입니다", PromptMode::guideline);
  EXPECT_NE(zero.find(zero_shot_instruction()), std::string::npos);
  EXPECT_NE(zero.find("문장입니다"), std::string::npos);
  EXPECT_NE(guided.find("문장입니다"), std::string::npos);
  EXPECT_EQ(zero.find("맏이"), std::string::npos);
  EXPECT_NE(guided.find("맏이"), std::string::npos);
  EXPECT_NE(guided.find("마지"), std::string::npos);
  EXPECT_NE(guided.find(bundled_guideline()), std::string::npos);
  EXPECT_THROW(build_gec_prompt("문장", PromptMode::guideline, ""), ConfigError);
  EXPECT_THROW(build_gec_prompt("", PromptMode::zero_shot), InvalidArgument);
}

// --- remote engines ---------------------------------------------------------------

TEST(Translation, WireFormatAndAuth) {
  FakeEndpoint server;
  ::setenv("HGEC_TEST_TOKEN", "tok-123", 1);
  auto c = remote(EngineKind::translation_endpoint, server.url("/translate"));
  c.credential_ref = "HGEC_TEST_TOKEN";
  const auto engine = make_engine(c);
  const auto r = engine->correct("삼촌가 갔다", "p9");
  EXPECT_EQ(r.hypothesis, "삼촌가 갔다(교정)");
  EXPECT_EQ(r.pair_id, "p9");
  EXPECT_EQ(r.system_id, "nllb");
  const auto body = server.last_body();
  EXPECT_EQ(body.at("text"), "삼촌가 갔다");
  EXPECT_EQ(body.at("src_lang"), "kor_Hang");
  EXPECT_EQ(body.at("tgt_lang"), "cor_Hang");
  EXPECT_EQ(server.last_auth(), "Bearer tok-123");
}

TEST(Translation, RetriesServerErrors) {
  FakeEndpoint server;
  const auto engine = make_engine(remote(EngineKind::translation_endpoint, server.url("/translate")));
  server.fail_next(2);
  EXPECT_EQ(engine->correct("가").hypothesis, "가(교정)");
  EXPECT_EQ(server.hits(), 3);

  server.fail_next(3);
  EXPECT_THROW(engine->correct("가"), EngineUnavailable);
  EXPECT_EQ(server.hits(), 6);
}

TEST(Translation, ClientErrorIsNotRetried) {
  FakeEndpoint server;
  const auto engine = make_engine(remote(EngineKind::translation_endpoint, server.url("/forbidden")));
  EXPECT_THROW(engine->correct("가"), EngineUnavailable);
  EXPECT_EQ(server.hits(), 1);
}

TEST(Translation, TimeoutMapsToEngineTimeout) {
  FakeEndpoint server;
  auto c = remote(EngineKind::translation_endpoint, server.url("/slow"));
  c.timeout = std::chrono::milliseconds(100);
  c.max_retries = 1;
  const auto engine = make_engine(c);
  EXPECT_THROW(engine->correct("가"), EngineTimeout);
}

TEST(Translation, ClosedPortIsUnavailable) {
  const int port = hgec::testing::unused_port();
  auto c = remote(EngineKind::translation_endpoint, "http://127.0.0.1:" + std::to_string(port) + "/translate");
  c.max_retries = 0;
  EXPECT_THROW(make_engine(c)->correct("가"), EngineUnavailable);
  EXPECT_FALSE(probe_endpoint(c.base_url, std::chrono::milliseconds(200)));
}

TEST(Chat, ZeroShotPromptSent) {
  FakeEndpoint server;
  auto c = remote(EngineKind::chat_llm, server.url("/chat"));
  c.model = "some-model";
  const auto engine = make_engine(c);
  const auto r = engine->correct("감자가 맛있어용.");
  EXPECT_EQ(r.hypothesis, "감자가 맛있어요.");
  const auto body = server.last_body();
  EXPECT_EQ(body.at("model"), "some-model");
  const std::string prompt = body.at("messages").at(0).at("content");
  EXPECT_NE(prompt.find("감자가 맛있어용."), std::string::npos);
  EXPECT_NE(prompt.find(zero_shot_instruction()), std::string::npos);
  EXPECT_EQ(prompt.find("맏이"), std::string::npos);
  EXPECT_TRUE(probe_endpoint(c.base_url, std::chrono::milliseconds(500)));
}

TEST(Chat, GuidelinePromptAndCompletionReplies) {
  FakeEndpoint server;
  auto c = remote(EngineKind::chat_llm, server.url("/openai"));
  c.prompt_mode = PromptMode::guideline;
  auto engine = make_engine(c);
  engine->correct("문장");
  const std::string prompt = server.last_body().at("messages").at(0).at("content");
  EXPECT_NE(prompt.find("맏이"), std::string::npos);

  auto* chat = dynamic_cast<ChatEngine*>(engine.get());
  ASSERT_NE(chat, nullptr);
  server.set_reply(R"(["WS"])");
  const std::vector<ChatMessage> msgs = {{"user", "hi"}};
  EXPECT_EQ(chat->complete(msgs), R"(["WS"])");
}

TEST(Chat, CompleteRetries) {
  FakeEndpoint server;
  auto engine = make_engine(remote(EngineKind::chat_llm, server.url("/chat")));
  auto* chat = dynamic_cast<ChatEngine*>(engine.get());
  server.fail_next(1);
  const std::vector<ChatMessage> msgs = {{"user", "hi"}};
  EXPECT_EQ(chat->complete(msgs), "감자가 맛있어요.");
  EXPECT_EQ(server.hits(), 2);
}

// --- batch --------------------------------------------------------------------------

TEST(Batch, OrderPreservedAndPerItemFailures) {
  auto c = mock_config();
  c.max_input_tokens = 4;
  const auto engine = make_engine(c);
  const std::vector<corpus::SentencePair> in = {pair("a", "삼촌가 하와이를 갔다."), pair("b", "하나 둘 셋 넷 다섯"),
                                                pair("c", "감자가 맛있어용.")};
  const auto r = batch_correct(in, *engine);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].pair_id, "a");
  EXPECT_EQ(r.records[1].pair_id, "c");
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].pair_id, "b");

  const std::vector<corpus::SentencePair> bad = {pair("x", "하나 둘 셋 넷 다섯")};
  EXPECT_THROW(batch_correct(bad, *engine), BatchFailed);
}

TEST(Batch, ManyItemsInOrderWithConcurrency) {
  const auto engine = make_engine(mock_config());
  std::vector<corpus::SentencePair> in;
  for (int i = 0; i < 200; ++i) in.push_back(pair("p" + std::to_string(i), "문장 " + std::to_string(i)));
  BatchOptions opts;
  opts.max_concurrency = 8;
  const auto r = batch_correct(in, *engine, opts);
  ASSERT_EQ(r.records.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(r.records[i].pair_id, in[i].id);
}

TEST(Batch, ResumeSkipsPersistedAndSurvivesTornTail) {
  ScratchDir dir("batch");
  FakeEndpoint server;
  const auto engine = make_engine(remote(EngineKind::translation_endpoint, server.url("/translate")));
  std::vector<corpus::SentencePair> in;
  for (int i = 0; i < 10; ++i) in.push_back(pair("p" + std::to_string(i), "문장 " + std::to_string(i)));

  const auto clean = batch_correct(in, *engine);
  const int clean_hits = server.hits();
  EXPECT_EQ(clean_hits, 10);

  BatchOptions opts;
  opts.persist_path = dir / "records.jsonl";
  const std::vector<corpus::SentencePair> first_half(in.begin(), in.begin() + 4);
  batch_correct(first_half, *engine, opts);
  // Simulate a crash mid-write.
  {
    std::ofstream torn(opts.persist_path, std::ios::app | std::ios::binary);
    torn << R"({"pair_id":"p4","syst)";
  }
  const auto resumed = batch_correct(in, *engine, opts);
  EXPECT_EQ(resumed.resumed, 4u);
  EXPECT_EQ(server.hits(), clean_hits + 4 + 6);
  ASSERT_EQ(resumed.records.size(), clean.records.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(resumed.records[i].pair_id, clean.records[i].pair_id);
    EXPECT_EQ(resumed.records[i].hypothesis, clean.records[i].hypothesis);
  }
  const auto on_disk = read_records(opts.persist_path);
  EXPECT_EQ(on_disk.size(), 10u);
}

TEST(Records, JsonlRoundTrip) {
  ScratchDir dir("records");
  const std::vector<CorrectionRecord> recs = {{"a", "mock", "가", 0}, {"b", "nllb", "나 다", 17}};
  write_records(dir / "r.jsonl", recs);
  EXPECT_EQ(read_records(dir / "r.jsonl"), recs);
  EXPECT_TRUE(read_records(dir / "missing.jsonl").empty());
  hgec::testing::write_file(dir / "bad.jsonl", "{oops\n{\"pair_id\":\"a\",\"system_id\":\"s\",\"hypothesis\":\"h\"}\n");
  EXPECT_THROW(read_records(dir / "bad.jsonl"), FormatError);
}

}  // namespace
}  // namespace hgec::engines
