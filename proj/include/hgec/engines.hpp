#pragma once

// Correction engines behind one interface: a remote translation-model
// endpoint, a remote chat LLM, and an offline substitution-table mock.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hgec/corpus.hpp"
#include "hgec/error.hpp"

namespace hgec::engines {

enum class EngineKind { translation_endpoint, chat_llm, mock };
enum class PromptMode { zero_shot, guideline };

std::string_view to_string(EngineKind k);
std::string_view to_string(PromptMode m);
EngineKind parse_engine_kind(std::string_view s);
PromptMode parse_prompt_mode(std::string_view s);

inline constexpr std::string_view kSourceLangToken = "kor_Hang";
inline constexpr std::string_view kTargetLangToken = "cor_Hang";

struct EngineConfig {
  std::string engine_id;
  EngineKind kind = EngineKind::mock;
  /// Full endpoint URL for remote kinds, e.g. http://127.0.0.1:9000/v1/translate.
  std::string base_url;
  /// Name of the environment variable holding the bearer token. The token
  /// itself is never stored.
  std::string credential_ref;
  PromptMode prompt_mode = PromptMode::zero_shot;
  std::chrono::milliseconds timeout{30'000};
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{200};
  std::size_t max_input_tokens = 128;
  /// Optional model name forwarded to chat endpoints.
  std::string model;
  /// Overrides the bundled orthography guideline (guideline mode).
  std::filesystem::path guideline_path;
  /// Overrides the bundled mock substitution table (TSV incorrect<TAB>correct).
  std::filesystem::path mock_table_path;

  /// Throws ConfigError when a remote kind lacks base_url or guideline mode
  /// cannot find its resource.
  void validate() const;
};

/// Snapshot without secrets: credential_ref is the variable name only.
nlohmann::json to_json(const EngineConfig& c);

struct CorrectionRecord {
  std::string pair_id;
  std::string system_id;
  std::string hypothesis;  ///< canonical form
  std::int64_t latency_ms = 0;

  friend bool operator==(const CorrectionRecord&, const CorrectionRecord&) = default;
};

nlohmann::json to_json(const CorrectionRecord& r);
CorrectionRecord record_from_json(const nlohmann::json& j);
/// Reads a records JSONL file; a missing file yields an empty list.
std::vector<CorrectionRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, std::span<const CorrectionRecord> records);

// --- prompts -------------------------------------------------------------

/// Fixed zero-shot instruction; recorded in run metadata.
std::string_view zero_shot_instruction();
/// Bundled Korean orthography and spacing rules with examples.
std::string_view bundled_guideline();

/// zero_shot: instruction + sentence. guideline: instruction + the rule text
/// + sentence. Throws ConfigError in guideline mode when `guideline` is
/// empty, InvalidArgument when `text` is empty.
std::string build_gec_prompt(std::string_view text, PromptMode mode, std::string_view guideline = bundled_guideline());

// --- transport -----------------------------------------------------------

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Raised by transports for failures worth retrying.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool timeout) : Error(what), timeout_(timeout) {}
  bool timeout() const noexcept { return timeout_; }

 private:
  bool timeout_;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// POSTs a JSON body. Connection failures, timeouts, 429 and 5xx throw
  /// TransportError; other statuses are returned.
  virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                 const std::vector<std::pair<std::string, std::string>>& headers,
                                 std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport (plain http).
std::shared_ptr<HttpTransport> make_http_transport();

/// True when the endpoint's host accepts a connection and answers an HTTP
/// request. Sends no credentials.
bool probe_endpoint(const std::string& url, std::chrono::milliseconds timeout);

// --- chat ----------------------------------------------------------------

struct ChatMessage {
  std::string role;
  std::string content;
};

/// Minimal chat-completion interface shared by correction and judging.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(std::span<const ChatMessage> messages) = 0;
};

// --- engines -------------------------------------------------------------

class Engine {
 public:
  explicit Engine(EngineConfig config) : config_(std::move(config)) {}
  virtual ~Engine() = default;

  const EngineConfig& config() const noexcept { return config_; }
  const std::string& id() const noexcept { return config_.engine_id; }

  /// Validates length, runs with retries and exponential backoff, and
  /// canonicalizes the hypothesis. Throws InvalidArgument (empty text),
  /// InputTooLong, EngineTimeout or EngineUnavailable.
  CorrectionRecord correct(std::string_view text, std::string_view pair_id = {}) const;

 protected:
  /// One attempt. May throw TransportError (retried) or EngineUnavailable.
  virtual std::string attempt(const std::string& text) const = 0;
  /// Mock engines report zero latency so their records are reproducible.
  virtual bool measures_latency() const { return true; }

 private:
  EngineConfig config_;
};

using SubstitutionTable = std::map<std::string, std::string, std::less<>>;

/// The twelve incorrect -> correct example pairs of the error taxonomy.
SubstitutionTable default_mock_table();
/// TSV incorrect<TAB>correct per line; '#' lines ignored.
SubstitutionTable load_mock_table(const std::filesystem::path& path);

class MockEngine : public Engine {
 public:
  explicit MockEngine(EngineConfig config);
  MockEngine(EngineConfig config, SubstitutionTable table);

 protected:
  std::string attempt(const std::string& text) const override;
  bool measures_latency() const override { return false; }

 private:
  SubstitutionTable table_;
};

class TranslationEngine : public Engine {
 public:
  TranslationEngine(EngineConfig config, std::shared_ptr<HttpTransport> transport);

 protected:
  std::string attempt(const std::string& text) const override;

 private:
  std::shared_ptr<HttpTransport> transport_;
};

class ChatEngine : public Engine, public ChatClient {
 public:
  ChatEngine(EngineConfig config, std::shared_ptr<HttpTransport> transport);

  /// One POST {messages:[...]} -> {content}; retried like correct().
  std::string complete(std::span<const ChatMessage> messages) override;

 protected:
  std::string attempt(const std::string& text) const override;

 private:
  std::string send(std::span<const ChatMessage> messages) const;

  std::shared_ptr<HttpTransport> transport_;
  std::string guideline_;
};

/// Builds the engine for `config` (validated first). A null transport selects
/// the cpp-httplib one.
std::unique_ptr<Engine> make_engine(const EngineConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

/// One-shot convenience over make_engine(config)->correct(text).
CorrectionRecord correct(std::string_view text, const EngineConfig& config);

// --- batch ---------------------------------------------------------------

struct BatchOptions {
  std::size_t max_concurrency = 4;
  /// Records JSONL appended as items finish; pairs already present for this
  /// engine are skipped on rerun. Empty disables persistence.
  std::filesystem::path persist_path;
};

struct ItemError {
  std::string pair_id;
  std::string message;
};

struct BatchResult {
  std::vector<CorrectionRecord> records;  ///< input order, failures omitted
  std::vector<ItemError> failures;
  std::size_t resumed = 0;  ///< records taken from the persisted file
};

/// Throws BatchFailed when every item fails.
BatchResult batch_correct(std::span<const corpus::SentencePair> pairs, const Engine& engine,
                          const BatchOptions& options = {});

}  // namespace hgec::engines
