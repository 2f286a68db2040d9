#include "hgec/engines.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "append_log.hpp"
#include "hgec/hangul.hpp"
#include "hgec/taxonomy.hpp"
#include "hgec/unicode.hpp"

namespace hgec::engines {

using json = nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string canonical_key(std::string_view text) { return utf8::trim(hangul::to_canonical(text).str()); }

std::vector<std::pair<std::string, std::string>> auth_headers(const EngineConfig& c) {
  std::vector<std::pair<std::string, std::string>> headers;
  if (!c.credential_ref.empty()) {
    if (const char* token = std::getenv(c.credential_ref.c_str()); token != nullptr && *token != '\0') {
      headers.emplace_back("Authorization", std::string("Bearer ") + token);
    }
  }
  return headers;
}

json parse_body(const HttpResponse& r, const std::string& engine_id) {
  if (r.status < 200 || r.status >= 300) {
    throw EngineUnavailable("engine '" + engine_id + "' returned HTTP " + std::to_string(r.status));
  }
  try {
    return json::parse(r.body);
  } catch (const json::parse_error&) {
    throw EngineUnavailable("engine '" + engine_id + "' returned a non-JSON body");
  }
}

std::string load_guideline_text(const EngineConfig& c) {
  if (c.guideline_path.empty()) return std::string(bundled_guideline());
  return read_file(c.guideline_path);
}

// Runs `fn` with the engine's retry policy; TransportError is retried with
// exponential backoff, anything else propagates.
template <typename Fn>
auto with_retries(const EngineConfig& c, Fn&& fn) -> decltype(fn()) {
  auto backoff = c.initial_backoff;
  const int attempts = 1 + std::max(0, c.max_retries);
  for (int i = 1;; ++i) {
    try {
      return fn();
    } catch (const TransportError& e) {
      if (i >= attempts) {
        const std::string msg = "engine '" + c.engine_id + "' unavailable after " + std::to_string(attempts) +
                                " attempt(s): " + e.what();
        if (e.timeout()) throw EngineTimeout(msg);
        throw EngineUnavailable(msg);
      }
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

}  // namespace

std::string_view to_string(EngineKind k) {
  switch (k) {
    case EngineKind::translation_endpoint: return "translation_endpoint";
    case EngineKind::chat_llm: return "chat_llm";
    case EngineKind::mock: return "mock";
  }
  return "mock";
}

std::string_view to_string(PromptMode m) { return m == PromptMode::zero_shot ? "zero_shot" : "guideline"; }

EngineKind parse_engine_kind(std::string_view s) {
  const std::string l = lower(s);
  if (l == "translation_endpoint" || l == "translation") return EngineKind::translation_endpoint;
  if (l == "chat_llm" || l == "chat") return EngineKind::chat_llm;
  if (l == "mock") return EngineKind::mock;
  throw ConfigError("unknown engine kind '" + std::string(s) + "'");
}

PromptMode parse_prompt_mode(std::string_view s) {
  const std::string l = lower(s);
  if (l == "zero_shot" || l == "zero-shot") return PromptMode::zero_shot;
  if (l == "guideline") return PromptMode::guideline;
  throw ConfigError("unknown prompt mode '" + std::string(s) + "'");
}

void EngineConfig::validate() const {
  if (engine_id.empty()) throw ConfigError("engine_id must not be empty");
  if (kind != EngineKind::mock && base_url.empty()) {
    throw ConfigError("engine '" + engine_id + "' (" + std::string(to_string(kind)) + ") requires base_url");
  }
  if (kind == EngineKind::chat_llm && prompt_mode == PromptMode::guideline && !guideline_path.empty() &&
      !std::filesystem::exists(guideline_path)) {
    throw ConfigError("engine '" + engine_id + "': guideline resource " + guideline_path.string() + " not found");
  }
  if (max_input_tokens == 0) throw ConfigError("engine '" + engine_id + "': max_input_tokens must be positive");
  if (timeout.count() <= 0) throw ConfigError("engine '" + engine_id + "': timeout must be positive");
}

json to_json(const EngineConfig& c) {
  json j = {{"engine_id", c.engine_id},
            {"kind", to_string(c.kind)},
            {"timeout_ms", c.timeout.count()},
            {"max_retries", c.max_retries},
            {"max_input_tokens", c.max_input_tokens}};
  if (!c.base_url.empty()) j["base_url"] = c.base_url;
  if (!c.credential_ref.empty()) j["credential_ref"] = c.credential_ref;
  if (c.kind == EngineKind::chat_llm) {
    j["prompt_mode"] = to_string(c.prompt_mode);
    j["instruction"] = zero_shot_instruction();
    if (!c.model.empty()) j["model"] = c.model;
  }
  if (c.kind == EngineKind::translation_endpoint) {
    j["src_lang"] = kSourceLangToken;
    j["tgt_lang"] = kTargetLangToken;
  }
  return j;
}

json to_json(const CorrectionRecord& r) {
  return {{"pair_id", r.pair_id}, {"system_id", r.system_id}, {"hypothesis", r.hypothesis},
          {"latency_ms", r.latency_ms}};
}

CorrectionRecord record_from_json(const json& j) {
  CorrectionRecord r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.system_id = j.at("system_id").get<std::string>();
  r.hypothesis = j.at("hypothesis").get<std::string>();
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  return r;
}

std::vector<CorrectionRecord> read_records(const std::filesystem::path& path) {
  std::vector<CorrectionRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      // A torn final line from an interrupted run is tolerated.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, std::span<const CorrectionRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

// --- prompts -------------------------------------------------------------

std::string_view zero_shot_instruction() {
  return "You are a Korean proofreader. Correct only the grammar, spelling, word spacing and "
         "punctuation errors in the Korean sentence below. Keep its meaning, tone and writing style, "
         "and do not rephrase anything that is already correct. Output only the corrected sentence, "
         "with no explanation.";
}

std::string build_gec_prompt(std::string_view text, PromptMode mode, std::string_view guideline) {
  if (text.empty()) throw InvalidArgument("cannot build a prompt for empty text");
  std::string prompt(zero_shot_instruction());
  if (mode == PromptMode::guideline) {
    if (guideline.empty()) throw ConfigError("guideline prompt mode requires the orthography guideline resource");
    prompt += "\n\nFollow these Korean orthography and word spacing rules:\n\n";
    prompt += guideline;
    if (!prompt.ends_with('\n')) prompt += '\n';
  }
  prompt += "\n\nSentence:\n";
  prompt += text;
  return prompt;
}

// --- engines -------------------------------------------------------------

CorrectionRecord Engine::correct(std::string_view text, std::string_view pair_id) const {
  if (utf8::trim(text).empty()) throw InvalidArgument("text to correct is empty");
  const std::size_t tokens = utf8::count_whitespace_tokens(text);
  if (tokens > config_.max_input_tokens) throw InputTooLong(tokens, config_.max_input_tokens);

  const auto start = std::chrono::steady_clock::now();
  const std::string input(text);
  std::string raw = with_retries(config_, [&] { return attempt(input); });
  const auto elapsed = std::chrono::steady_clock::now() - start;

  CorrectionRecord r;
  r.pair_id = pair_id;
  r.system_id = config_.engine_id;
  r.hypothesis = utf8::trim(hangul::to_canonical(raw).str());
  r.latency_ms =
      measures_latency() ? std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() : 0;
  return r;
}

SubstitutionTable default_mock_table() {
  SubstitutionTable table;
  for (const auto& entry : judge::taxonomy()) {
    table.emplace(canonical_key(entry.incorrect), std::string(entry.correct));
  }
  return table;
}

SubstitutionTable load_mock_table(const std::filesystem::path& path) {
  SubstitutionTable table;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected incorrect<TAB>correct");
    }
    table.insert_or_assign(canonical_key(std::string_view(line).substr(0, tab)), line.substr(tab + 1));
  }
  return table;
}

MockEngine::MockEngine(EngineConfig config)
    : MockEngine(config, config.mock_table_path.empty() ? default_mock_table()
                                                        : load_mock_table(config.mock_table_path)) {}

MockEngine::MockEngine(EngineConfig config, SubstitutionTable table)
    : Engine(std::move(config)) {
  // Keys are matched in canonical, trimmed form.
  for (auto& [k, v] : table) table_.insert_or_assign(canonical_key(k), std::move(v));
}

std::string MockEngine::attempt(const std::string& text) const {
  const auto it = table_.find(canonical_key(text));
  return it != table_.end() ? it->second : text;
}

TranslationEngine::TranslationEngine(EngineConfig config, std::shared_ptr<HttpTransport> transport)
    : Engine(std::move(config)), transport_(std::move(transport)) {}

std::string TranslationEngine::attempt(const std::string& text) const {
  const json body = {{"text", text}, {"src_lang", kSourceLangToken}, {"tgt_lang", kTargetLangToken}};
  const HttpResponse r = transport_->post_json(config().base_url, body.dump(), auth_headers(config()), config().timeout);
  const json reply = parse_body(r, id());
  if (!reply.contains("text") || !reply["text"].is_string()) {
    throw EngineUnavailable("engine '" + id() + "' reply lacks a 'text' string");
  }
  return reply["text"].get<std::string>();
}

ChatEngine::ChatEngine(EngineConfig config, std::shared_ptr<HttpTransport> transport)
    : Engine(std::move(config)), transport_(std::move(transport)) {
  if (this->config().prompt_mode == PromptMode::guideline) guideline_ = load_guideline_text(this->config());
}

std::string ChatEngine::send(std::span<const ChatMessage> messages) const {
  json body = {{"messages", json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  if (!config().model.empty()) body["model"] = config().model;
  const HttpResponse r = transport_->post_json(config().base_url, body.dump(), auth_headers(config()), config().timeout);
  const json reply = parse_body(r, id());
  if (reply.contains("content") && reply["content"].is_string()) return reply["content"].get<std::string>();
  // OpenAI-style replies are accepted as well.
  if (reply.contains("choices") && reply["choices"].is_array() && !reply["choices"].empty()) {
    const auto& msg = reply["choices"][0].value("message", json::object());
    if (msg.contains("content") && msg["content"].is_string()) return msg["content"].get<std::string>();
  }
  throw EngineUnavailable("engine '" + id() + "' reply lacks a 'content' string");
}

std::string ChatEngine::complete(std::span<const ChatMessage> messages) {
  return with_retries(config(), [&] { return send(messages); });
}

std::string ChatEngine::attempt(const std::string& text) const {
  const std::string prompt =
      build_gec_prompt(text, config().prompt_mode, config().prompt_mode == PromptMode::guideline
                                                       ? std::string_view(guideline_)
                                                       : std::string_view{});
  const ChatMessage message{"user", prompt};
  return send(std::span<const ChatMessage>(&message, 1));
}

std::unique_ptr<Engine> make_engine(const EngineConfig& config, std::shared_ptr<HttpTransport> transport) {
  config.validate();
  switch (config.kind) {
    case EngineKind::mock: return std::make_unique<MockEngine>(config);
    case EngineKind::translation_endpoint:
      return std::make_unique<TranslationEngine>(config, transport ? std::move(transport) : make_http_transport());
    case EngineKind::chat_llm:
      return std::make_unique<ChatEngine>(config, transport ? std::move(transport) : make_http_transport());
  }
  throw ConfigError("unsupported engine kind");
}

CorrectionRecord correct(std::string_view text, const EngineConfig& config) {
  return make_engine(config)->correct(text);
}

// --- batch ---------------------------------------------------------------

BatchResult batch_correct(std::span<const corpus::SentencePair> pairs, const Engine& engine,
                          const BatchOptions& options) {
  BatchResult result;
  std::vector<std::optional<CorrectionRecord>> slots(pairs.size());
  std::vector<std::optional<std::string>> errors(pairs.size());

  std::vector<std::size_t> pending;
  {
    std::unordered_map<std::string, CorrectionRecord> done;
    if (!options.persist_path.empty()) {
      for (auto& r : read_records(options.persist_path)) {
        if (r.system_id == engine.id()) done.insert_or_assign(r.pair_id, std::move(r));
      }
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (const auto it = done.find(pairs[i].id); it != done.end()) {
        slots[i] = it->second;
        ++result.resumed;
      } else {
        pending.push_back(i);
      }
    }
  }

  std::ofstream sink;
  if (!options.persist_path.empty() && !pending.empty()) {
    sink = detail::open_append_log(options.persist_path);
  }
  std::mutex sink_mutex;
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < pending.size(); k = next.fetch_add(1)) {
      const std::size_t i = pending[k];
      try {
        CorrectionRecord r = engine.correct(pairs[i].original, pairs[i].id);
        if (sink.is_open()) {
          const std::lock_guard lock(sink_mutex);
          sink << to_json(r).dump() << '\n';
          sink.flush();
        }
        slots[i] = std::move(r);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.max_concurrency, 1, std::max<std::size_t>(1, pending.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (slots[i]) {
      result.records.push_back(std::move(*slots[i]));
    } else if (errors[i]) {
      result.failures.push_back({pairs[i].id, *errors[i]});
    }
  }
  if (!pairs.empty() && result.records.empty()) {
    throw BatchFailed("all " + std::to_string(pairs.size()) + " items failed; first error: " +
                      (result.failures.empty() ? std::string("unknown") : result.failures.front().message));
  }
  return result;
}

}  // namespace hgec::engines
