#include "hgec/judge.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "append_log.hpp"
#include "hgec/hangul.hpp"
#include "hgec/unicode.hpp"

namespace hgec::judge {

using json = nlohmann::json;

namespace {

constexpr std::string_view kInstruction =
    "You grade the output of a Korean grammatical error correction system. You are given the "
    "original sentence, a reference correction written by an annotator, and the system's "
    "hypothesis. Treat the reference as the correct answer. List every type of error that the "
    "hypothesis still contains or introduced, using only the codes defined below.";

constexpr std::string_view kSchema =
    "Output format: reply with a single JSON array of code strings, for example [\"WS\", \"PUNCT\"]. "
    "A code may appear at most once. If the hypothesis matches the reference, reply with [].";

std::string tagged(std::string_view tag, std::string_view body) {
  std::string out;
  out.append("<").append(tag).append(">\n");
  out.append(body);
  out.append("\n</").append(tag).append(">\n");
  return out;
}

std::string last_user_message(std::span<const engines::ChatMessage> messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  if (messages.empty()) throw InvalidArgument("judge called without messages");
  return messages.back().content;
}

bool is_punct(char32_t cp) {
  const auto cat = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (cat & U_GC_P_MASK) != 0;
}

std::u32string without(std::u32string_view text, bool punct, bool space) {
  std::u32string out;
  for (const char32_t cp : text) {
    if (punct && is_punct(cp)) continue;
    if (space && utf8::is_whitespace(cp)) continue;
    out.push_back(cp);
  }
  return out;
}

using VerdictKey = std::tuple<std::string, std::string, std::string>;

struct VerdictKeyHash {
  std::size_t operator()(const VerdictKey& k) const noexcept {
    const std::hash<std::string> h;
    return h(std::get<0>(k)) ^ (h(std::get<1>(k)) * 31) ^ (h(std::get<2>(k)) * 1009);
  }
};

}  // namespace

// --- verdict records -------------------------------------------------------

json to_json(const JudgeVerdict& v) {
  json codes = json::array();
  for (const ErrorCode c : v.codes) codes.push_back(to_string(c));
  return {{"run_id", v.run_id},
          {"pair_id", v.pair_id},
          {"system_id", v.system_id},
          {"matched", v.matched},
          {"codes", std::move(codes)},
          {"raw_response", v.raw_response},
          {"error", v.error ? json(*v.error) : json(nullptr)}};
}

JudgeVerdict verdict_from_json(const json& j) {
  JudgeVerdict v;
  v.run_id = j.value("run_id", std::string{});
  v.pair_id = j.at("pair_id").get<std::string>();
  v.system_id = j.at("system_id").get<std::string>();
  v.matched = j.at("matched").get<bool>();
  for (const auto& c : j.at("codes")) {
    const auto name = c.get<std::string>();
    const auto code = parse_error_code(name);
    if (!code) throw UnknownCode(name);
    v.codes.insert(*code);
  }
  v.raw_response = j.value("raw_response", std::string{});
  if (const auto it = j.find("error"); it != j.end() && it->is_string()) v.error = it->get<std::string>();
  return v;
}

std::vector<JudgeVerdict> read_verdicts(const std::filesystem::path& path) {
  std::vector<JudgeVerdict> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      out.push_back(verdict_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// --- prompt ----------------------------------------------------------------

std::string build_judge_prompt(const corpus::SentencePair& pair, std::string_view hypothesis) {
  std::string p;
  p.append(kInstruction).append("\n\nError codes:\n");
  for (const auto& e : taxonomy()) {
    p.append("\n[").append(e.name).append("]\n");
    p.append("Definition: ").append(e.definition).append("\n");
    p.append("Incorrect: ").append(e.incorrect).append("\n");
    p.append("Correct: ").append(e.correct).append("\n");
  }
  p.append("\n");
  p.append(tagged("original", pair.original));
  p.append(tagged("reference", pair.corrected));
  p.append(tagged("hypothesis", hypothesis));
  p.append("\n").append(kSchema);
  return p;
}

std::optional<std::string> prompt_field(std::string_view prompt, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">\n";
  const std::string close = "\n</" + std::string(tag) + ">";
  const auto b = prompt.find(open);
  if (b == std::string_view::npos) return std::nullopt;
  const auto start = b + open.size();
  const auto e = prompt.find(close, start);
  if (e == std::string_view::npos) return std::nullopt;
  return std::string(prompt.substr(start, e - start));
}

// --- reply parsing -----------------------------------------------------------

CodeSet parse_judge_response(std::string_view raw) {
  // Try each '[' in turn; the first one that opens a valid JSON array wins.
  for (auto pos = raw.find('['); pos != std::string_view::npos; pos = raw.find('[', pos + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t i = pos; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '[') ++depth;
      else if (c == ']' && --depth == 0) {
        end = i;
        break;
      }
    }
    if (end == std::string_view::npos) break;
    json arr;
    try {
      arr = json::parse(raw.substr(pos, end - pos + 1));
    } catch (const json::parse_error&) {
      continue;
    }
    if (!std::all_of(arr.begin(), arr.end(), [](const json& x) { return x.is_string(); })) continue;
    CodeSet codes;
    for (const auto& item : arr) {
      const auto token = item.get<std::string>();
      const auto code = parse_error_code(token);
      if (!code) throw UnknownCode(utf8::trim(token));
      codes.insert(*code);
    }
    return codes;
  }
  throw ParseError("judge reply contains no JSON array of codes");
}

std::string serialize_codes(const CodeSet& codes) {
  json arr = json::array();
  for (const ErrorCode c : codes) arr.push_back(to_string(c));
  return arr.dump();
}

// --- judging -----------------------------------------------------------------

std::vector<JudgeVerdict> run_judgement(std::span<const engines::CorrectionRecord> records,
                                        std::span<const corpus::SentencePair> references,
                                        engines::ChatClient& judge, const JudgeOptions& options) {
  std::unordered_map<std::string, const corpus::SentencePair*> ref_by_id;
  for (const auto& p : references) ref_by_id.emplace(p.id, &p);
  for (const auto& r : records) {
    if (!ref_by_id.contains(r.pair_id)) throw InvalidArgument("no reference for pair '" + r.pair_id + "'");
  }

  std::vector<std::optional<JudgeVerdict>> slots(records.size());
  std::vector<std::size_t> pending;
  {
    std::unordered_map<VerdictKey, JudgeVerdict, VerdictKeyHash> done;
    if (!options.persist_path.empty()) {
      for (auto& v : read_verdicts(options.persist_path)) {
        if (v.run_id != options.run_id || v.error) continue;
        done.insert_or_assign(VerdictKey{v.run_id, v.pair_id, v.system_id}, std::move(v));
      }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto it = done.find(VerdictKey{options.run_id, records[i].pair_id, records[i].system_id});
      if (it != done.end()) slots[i] = it->second;
      else pending.push_back(i);
    }
  }

  std::ofstream sink;
  if (!options.persist_path.empty() && !pending.empty()) sink = detail::open_append_log(options.persist_path);
  std::mutex sink_mutex;
  std::atomic<std::size_t> next{0};
  const int attempts = std::max(1, options.max_attempts);

  const auto judge_one = [&](const engines::CorrectionRecord& rec) {
    const corpus::SentencePair& pair = *ref_by_id.at(rec.pair_id);
    JudgeVerdict v{options.run_id, rec.pair_id, rec.system_id, false, {}, {}, std::nullopt};
    if (metrics::is_match(rec.hypothesis, pair.corrected, true)) {
      v.matched = true;
      return v;
    }
    const std::vector<engines::ChatMessage> messages{{"user", build_judge_prompt(pair, rec.hypothesis)}};
    for (int a = 1; a <= attempts; ++a) {
      try {
        v.raw_response = judge.complete(messages);
        v.codes = parse_judge_response(v.raw_response);
        v.error.reset();
        return v;
      } catch (const Error& e) {
        v.codes.clear();
        v.error = e.what();
      }
    }
    return v;
  };

  const auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < pending.size(); k = next.fetch_add(1)) {
      const std::size_t i = pending[k];
      JudgeVerdict v = judge_one(records[i]);
      if (sink.is_open()) {
        const std::lock_guard lock(sink_mutex);
        sink << to_json(v).dump() << '\n';
        sink.flush();
      }
      slots[i] = std::move(v);
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(options.max_concurrency, 1, std::max<std::size_t>(1, pending.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<JudgeVerdict> out;
  out.reserve(records.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// --- aggregation -------------------------------------------------------------

std::vector<ErrorCode> ErrorDistribution::rows() const {
  std::vector<ErrorCode> r(kTableOrder.begin(), kTableOrder.end());
  if (includes_short) r.push_back(ErrorCode::SHORT);
  return r;
}

ErrorDistribution aggregate_distribution(std::span<const JudgeVerdict> verdicts, bool include_short) {
  ErrorDistribution d;
  d.includes_short = include_short;
  for (const ErrorCode c : d.rows()) d.counts[c] = 0;
  for (const auto& v : verdicts) {
    if (v.matched || v.error) continue;
    ++d.total_unmatched;
    for (const ErrorCode c : v.codes) {
      if (c == ErrorCode::SHORT && !include_short) continue;
      ++d.counts[c];
      ++d.total_occurrences;
    }
  }
  if (d.total_occurrences == 0) {
    throw InvalidArgument("error distribution is undefined: no error codes among unmatched verdicts");
  }
  // Round half away from zero to tenths of a percent, in integers.
  const std::uint64_t total = d.total_occurrences;
  for (const auto& [code, count] : d.counts) {
    const std::uint64_t tenths = (2000 * static_cast<std::uint64_t>(count) + total) / (2 * total);
    d.percentages[code] = static_cast<double>(tenths) / 10.0;
  }
  return d;
}

metrics::MatchReport match_summary(std::span<const JudgeVerdict> verdicts) {
  if (verdicts.empty()) throw InvalidArgument("match summary over zero verdicts");
  const auto matched = static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const JudgeVerdict& v) { return v.matched; }));
  return metrics::make_match_report(matched, verdicts.size());
}

std::string distribution_csv(std::span<const std::pair<std::string, ErrorDistribution>> columns) {
  std::ostringstream out;
  out << "error_type";
  for (const auto& [name, _] : columns) out << ',' << name;
  out << '\n';
  std::vector<ErrorCode> rows(kTableOrder.begin(), kTableOrder.end());
  if (std::any_of(columns.begin(), columns.end(), [](const auto& c) { return c.second.includes_short; })) {
    rows.push_back(ErrorCode::SHORT);
  }
  char buf[32];
  for (const ErrorCode code : rows) {
    out << to_string(code);
    for (const auto& [_, d] : columns) {
      const auto it = d.percentages.find(code);
      std::snprintf(buf, sizeof buf, "%.1f", it == d.percentages.end() ? 0.0 : it->second);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

// --- offline judge -------------------------------------------------------------

CodeSet heuristic_codes(std::string_view hypothesis, std::string_view reference) {
  const std::u32string hyp = utf8::decode(hangul::to_canonical(utf8::trim(hypothesis)).str());
  const std::u32string ref = utf8::decode(hangul::to_canonical(utf8::trim(reference)).str());
  if (hyp == ref) return {};
  if (without(hyp, true, false) == without(ref, true, false)) return {ErrorCode::PUNCT};
  if (without(hyp, false, true) == without(ref, false, true)) return {ErrorCode::WS};
  const auto h = without(hyp, true, true);
  const auto r = without(ref, true, true);
  if (h == r) return {ErrorCode::PUNCT, ErrorCode::WS};
  if (h.size() < r.size()) return {ErrorCode::DEL};
  if (h.size() > r.size()) return {ErrorCode::INS};
  return {ErrorCode::SPELL};
}

std::string MockJudgeClient::complete(std::span<const engines::ChatMessage> messages) {
  ++calls_;
  const std::string prompt = last_user_message(messages);
  const auto ref = prompt_field(prompt, "reference");
  const auto hyp = prompt_field(prompt, "hypothesis");
  if (!ref || !hyp) return "I could not find the sentences to compare.";
  return serialize_codes(heuristic_codes(*hyp, *ref));
}

}  // namespace hgec::judge
