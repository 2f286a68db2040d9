#pragma once

// Reference-guided LLM-as-judge protocol: prompt construction, reply parsing,
// bounded-concurrency judging with resumable persistence, and aggregation of
// residual error codes and match statistics.

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hgec/corpus.hpp"
#include "hgec/engines.hpp"
#include "hgec/metrics.hpp"
#include "hgec/taxonomy.hpp"

namespace hgec::judge {

using CodeSet = std::set<ErrorCode>;

struct JudgeVerdict {
  std::string run_id;
  std::string pair_id;
  std::string system_id;
  bool matched = false;
  CodeSet codes;  ///< empty whenever matched
  std::string raw_response;
  /// Set when the judge could not be consulted or its reply was unusable;
  /// such verdicts are excluded from the error distribution.
  std::optional<std::string> error;

  friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

nlohmann::json to_json(const JudgeVerdict& v);
JudgeVerdict verdict_from_json(const nlohmann::json& j);
std::vector<JudgeVerdict> read_verdicts(const std::filesystem::path& path);

/// Task instruction, the full taxonomy, then <original>, <reference>,
/// <hypothesis> blocks and the output schema (a JSON array of codes).
std::string build_judge_prompt(const corpus::SentencePair& pair, std::string_view hypothesis);

/// Text between the tags of `tag` in a judge prompt, if present.
std::optional<std::string> prompt_field(std::string_view prompt, std::string_view tag);

/// Extracts the first JSON array of strings in `raw`. Throws ParseError when
/// there is none and UnknownCode for an entry outside the taxonomy.
CodeSet parse_judge_response(std::string_view raw);

/// JSON array of code names in taxonomy order.
std::string serialize_codes(const CodeSet& codes);

struct JudgeOptions {
  std::string run_id = "run";
  std::size_t max_concurrency = 4;
  /// Attempts per record, counting both transport and parse failures.
  int max_attempts = 2;
  /// Append-only verdict JSONL; verdicts already present for
  /// (run_id, pair_id, system_id) are reused. Empty disables persistence.
  std::filesystem::path persist_path;
};

/// One verdict per record, in record order. `judge` is called from up to
/// max_concurrency threads at once. Records whose hypothesis matches
/// the reference canonically never reach the judge. Throws InvalidArgument
/// when a record's pair_id has no reference.
std::vector<JudgeVerdict> run_judgement(std::span<const engines::CorrectionRecord> records,
                                        std::span<const corpus::SentencePair> references,
                                        engines::ChatClient& judge, const JudgeOptions& options = {});

struct ErrorDistribution {
  /// Percentage per reported code, rounded to one decimal.
  std::map<ErrorCode, double> percentages;
  std::map<ErrorCode, std::size_t> counts;
  std::size_t total_occurrences = 0;
  std::size_t total_unmatched = 0;
  bool includes_short = false;

  /// Reported codes in table row order (SHORT last when included).
  std::vector<ErrorCode> rows() const;
};

/// Percentages over code occurrences in unmatched, error-free verdicts.
/// Throws InvalidArgument when there are no code occurrences to aggregate.
ErrorDistribution aggregate_distribution(std::span<const JudgeVerdict> verdicts, bool include_short = false);

/// Throws InvalidArgument on empty input.
metrics::MatchReport match_summary(std::span<const JudgeVerdict> verdicts);

/// "error_type,<system>..." followed by one row per code in table order.
std::string distribution_csv(std::span<const std::pair<std::string, ErrorDistribution>> columns);

/// Offline stand-in for the judge model. It reads the reference and
/// hypothesis back out of the prompt and labels the difference: punctuation
/// only -> PUNCT, spacing only -> WS, both -> PUNCT+WS, shorter -> DEL,
/// longer -> INS, otherwise SPELL.
class MockJudgeClient final : public engines::ChatClient {
 public:
  std::string complete(std::span<const engines::ChatMessage> messages) override;
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Heuristic labelling used by MockJudgeClient.
CodeSet heuristic_codes(std::string_view hypothesis, std::string_view reference);

}  // namespace hgec::judge
