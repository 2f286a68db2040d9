#pragma once

// Corpus BLEU and exact-match rate against a single reference per hypothesis.
//
// Tokens are whitespace-separated after optional canonicalization. Precisions
// use clipped counts; an order with no hypothesis n-grams at all has the
// vacuous precision 1 (so identical corpora of short sentences still score
// 100), an order with n-grams but no matches has precision 0 and zeroes the
// score unless add-one smoothing is requested.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hgec::metrics {

inline constexpr int kMaxOrder = 4;

struct BleuStats {
  std::array<std::uint64_t, kMaxOrder> matches{};
  std::array<std::uint64_t, kMaxOrder> totals{};
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;

  BleuStats& operator+=(const BleuStats& o);
  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

using Tokens = std::vector<std::string>;

BleuStats sentence_stats(const Tokens& hyp, const Tokens& ref);

// Corpus statistics kernels. The serial version is the reference the
// OpenMP version is tested against; both produce identical integer sums.
namespace serial {
BleuStats corpus_stats(std::span<const Tokens> hyps, std::span<const Tokens> refs);
}
namespace omp {
BleuStats corpus_stats(std::span<const Tokens> hyps, std::span<const Tokens> refs);
}

struct BleuReport {
  double score = 0.0;
  std::array<double, kMaxOrder> precisions{};
  double brevity_penalty = 1.0;
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;
  bool normalized = false;
  bool smoothed = false;
};

/// 100 * BP * geometric mean of the four precisions. BP is 1 when the
/// hypothesis side is at least as long as the reference side, exp(1 - r/h)
/// otherwise, and 0 when the hypothesis side has no tokens.
BleuReport score(const BleuStats& stats, bool smooth = false);

/// Tokenizes one line the way corpus_bleu does.
Tokens tokenize(const std::string& line, bool normalize);

/// Throws InvalidArgument on empty input or mismatched lengths.
BleuReport corpus_bleu(std::span<const std::string> hypotheses, std::span<const std::string> references,
                       bool normalize, bool smooth = false);

/// Single-sentence BLEU for diagnostics; smoothing on by default.
BleuReport sentence_bleu(const std::string& hypothesis, const std::string& reference, bool normalize,
                         bool smooth = true);

struct MatchReport {
  std::size_t total = 0;
  std::size_t matched = 0;
  double rate = 0.0;  ///< percentage
};

MatchReport make_match_report(std::size_t matched, std::size_t total);

/// Byte equality after trimming (and canonicalization when `normalize`).
bool is_match(const std::string& hypothesis, const std::string& reference, bool normalize);

/// Throws InvalidArgument on mismatched lengths. Empty input reports rate 0.
MatchReport match_rate(std::span<const std::string> hypotheses, std::span<const std::string> references,
                       bool normalize);

/// corpus_bleu(normalize=true).score - corpus_bleu(normalize=false).score
double bleu_normalization_delta(std::span<const std::string> hypotheses,
                                std::span<const std::string> references);

/// {score, precisions, bp, hyp_len, ref_len, normalized, smoothed, tokenizer, level}
nlohmann::json to_json(const BleuReport& r);
/// {total, matched, rate}
nlohmann::json to_json(const MatchReport& r);

}  // namespace hgec::metrics
