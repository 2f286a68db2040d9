#include "hgec/metrics.hpp"

#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hgec/error.hpp"
#include "hgec/hangul.hpp"
#include "hgec/unicode.hpp"

namespace hgec::metrics {

namespace {

void check_lengths(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw InvalidArgument("hypotheses (" + std::to_string(hyps) + ") and references (" +
                          std::to_string(refs) + ") differ in length");
  }
}

std::vector<Tokens> tokenize_all(std::span<const std::string> lines, bool normalize) {
  std::vector<Tokens> out(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = tokenize(lines[k], normalize);
  }
  return out;
}

// Tokens never contain whitespace, so a space-joined key is unambiguous.
using NgramCounts = std::unordered_map<std::string, std::uint64_t>;

std::array<NgramCounts, kMaxOrder> count_ngrams(const Tokens& tokens) {
  std::array<NgramCounts, kMaxOrder> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string key;
    for (int n = 0; n < kMaxOrder && i + static_cast<std::size_t>(n) < tokens.size(); ++n) {
      if (n > 0) key.push_back(' ');
      key += tokens[i + static_cast<std::size_t>(n)];
      ++counts[static_cast<std::size_t>(n)][key];
    }
  }
  return counts;
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_length += o.hyp_length;
  ref_length += o.ref_length;
  return *this;
}

BleuStats sentence_stats(const Tokens& hyp, const Tokens& ref) {
  BleuStats s;
  s.hyp_length = hyp.size();
  s.ref_length = ref.size();
  const auto hyp_counts = count_ngrams(hyp);
  const auto ref_counts = count_ngrams(ref);
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    s.totals[n] = hyp.size() > n ? hyp.size() - n : 0;
    for (const auto& [gram, count] : hyp_counts[n]) {
      const auto it = ref_counts[n].find(gram);
      if (it != ref_counts[n].end()) s.matches[n] += std::min(count, it->second);
    }
  }
  return s;
}

namespace serial {

BleuStats corpus_stats(std::span<const Tokens> hyps, std::span<const Tokens> refs) {
  check_lengths(hyps.size(), refs.size());
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += sentence_stats(hyps[i], refs[i]);
  return total;
}

}  // namespace serial

namespace omp {

BleuStats corpus_stats(std::span<const Tokens> hyps, std::span<const Tokens> refs) {
  check_lengths(hyps.size(), refs.size());
  BleuStats total;
  const auto n = static_cast<std::ptrdiff_t>(hyps.size());
#pragma omp parallel
  {
    BleuStats local;
#pragma omp for schedule(dynamic, 64) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      local += sentence_stats(hyps[k], refs[k]);
    }
#pragma omp critical(hgec_bleu_reduce)
    total += local;
  }
  return total;
}

}  // namespace omp

BleuReport score(const BleuStats& stats, bool smooth) {
  BleuReport r;
  r.smoothed = smooth;
  r.hyp_length = stats.hyp_length;
  r.ref_length = stats.ref_length;

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    double p;
    if (smooth && n > 0) {
      p = static_cast<double>(stats.matches[n] + 1) / static_cast<double>(stats.totals[n] + 1);
    } else if (stats.totals[n] == 0) {
      p = 1.0;
    } else {
      p = static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]);
    }
    r.precisions[n] = p;
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }

  if (stats.hyp_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (stats.hyp_length >= stats.ref_length) {
    r.brevity_penalty = 1.0;
  } else {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(stats.ref_length) /
                                           static_cast<double>(stats.hyp_length));
  }

  if (zero || r.brevity_penalty == 0.0) {
    r.score = 0.0;
  } else {
    r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / kMaxOrder);
  }
  return r;
}

Tokens tokenize(const std::string& line, bool normalize) {
  return normalize ? utf8::split_whitespace(hangul::to_canonical(line).str()) : utf8::split_whitespace(line);
}

BleuReport corpus_bleu(std::span<const std::string> hypotheses, std::span<const std::string> references,
                       bool normalize, bool smooth) {
  check_lengths(hypotheses.size(), references.size());
  if (hypotheses.empty()) throw InvalidArgument("corpus_bleu needs at least one sentence pair");
  const auto hyps = tokenize_all(hypotheses, normalize);
  const auto refs = tokenize_all(references, normalize);
  BleuReport r = score(omp::corpus_stats(hyps, refs), smooth);
  r.normalized = normalize;
  return r;
}

BleuReport sentence_bleu(const std::string& hypothesis, const std::string& reference, bool normalize,
                         bool smooth) {
  BleuReport r = score(sentence_stats(tokenize(hypothesis, normalize), tokenize(reference, normalize)), smooth);
  r.normalized = normalize;
  return r;
}

MatchReport make_match_report(std::size_t matched, std::size_t total) {
  MatchReport r;
  r.total = total;
  r.matched = matched;
  r.rate = total == 0 ? 0.0 : 100.0 * static_cast<double>(matched) / static_cast<double>(total);
  return r;
}

bool is_match(const std::string& hypothesis, const std::string& reference, bool normalize) {
  if (normalize) {
    return utf8::trim(hangul::to_canonical(hypothesis).str()) ==
           utf8::trim(hangul::to_canonical(reference).str());
  }
  return utf8::trim(hypothesis) == utf8::trim(reference);
}

MatchReport match_rate(std::span<const std::string> hypotheses, std::span<const std::string> references,
                       bool normalize) {
  check_lengths(hypotheses.size(), references.size());
  std::size_t matched = 0;
  const auto n = static_cast<std::ptrdiff_t>(hypotheses.size());
#pragma omp parallel for reduction(+ : matched) schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (is_match(hypotheses[k], references[k], normalize)) ++matched;
  }
  return make_match_report(matched, hypotheses.size());
}

double bleu_normalization_delta(std::span<const std::string> hypotheses,
                                std::span<const std::string> references) {
  return corpus_bleu(hypotheses, references, true).score - corpus_bleu(hypotheses, references, false).score;
}

nlohmann::json to_json(const BleuReport& r) {
  return {{"score", r.score},
          {"precisions", r.precisions},
          {"bp", r.brevity_penalty},
          {"hyp_len", r.hyp_length},
          {"ref_len", r.ref_length},
          {"normalized", r.normalized},
          {"smoothed", r.smoothed},
          {"tokenizer", "whitespace"},
          {"level", "corpus"}};
}

nlohmann::json to_json(const MatchReport& r) {
  return {{"total", r.total}, {"matched", r.matched}, {"rate", r.rate}};
}

}  // namespace hgec::metrics
