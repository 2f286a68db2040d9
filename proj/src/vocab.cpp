#include "hgec/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "hgec/error.hpp"
#include "hgec/hangul.hpp"
#include "hgec/unicode.hpp"

namespace hgec::vocab {

using json = nlohmann::json;

namespace {

constexpr char32_t kMarkerCp = 0x2581;
constexpr std::size_t kSyllableCount = hangul::kSyllableLast - hangul::kSyllableFirst + 1;

// Byte offset of every code point boundary in `s`, including s.size().
std::vector<std::size_t> boundaries(std::string_view s) {
  std::vector<std::size_t> out;
  out.reserve(s.size() + 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) out.push_back(i);
  }
  out.push_back(s.size());
  return out;
}

bool row_has_unknown(std::string_view row, const GreedyTokenizer& tok) {
  for (const auto& w : utf8::split_whitespace(row)) {
    if (tok.tokenize_word(w).unknown > 0) return true;
  }
  return false;
}

void add_syllables(std::string_view row, SyllableHistogram& hist) {
  const auto canonical = hangul::to_canonical(row);
  for (const char32_t cp : utf8::decode(canonical.str())) {
    if (hangul::is_syllable(cp)) ++hist[cp - hangul::kSyllableFirst];
  }
}

}  // namespace

// --- Vocab -----------------------------------------------------------------

std::int64_t Vocab::add(std::string token, double score) {
  if (token.empty()) throw InvalidArgument("empty vocab token");
  const auto id = static_cast<std::int64_t>(entries_.size());
  if (!index_.emplace(token, id).second) throw InvalidArgument("duplicate vocab token '" + token + "'");
  entries_.push_back({std::move(token), score});
  return id;
}

bool Vocab::contains(std::string_view token) const { return index_.contains(std::string(token)); }

std::optional<std::int64_t> Vocab::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocab::uses_word_marker() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const Entry& e) { return e.token.starts_with(kWordMarker); });
}

Vocab read_vocab(std::istream& in, std::string_view origin) {
  Vocab v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const auto where = [&] { return std::string(origin) + ":" + std::to_string(line_no) + ": "; };
    const auto tab = line.rfind('\t');
    std::string token = tab == std::string::npos ? line : line.substr(0, tab);
    double score = 0.0;
    if (tab != std::string::npos) {
      const std::string_view s = std::string_view(line).substr(tab + 1);
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), score);
      if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError(where() + "bad score '" + std::string(s) + "'");
    }
    try {
      v.add(std::move(token), score);
    } catch (const InvalidArgument& e) {
      throw FormatError(where() + e.what());
    }
  }
  return v;
}

Vocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocab " + path.string());
  return read_vocab(in, path.string());
}

void write_vocab(std::ostream& out, const Vocab& v) {
  const auto old = out.precision(17);
  for (const auto& e : v.entries()) out << e.token << '\t' << e.score << '\n';
  out.precision(old);
}

void write_vocab(const std::filesystem::path& path, const Vocab& v) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write vocab " + path.string());
  write_vocab(out, v);
}

// --- tokenizer -------------------------------------------------------------

GreedyTokenizer::GreedyTokenizer(const Vocab& vocab) : GreedyTokenizer(vocab, vocab.uses_word_marker()) {}

GreedyTokenizer::GreedyTokenizer(const Vocab& vocab, bool word_marker) : word_marker_(word_marker) {
  tokens_.reserve(vocab.size());
  for (const auto& e : vocab.entries()) {
    tokens_.insert(e.token);
    max_len_ = std::max(max_len_, utf8::length(e.token));
  }
}

GreedyTokenizer::Result GreedyTokenizer::tokenize_word(std::string_view word) const {
  std::string s;
  if (word_marker_) s.append(kWordMarker);
  s.append(word);
  const auto cut = boundaries(s);
  const std::size_t n = cut.size() - 1;

  Result r;
  std::size_t i = 0;
  while (i < n) {
    std::size_t take = 0;
    for (std::size_t len = std::min(max_len_, n - i); len > 0; --len) {
      if (tokens_.contains(s.substr(cut[i], cut[i + len] - cut[i]))) {
        take = len;
        break;
      }
    }
    if (take > 0) {
      r.tokens.push_back(s.substr(cut[i], cut[i + take] - cut[i]));
      i += take;
      continue;
    }
    const std::string ch = s.substr(cut[i], cut[i + 1] - cut[i]);
    if (!(word_marker_ && i == 0 && ch == kWordMarker)) {
      r.tokens.push_back(ch);
      ++r.unknown;
    }
    ++i;
  }
  return r;
}

std::size_t GreedyTokenizer::count_tokens(std::string_view line) const {
  std::size_t total = 0;
  for (const auto& w : utf8::split_whitespace(line)) total += tokenize_word(w).tokens.size();
  return total;
}

bool GreedyTokenizer::covers(char32_t cp) const {
  std::string ch;
  utf8::append(ch, cp);
  return tokens_.contains(ch);
}

// --- kernels -----------------------------------------------------------------

namespace serial {

TokenTally token_tally(std::span<const std::string> rows, const GreedyTokenizer& tok) {
  TokenTally t;
  for (const auto& row : rows) {
    t.tokens += tok.count_tokens(row);
    t.words += utf8::count_whitespace_tokens(row);
  }
  return t;
}

std::size_t count_unk_rows(std::span<const std::string> rows, const GreedyTokenizer& tok) {
  std::size_t n = 0;
  for (const auto& row : rows) n += row_has_unknown(row, tok) ? 1 : 0;
  return n;
}

SyllableHistogram syllable_histogram(std::span<const std::string> rows) {
  SyllableHistogram hist(kSyllableCount, 0);
  for (const auto& row : rows) add_syllables(row, hist);
  return hist;
}

}  // namespace serial

namespace omp {

TokenTally token_tally(std::span<const std::string> rows, const GreedyTokenizer& tok) {
  std::uint64_t tokens = 0;
  std::uint64_t words = 0;
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : tokens, words)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    tokens += tok.count_tokens(row);
    words += utf8::count_whitespace_tokens(row);
  }
  return {tokens, words};
}

std::size_t count_unk_rows(std::span<const std::string> rows, const GreedyTokenizer& tok) {
  std::size_t count = 0;
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : count)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (row_has_unknown(rows[static_cast<std::size_t>(i)], tok)) ++count;
  }
  return count;
}

SyllableHistogram syllable_histogram(std::span<const std::string> rows) {
  SyllableHistogram hist(kSyllableCount, 0);
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel
  {
    SyllableHistogram local(kSyllableCount, 0);
#pragma omp for schedule(dynamic, 256) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) add_syllables(rows[static_cast<std::size_t>(i)], local);
#pragma omp critical(hgec_syllable_merge)
    for (std::size_t k = 0; k < kSyllableCount; ++k) hist[k] += local[k];
  }
  return hist;
}

}  // namespace omp

double tokens_per_word(std::span<const std::string> rows, const GreedyTokenizer& tok) {
  const TokenTally t = omp::token_tally(rows, tok);
  if (t.words == 0) throw InvalidArgument("tokens per word is undefined for a corpus with no words");
  return static_cast<double>(t.tokens) / static_cast<double>(t.words);
}

std::size_t count_unk_rows(std::span<const std::string> rows, const GreedyTokenizer& tok) {
  return omp::count_unk_rows(rows, tok);
}

// --- vocab transforms ----------------------------------------------------------

bool is_korean_char(char32_t cp) { return hangul::is_hangul(cp); }

Vocab extract_script_tokens(const Vocab& v) {
  Vocab out;
  for (const auto& e : v.entries()) {
    bool korean = false;
    bool other = false;
    for (const char32_t cp : utf8::decode(e.token)) {
      if (cp == kMarkerCp) continue;
      if (is_korean_char(cp)) korean = true;
      else other = true;
    }
    if (korean && !other) out.add(e.token, e.score);
  }
  return out;
}

std::pair<Vocab, MergePlan> merge_vocab(const Vocab& base, const Vocab& donor) {
  Vocab merged = base;
  MergePlan plan;
  plan.base_size = base.size();
  plan.donor_size = donor.size();
  for (const auto& e : donor.entries()) {
    if (merged.contains(e.token)) continue;
    merged.add(e.token, e.score);
    plan.transferred_tokens.push_back(e.token);
  }
  plan.transferred = plan.transferred_tokens.size();
  plan.merged_size = merged.size();
  return {std::move(merged), std::move(plan)};
}

std::vector<RequiredChar> required_chars(std::span<const std::string> rows, std::uint64_t min_count) {
  if (min_count < 1) throw InvalidArgument("min_count must be at least 1");
  const SyllableHistogram hist = omp::syllable_histogram(rows);
  std::vector<RequiredChar> out;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    if (hist[k] > min_count) out.push_back({static_cast<char32_t>(hangul::kSyllableFirst + k), hist[k]});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RequiredChar& a, const RequiredChar& b) { return a.count > b.count; });
  return out;
}

void write_required_chars(std::ostream& out, std::span<const RequiredChar> chars) {
  for (const auto& c : chars) {
    std::string ch;
    utf8::append(ch, c.syllable);
    out << ch << '\t' << c.count << '\n';
  }
}

// --- reports -------------------------------------------------------------------

VocabReport make_vocab_report(std::span<const std::string> originals, std::span<const std::string> corrected,
                              const Vocab& v) {
  if (originals.size() != corrected.size()) throw InvalidArgument("original and corrected columns differ in length");
  const GreedyTokenizer tok(v);
  VocabReport r;
  r.rows = originals.size();
  r.vocab_size = v.size();
  r.tokens_per_word_original = tokens_per_word(originals, tok);
  r.tokens_per_word_corrected = tokens_per_word(corrected, tok);
  std::size_t unk = 0;
  const auto n = static_cast<std::ptrdiff_t>(originals.size());
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : unk)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (row_has_unknown(originals[k], tok) || row_has_unknown(corrected[k], tok)) ++unk;
  }
  r.unk_row_count = unk;
  r.script_token_count = extract_script_tokens(v).size();
  return r;
}

json to_json(const VocabReport& r) {
  return {{"tokenizer", "greedy_longest_match"},
          {"tokens_per_word_original", r.tokens_per_word_original},
          {"tokens_per_word_corrected", r.tokens_per_word_corrected},
          {"unk_row_count", r.unk_row_count},
          {"script_token_count", r.script_token_count},
          {"vocab_size", r.vocab_size},
          {"rows", r.rows}};
}

json to_json(const MergePlan& p, bool with_tokens) {
  json j = {{"base_size", p.base_size},
            {"donor_size", p.donor_size},
            {"transferred", p.transferred},
            {"merged_size", p.merged_size}};
  if (with_tokens) j["transferred_tokens"] = p.transferred_tokens;
  return j;
}

}  // namespace hgec::vocab
