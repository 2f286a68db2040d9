#pragma once

// Tokenizer-vocabulary analysis: coverage and fertility statistics under a
// greedy longest-match tokenizer, unknown-character census, Hangul token
// extraction, and base + donor vocabulary merging.
//
// Vocab interchange is TSV, one "token<TAB>score" per line; a token's id is
// its zero-based line number. This is the layout of an exported
// SentencePiece .vocab file.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hgec::vocab {

/// SentencePiece word-start marker (U+2581).
inline constexpr std::string_view kWordMarker = "▁";

struct Entry {
  std::string token;
  double score = 0.0;
};

class Vocab {
 public:
  Vocab() = default;

  /// Appends with id = size(). Throws InvalidArgument for an empty or
  /// duplicate token.
  std::int64_t add(std::string token, double score = 0.0);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(std::string_view token) const;
  std::optional<std::int64_t> id(std::string_view token) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const Entry& at(std::int64_t id) const { return entries_.at(static_cast<std::size_t>(id)); }

  /// True when some token starts with the word marker.
  bool uses_word_marker() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::int64_t> index_;
};

/// Missing scores read as 0. Throws IoError, FormatError (duplicate or empty
/// token, bad score).
Vocab load_vocab(const std::filesystem::path& path);
Vocab read_vocab(std::istream& in, std::string_view origin = "<stream>");
void write_vocab(std::ostream& out, const Vocab& v);
void write_vocab(const std::filesystem::path& path, const Vocab& v);

/// Greedy longest-match subword tokenizer over a vocab. Characters no token
/// starts with become one unknown token each. With the word marker enabled
/// each word is tokenized as marker + word; a bare marker that matches no
/// token is dropped rather than counted.
class GreedyTokenizer {
 public:
  explicit GreedyTokenizer(const Vocab& vocab);
  GreedyTokenizer(const Vocab& vocab, bool word_marker);

  struct Result {
    std::vector<std::string> tokens;
    std::size_t unknown = 0;
  };

  Result tokenize_word(std::string_view word) const;
  /// Subword token count of a whitespace-delimited line.
  std::size_t count_tokens(std::string_view line) const;

  /// The character has a single-character token, so it never tokenizes to
  /// an unknown.
  bool covers(char32_t cp) const;

  bool word_marker() const noexcept { return word_marker_; }

 private:
  std::unordered_set<std::string> tokens_;
  std::size_t max_len_ = 0;  ///< longest token, in code points
  bool word_marker_ = false;
};

struct TokenTally {
  std::uint64_t tokens = 0;
  std::uint64_t words = 0;

  friend bool operator==(const TokenTally&, const TokenTally&) = default;
};

/// 0xAC00..0xD7A3 counts, indexed by code point - 0xAC00.
using SyllableHistogram = std::vector<std::uint64_t>;

// Row-parallel counting kernels; serial:: is the reference for omp::.
namespace serial {
TokenTally token_tally(std::span<const std::string> rows, const GreedyTokenizer& tok);
std::size_t count_unk_rows(std::span<const std::string> rows, const GreedyTokenizer& tok);
SyllableHistogram syllable_histogram(std::span<const std::string> rows);
}  // namespace serial
namespace omp {
TokenTally token_tally(std::span<const std::string> rows, const GreedyTokenizer& tok);
std::size_t count_unk_rows(std::span<const std::string> rows, const GreedyTokenizer& tok);
SyllableHistogram syllable_histogram(std::span<const std::string> rows);
}  // namespace omp

/// Total subword tokens / total whitespace words. Throws InvalidArgument
/// when the corpus has no words.
double tokens_per_word(std::span<const std::string> rows, const GreedyTokenizer& tok);

/// Rows whose tokenization yields at least one unknown token.
std::size_t count_unk_rows(std::span<const std::string> rows, const GreedyTokenizer& tok);

/// Hangul syllable, Jamo or Compatibility Jamo code point.
bool is_korean_char(char32_t cp);

/// Tokens whose every character other than the word marker is Korean, in
/// vocab order with fresh dense ids. A token made only of markers is not
/// Korean.
Vocab extract_script_tokens(const Vocab& v);

struct MergePlan {
  std::size_t base_size = 0;
  std::size_t donor_size = 0;
  std::size_t transferred = 0;
  std::size_t merged_size = 0;
  std::vector<std::string> transferred_tokens;
};

/// Base entries keep id and score; donor tokens missing from base follow in
/// donor order.
std::pair<Vocab, MergePlan> merge_vocab(const Vocab& base, const Vocab& donor);

struct RequiredChar {
  char32_t syllable;
  std::uint64_t count;

  friend bool operator==(const RequiredChar&, const RequiredChar&) = default;
};

/// Hangul syllables occurring more than `min_count` times in the canonical
/// form of the rows, by count descending then code point. Throws
/// InvalidArgument when min_count < 1.
std::vector<RequiredChar> required_chars(std::span<const std::string> rows, std::uint64_t min_count = 5);

/// One "<char>\t<count>" line per entry.
void write_required_chars(std::ostream& out, std::span<const RequiredChar> chars);

struct VocabReport {
  double tokens_per_word_original = 0.0;
  double tokens_per_word_corrected = 0.0;
  std::size_t unk_row_count = 0;  ///< rows where either side has an unknown token
  std::size_t script_token_count = 0;
  std::size_t vocab_size = 0;
  std::size_t rows = 0;
};

/// Statistics over parallel original/corrected columns.
VocabReport make_vocab_report(std::span<const std::string> originals, std::span<const std::string> corrected,
                              const Vocab& v);

nlohmann::json to_json(const VocabReport& r);
nlohmann::json to_json(const MergePlan& p, bool with_tokens = false);

}  // namespace hgec::vocab
