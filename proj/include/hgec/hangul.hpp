#pragma once

// Hangul text canonicalization and corpus content classification.
//
// Canonical form: NFC-composed text in which every conjoining jamo
// (U+1100..U+11FF) left outside a composed syllable is rewritten as its
// Hangul Compatibility Jamo letter (U+3131..U+318E). Two strings that differ
// only in jamo encoding or composition form have the same canonical form.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hgec::hangul {

/// UTF-8 text known to be in canonical form. Only `to_canonical` builds one.
class CanonicalText {
 public:
  CanonicalText() = default;

  const std::string& str() const noexcept { return value_; }
  /// Ill-formed UTF-8 sequences replaced by U+FFFD while canonicalizing.
  std::size_t replacements() const noexcept { return replacements_; }
  bool empty() const noexcept { return value_.empty(); }

  friend bool operator==(const CanonicalText& a, const CanonicalText& b) {
    return a.value_ == b.value_;
  }

 private:
  friend CanonicalText to_canonical(std::string_view text);
  CanonicalText(std::string value, std::size_t replacements)
      : value_(std::move(value)), replacements_(replacements) {}

  std::string value_;
  std::size_t replacements_ = 0;
};

CanonicalText to_canonical(std::string_view text);

/// Canonicalizes every element; parallel over elements.
std::vector<CanonicalText> to_canonical_batch(std::span<const std::string> texts);

/// Compatibility letter for a conjoining jamo, if the Unicode compatibility
/// correspondence defines one.
std::optional<char32_t> compatibility_jamo(char32_t conjoining);

inline constexpr char32_t kSyllableFirst = 0xAC00;
inline constexpr char32_t kSyllableLast = 0xD7A3;

constexpr bool is_syllable(char32_t cp) { return cp >= kSyllableFirst && cp <= kSyllableLast; }
constexpr bool is_conjoining_jamo(char32_t cp) { return cp >= 0x1100 && cp <= 0x11FF; }
constexpr bool is_compatibility_jamo(char32_t cp) { return cp >= 0x3131 && cp <= 0x318E; }
constexpr bool is_hangul(char32_t cp) {
  return is_syllable(cp) || is_conjoining_jamo(cp) || (cp >= 0x3130 && cp <= 0x318F);
}

// --- emoji ---------------------------------------------------------------

struct CodePointRange {
  char32_t first;
  char32_t last;
};

/// Set of code-point ranges removed by `strip_emoji`.
class EmojiRanges {
 public:
  /// Emoticons, pictographs, transport, supplemental symbols, regional
  /// indicators, dingbats and the joiners/selectors used in emoji sequences.
  static const EmojiRanges& defaults();

  /// Loads "U+XXXX..U+YYYY" (or a single "U+XXXX") per line; '#' starts a
  /// comment. Throws FormatError on a malformed line, IoError if unreadable.
  static EmojiRanges load(const std::filesystem::path& path);
  static EmojiRanges parse(std::string_view text);

  explicit EmojiRanges(std::vector<CodePointRange> ranges);

  bool contains(char32_t cp) const;
  std::span<const CodePointRange> ranges() const noexcept { return ranges_; }

 private:
  std::vector<CodePointRange> ranges_;  // sorted, merged
};

std::string strip_emoji(std::string_view text, const EmojiRanges& ranges = EmojiRanges::defaults());

// --- classification ------------------------------------------------------

enum class ContentClass { korean, english_only, jamo_only, empty, mixed };

std::string_view to_string(ContentClass c);

/// Whitespace, punctuation (P*), symbols (S*) and control/format characters
/// are ignored when deciding the class; letters and digits are significant.
/// Callers strip emoji before classifying.
ContentClass classify_content(const CanonicalText& text);

}  // namespace hgec::hangul
