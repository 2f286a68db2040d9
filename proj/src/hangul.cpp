#include "hgec/hangul.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <utility>

#include "hgec/error.hpp"
#include "hgec/unicode.hpp"

namespace hgec::hangul {

namespace {

struct JamoPair {
  char32_t conjoining;
  char32_t compatibility;
};

constexpr JamoPair kJamoTable[] = {
#include "jamo_table.inc"
};

static_assert(std::is_sorted(std::begin(kJamoTable), std::end(kJamoTable),
                             [](const JamoPair& a, const JamoPair& b) {
                               return a.conjoining < b.conjoining;
                             }));

const icu::Normalizer2& nfc() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
      throw Error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
    }
    return n;
  }();
  return *instance;
}

std::u32string nfc_compose(const std::u32string& text) {
  const icu::UnicodeString src =
      icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()),
                                    static_cast<int32_t>(text.size()));
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2& n = nfc();
  if (n.isNormalized(src, status) && U_SUCCESS(status)) return text;
  status = U_ZERO_ERROR;
  const icu::UnicodeString out = n.normalize(src, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  std::u32string result(static_cast<std::size_t>(out.countChar32()), U'\0');
  UErrorCode conv = U_ZERO_ERROR;
  out.toUTF32(reinterpret_cast<UChar32*>(result.data()), static_cast<int32_t>(result.size()), conv);
  return result;
}

bool ignorable_for_class(char32_t cp) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (mask & (U_GC_P_MASK | U_GC_S_MASK | U_GC_CC_MASK | U_GC_CF_MASK)) != 0;
}

std::vector<CodePointRange> normalize_ranges(std::vector<CodePointRange> ranges) {
  std::sort(ranges.begin(), ranges.end(),
            [](const CodePointRange& a, const CodePointRange& b) { return a.first < b.first; });
  std::vector<CodePointRange> merged;
  for (const auto& r : ranges) {
    if (!merged.empty() && r.first <= merged.back().last + 1) {
      merged.back().last = std::max(merged.back().last, r.last);
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

std::optional<char32_t> parse_code_point(std::string_view s) {
  if (s.size() < 3 || (s[0] != 'U' && s[0] != 'u') || s[1] != '+') return std::nullopt;
  s.remove_prefix(2);
  std::uint32_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, 16);
  if (ec != std::errc() || ptr != s.data() + s.size() || value > 0x10FFFF) return std::nullopt;
  return static_cast<char32_t>(value);
}

std::string_view strip_ascii(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<char32_t> compatibility_jamo(char32_t conjoining) {
  const auto* it = std::lower_bound(
      std::begin(kJamoTable), std::end(kJamoTable), conjoining,
      [](const JamoPair& p, char32_t cp) { return p.conjoining < cp; });
  if (it == std::end(kJamoTable) || it->conjoining != conjoining) return std::nullopt;
  return it->compatibility;
}

CanonicalText to_canonical(std::string_view text) {
  std::size_t replaced = 0;
  std::u32string cps = nfc_compose(utf8::decode(text, replaced));
  // After NFC every composable L V (T) run is a precomposed syllable, so any
  // conjoining jamo still present stands alone.
  for (char32_t& cp : cps) {
    if (is_conjoining_jamo(cp)) {
      if (auto compat = compatibility_jamo(cp)) cp = *compat;
    }
  }
  return CanonicalText(utf8::encode(cps), replaced);
}

std::vector<CanonicalText> to_canonical_batch(std::span<const std::string> texts) {
  std::vector<CanonicalText> out(texts.size());
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = to_canonical(texts[static_cast<std::size_t>(i)]);
  }
  return out;
}

// --- emoji ---------------------------------------------------------------

EmojiRanges::EmojiRanges(std::vector<CodePointRange> ranges)
    : ranges_(normalize_ranges(std::move(ranges))) {}

const EmojiRanges& EmojiRanges::defaults() {
  static const EmojiRanges ranges({
      {0x200D, 0x200D},    // zero width joiner
      {0x20E3, 0x20E3},    // combining enclosing keycap
      {0x2600, 0x26FF},    // Miscellaneous Symbols
      {0x2700, 0x27BF},    // Dingbats
      {0x2B50, 0x2B50},    // star
      {0x2B55, 0x2B55},    // heavy large circle
      {0xFE0E, 0xFE0F},    // variation selectors 15/16
      {0x1F000, 0x1F02F},  // Mahjong Tiles
      {0x1F0A0, 0x1F0FF},  // Playing Cards
      {0x1F1E6, 0x1F1FF},  // regional indicators (flags)
      {0x1F300, 0x1F5FF},  // Misc Symbols and Pictographs
      {0x1F600, 0x1F64F},  // Emoticons
      {0x1F680, 0x1F6FF},  // Transport and Map Symbols
      {0x1F7E0, 0x1F7EB},  // colored circles and squares
      {0x1F900, 0x1F9FF},  // Supplemental Symbols and Pictographs
      {0x1FA70, 0x1FAFF},  // Symbols and Pictographs Extended-A
      {0xE0020, 0xE007F},  // tag characters (subdivision flags)
  });
  return ranges;
}

EmojiRanges EmojiRanges::parse(std::string_view text) {
  std::vector<CodePointRange> ranges;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = strip_ascii(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    std::optional<char32_t> first;
    std::optional<char32_t> last;
    if (const auto dots = line.find(".."); dots != std::string_view::npos) {
      first = parse_code_point(strip_ascii(line.substr(0, dots)));
      last = parse_code_point(strip_ascii(line.substr(dots + 2)));
    } else {
      first = last = parse_code_point(line);
    }
    if (!first || !last || *first > *last) {
      throw FormatError("emoji range file line " + std::to_string(line_no) + ": expected "
                        "'U+XXXX..U+YYYY', got '" + std::string(line) + "'");
    }
    ranges.push_back({*first, *last});
    if (end == text.size()) break;
  }
  return EmojiRanges(std::move(ranges));
}

EmojiRanges EmojiRanges::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read emoji range file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool EmojiRanges::contains(char32_t cp) const {
  const auto it = std::upper_bound(
      ranges_.begin(), ranges_.end(), cp,
      [](char32_t c, const CodePointRange& r) { return c < r.first; });
  if (it == ranges_.begin()) return false;
  return cp <= std::prev(it)->last;
}

std::string strip_emoji(std::string_view text, const EmojiRanges& ranges) {
  std::u32string cps = utf8::decode(text);
  std::erase_if(cps, [&](char32_t cp) { return ranges.contains(cp); });
  return utf8::encode(cps);
}

// --- classification ------------------------------------------------------

std::string_view to_string(ContentClass c) {
  switch (c) {
    case ContentClass::korean: return "korean";
    case ContentClass::english_only: return "english_only";
    case ContentClass::jamo_only: return "jamo_only";
    case ContentClass::empty: return "empty";
    case ContentClass::mixed: return "mixed";
  }
  return "mixed";
}

ContentClass classify_content(const CanonicalText& text) {
  bool any_visible = false;
  bool any_significant = false;
  bool all_jamo = true;
  bool all_latin = true;
  for (char32_t cp : utf8::decode(text.str())) {
    if (utf8::is_whitespace(cp)) continue;
    any_visible = true;
    if (is_syllable(cp)) return ContentClass::korean;
    if (ignorable_for_class(cp)) continue;
    any_significant = true;
    if (!is_compatibility_jamo(cp)) all_jamo = false;
    if (!((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z'))) all_latin = false;
  }
  if (!any_visible) return ContentClass::empty;
  if (!any_significant) return ContentClass::mixed;
  if (all_jamo) return ContentClass::jamo_only;
  if (all_latin) return ContentClass::english_only;
  return ContentClass::mixed;
}

}  // namespace hgec::hangul
