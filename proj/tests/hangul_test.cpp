#include <gtest/gtest.h>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <random>

#include "hgec/error.hpp"
#include "hgec/hangul.hpp"
#include "hgec/unicode.hpp"
#include "support.hpp"

namespace hgec::hangul {
namespace {

std::string u8(std::u32string_view s) { return utf8::encode(s); }

std::string canon(std::string_view s) { return to_canonical(s).str(); }

std::string char_name(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  char buf[256];
  const int32_t n = u_charName(static_cast<UChar32>(cp), U_UNICODE_CHAR_NAME, buf, sizeof buf, &status);
  if (U_FAILURE(status) || n <= 0) return {};
  return std::string(buf, static_cast<std::size_t>(n));
}

std::optional<char32_t> from_name(const std::string& name) {
  UErrorCode status = U_ZERO_ERROR;
  const UChar32 cp = u_charFromName(U_UNICODE_CHAR_NAME, name.c_str(), &status);
  if (U_FAILURE(status)) return std::nullopt;
  return static_cast<char32_t>(cp);
}

std::u32string nfkc(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  const icu::UnicodeString out = n->normalize(icu::UnicodeString(static_cast<UChar32>(cp)), status);
  std::u32string r;
  for (int32_t i = 0; i < out.length(); i = out.moveIndex32(i, 1)) r.push_back(static_cast<char32_t>(out.char32At(i)));
  return r;
}

TEST(Canonical, NonKoreanTextUnchanged) { EXPECT_EQ(canon("abc 123"), "abc 123"); }

TEST(Canonical, ComposesDecomposedSyllable) { EXPECT_EQ(canon(u8(U"가")), u8(U"가")); }

TEST(Canonical, IsolatedConjoiningJamoBecomesCompatibility) {
  EXPECT_EQ(canon(u8(U"ᄏ")), u8(U"ㅋ"));
  EXPECT_EQ(canon(u8(U"ᄏᄏᄏ")), "ㅋㅋㅋ");
  EXPECT_EQ(canon(u8(U"ᅲᅲ")), "ㅠㅠ");
}

TEST(Canonical, TrailingConsonantAfterSyllableComposes) {
  // 가 + jongseong kiyeok composes to 각 rather than surviving as a jamo.
  EXPECT_EQ(canon(u8(U"각")), "각");
}

TEST(Canonical, PunctuationAndEmptyPreserved) {
  EXPECT_EQ(canon("진짜 한번 가 봐. 되게 예뻐."), "진짜 한번 가 봐. 되게 예뻐.");
  EXPECT_EQ(canon(""), "");
  EXPECT_TRUE(to_canonical("").empty());
}

TEST(Canonical, IllFormedBytesReplacedAndCounted) {
  const auto c = to_canonical("a\xFF" "b\xED\xA0\x80" "c");
  EXPECT_EQ(c.str(), "a\xEF\xBF\xBD" "b\xEF\xBF\xBD" "c");
  EXPECT_EQ(c.replacements(), 2u);
}

TEST(Canonical, BatchMatchesSingle) {
  std::vector<std::string> in = {"ㅋㅋ", u8(U"가"), "", "hello", u8(U"ᄏ")};
  const auto out = to_canonical_batch(in);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(out[i], to_canonical(in[i]));
}

// Every conjoining jamo maps to the compatibility letter of the same name
// (CHOSEONG/JUNGSEONG/JONGSEONG X -> LETTER X), falling back to the letter
// whose NFKC decomposition is that jamo. Names and NFKC come from ICU.
TEST(JamoTable, AgreesWithUnicodeNamesAndNfkc) {
  std::map<char32_t, char32_t> nfkc_inverse;
  for (char32_t c = 0x3131; c <= 0x318E; ++c) {
    const auto d = nfkc(c);
    if (d.size() == 1 && is_conjoining_jamo(d[0])) nfkc_inverse.emplace(d[0], c);
  }
  int mapped = 0;
  for (char32_t cp = 0x1100; cp <= 0x11FF; ++cp) {
    const std::string name = char_name(cp);
    ASSERT_FALSE(name.empty()) << std::hex << static_cast<unsigned>(cp);
    std::optional<char32_t> expected;
    for (const std::string prefix : {"HANGUL CHOSEONG ", "HANGUL JUNGSEONG ", "HANGUL JONGSEONG "}) {
      if (name.starts_with(prefix)) expected = from_name("HANGUL LETTER " + name.substr(prefix.size()));
    }
    if (!expected) {
      if (const auto it = nfkc_inverse.find(cp); it != nfkc_inverse.end()) expected = it->second;
    }
    EXPECT_EQ(compatibility_jamo(cp), expected) << name;
    mapped += expected ? 1 : 0;
  }
  EXPECT_EQ(mapped, 128);
}

TEST(JamoTable, EveryTargetIsCompatibilityJamo) {
  for (char32_t cp = 0x1100; cp <= 0x11FF; ++cp) {
    if (const auto c = compatibility_jamo(cp)) {
      EXPECT_TRUE(is_compatibility_jamo(*c));
    }
  }
  EXPECT_FALSE(compatibility_jamo(U'a'));
  EXPECT_FALSE(compatibility_jamo(0xAC00));
}

// Random strings over syllables, jamo, Latin, digits, spaces and
// punctuation, in the encodings the canonical form must collapse.
class VariantGenerator {
 public:
  explicit VariantGenerator(std::uint64_t seed) : rng_(seed) {}

  // Returns (composed-with-compat-jamo, decomposed-with-conjoining-jamo).
  std::pair<std::u32string, std::u32string> next() {
    std::u32string a;
    std::u32string b;
    const int pieces = pick(1, 8);
    for (int i = 0; i < pieces; ++i) {
      switch (pick(0, 4)) {
        case 0:
        case 1: {  // syllable: precomposed vs L V (T)
          const char32_t s = static_cast<char32_t>(0xAC00 + pick(0, 11171));
          const char32_t idx = s - 0xAC00;
          a.push_back(s);
          b.push_back(0x1100 + idx / 588);
          b.push_back(0x1161 + (idx % 588) / 28);
          if (idx % 28) b.push_back(0x11A7 + idx % 28);
          break;
        }
        case 2: {  // run of one consonant or vowel, set off by a space
          const bool vowel = pick(0, 1) == 1;
          const char32_t conj = vowel ? static_cast<char32_t>(0x1161 + pick(0, 20)) : static_cast<char32_t>(0x1100 + pick(0, 18));
          const char32_t compat = *compatibility_jamo(conj);
          const int n = pick(1, 5);
          a.push_back(U' ');
          b.push_back(U' ');
          for (int k = 0; k < n; ++k) {
            a.push_back(compat);
            b.push_back(conj);
          }
          a.push_back(U' ');
          b.push_back(U' ');
          break;
        }
        case 3: {
          const char32_t c = static_cast<char32_t>(pick(0, 1) ? U'a' + pick(0, 25) : U'0' + pick(0, 9));
          a.push_back(c);
          b.push_back(c);
          break;
        }
        default: {
          static constexpr char32_t kPunct[] = {U'.', U',', U'!', U'?', U'~', U' '};
          const char32_t c = kPunct[pick(0, 5)];
          a.push_back(c);
          b.push_back(c);
        }
      }
    }
    return {a, b};
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64 rng_;
};

TEST(Canonical, EncodingVariantsCollapseAndAreIdempotent) {
  VariantGenerator gen(20240601);
  for (int i = 0; i < 500; ++i) {
    const auto [a, b] = gen.next();
    const auto ca = to_canonical(u8(a));
    const auto cb = to_canonical(u8(b));
    ASSERT_EQ(ca, cb) << u8(a);
    EXPECT_EQ(to_canonical(ca.str()), ca);
    EXPECT_EQ(ca.str(), u8(a));  // the composed/compat spelling is already canonical
    for (const char32_t cp : utf8::decode(ca.str())) EXPECT_FALSE(is_conjoining_jamo(cp));
  }
}

TEST(Emoji, StripsDefaultRanges) {
  EXPECT_EQ(strip_emoji("좋아😀"), "좋아");
  EXPECT_EQ(strip_emoji(""), "");
  EXPECT_EQ(strip_emoji("no emoji here"), "no emoji here");
  EXPECT_EQ(strip_emoji("a👍🏽b❤️c🇰🇷"), "abc");
}

TEST(Emoji, NeverGrowsAndShrinksOnlyWithEmoji) {
  std::mt19937_64 rng(7);
  const std::vector<char32_t> alphabet = {U'가', U'ㅋ', U'a', U' ', U'.', 0x1F600, 0x1F44D, 0x2764, 0xFE0F, 0x1F1F0};
  for (int i = 0; i < 300; ++i) {
    std::u32string s;
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    const std::string out = strip_emoji(u8(s));
    const auto len_in = s.size();
    const auto len_out = utf8::length(out);
    const bool has_emoji = std::any_of(s.begin(), s.end(), [](char32_t c) { return EmojiRanges::defaults().contains(c); });
    EXPECT_LE(len_out, len_in);
    EXPECT_EQ(len_out == len_in, !has_emoji);
  }
}

TEST(Emoji, RangeFileOverridesDefaults) {
  const auto r = EmojiRanges::parse("# only the smileys\nU+1F600..U+1F64F\nU+2764  # heart\n\n");
  EXPECT_TRUE(r.contains(0x1F600));
  EXPECT_TRUE(r.contains(0x2764));
  EXPECT_FALSE(r.contains(0x1F44D));
  EXPECT_EQ(strip_emoji("a😀👍", r), "a👍");
  EXPECT_THROW(EmojiRanges::parse("U+ZZZZ\n"), FormatError);
  EXPECT_THROW(EmojiRanges::parse("U+20..U+10\n"), FormatError);
}

TEST(Emoji, BundledRangeFileMatchesDefaults) {
  const auto file = EmojiRanges::load(HGEC_RESOURCE_DIR "/emoji_ranges.txt");
  const auto defaults = EmojiRanges::defaults().ranges();
  ASSERT_EQ(file.ranges().size(), defaults.size());
  for (std::size_t i = 0; i < defaults.size(); ++i) {
    EXPECT_EQ(file.ranges()[i].first, defaults[i].first);
    EXPECT_EQ(file.ranges()[i].last, defaults[i].last);
  }
}

TEST(Classify, TypicalRows) {
  EXPECT_EQ(classify_content(to_canonical("ㅋㅋㅋㅋㅋㅋ")), ContentClass::jamo_only);
  EXPECT_EQ(classify_content(to_canonical("hello")), ContentClass::english_only);
  EXPECT_EQ(classify_content(to_canonical("감자가 맛있어요.")), ContentClass::korean);
}

TEST(Classify, EdgeCases) {
  EXPECT_EQ(classify_content(to_canonical("")), ContentClass::empty);
  EXPECT_EQ(classify_content(to_canonical("  \t ")), ContentClass::empty);
  EXPECT_EQ(classify_content(to_canonical("ㅋㅋ!! ㅠㅠ")), ContentClass::jamo_only);
  EXPECT_EQ(classify_content(to_canonical(u8(U"ᄏᄏ"))), ContentClass::jamo_only);
  EXPECT_EQ(classify_content(to_canonical("Hello, world!")), ContentClass::english_only);
  EXPECT_EQ(classify_content(to_canonical("OK 좋아")), ContentClass::korean);
  EXPECT_EQ(classify_content(to_canonical("123")), ContentClass::mixed);
  EXPECT_EQ(classify_content(to_canonical("abc123")), ContentClass::mixed);
  EXPECT_EQ(classify_content(to_canonical("ㅋㅋ lol")), ContentClass::mixed);
  EXPECT_EQ(classify_content(to_canonical("...!?")), ContentClass::mixed);
  EXPECT_EQ(classify_content(to_canonical("日本")), ContentClass::mixed);
}

TEST(Classify, ExactlyOneTagForRandomInputs) {
  std::mt19937_64 rng(99);
  const std::vector<char32_t> alphabet = {U'가', U'ㅋ', U'a', U'Z', U'1', U' ', U'.', U'日', 0x1100};
  for (int i = 0; i < 500; ++i) {
    std::u32string s;
    const int n = static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    const auto c = to_canonical(u8(s));
    const ContentClass tag = classify_content(c);
    EXPECT_EQ(classify_content(c), tag);
    const std::u32string d = utf8::decode(c.str());
    const bool has_syllable = std::any_of(d.begin(), d.end(), is_syllable);
    EXPECT_EQ(tag == ContentClass::korean, has_syllable) << c.str();
  }
}

TEST(Utf8, TrimAndSplitUseUnicodeWhitespace) {
  EXPECT_EQ(utf8::trim("　 가 \t"), "가");
  EXPECT_EQ(utf8::split_whitespace(" a b  c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(utf8::count_whitespace_tokens(""), 0u);
  EXPECT_EQ(utf8::length("가a"), 2u);
}

}  // namespace
}  // namespace hgec::hangul
