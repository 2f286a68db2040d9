#include "hgec/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace hgec::judge {

namespace {

constexpr std::array<ErrorCodeInfo, kErrorCodeCount> kTaxonomy = {{
    {ErrorCode::INS, "INS", "Insertion, where an inserted word adds redundant meaning.",
     "조사조사를 더 많이 해야겠네요.", "조사를 더 많이 해야겠네요.", "We need to do more research."},
    {ErrorCode::DEL, "DEL",
     "Deletion, where a deleted word makes the sentence awkward but still understandable.",
     "근데 그때 누 쓰려 하지 않겠냐?", "근데 그때 누구나 쓰려 하지 않겠냐?",
     "But then who wouldn't want to use it?"},
    {ErrorCode::WS, "WS", "Word Spacing, violating Korean spacing rules.", "오징어 볶음 시키자.",
     "오징어볶음 시키자.", "Let's order stirfried squid."},
    {ErrorCode::SPELL, "SPELL",
     "Spelling errors, mainly typing mistakes unrelated to grammar or sentence structure.",
     "감ㄱ자가 맛있어요.", "감자가 맛있어요.", "The potato is delicious."},
    {ErrorCode::PUNCT, "PUNCT", "Punctuation errors, incorrect use of periods, commas, etc.",
     "진짜 한번 가 봐 되게 예뻐..", "진짜 한번 가 봐. 되게 예뻐.",
     "You should really go see it. It's so pretty."},
    {ErrorCode::VERB_ADJ, "VERB_ADJ",
     "Predicate errors, incorrect use of consonants and vowels in standard Korean verbs adjectives.",
     "해시 감자에 기름이 엄청 만아. 어떻해?", "해시 감자에 기름이 엄청 많아. 어떡해?",
     "The hash browns are so oily. What should I do?"},
    {ErrorCode::PRO_NOUN, "PRO_NOUN",
     "Nominal errors, using non-standard words for nouns, pronouns, numerals, etc.",
     "애기랑 나랑 이름이 같다.", "아기랑 나랑 이름이 같다.", "The baby and I have the same name."},
    {ErrorCode::PART, "PART",
     "Particle errors, violating rules for particles that should be combined with preceding nouns.",
     "삼촌가 하와이를 갔다.", "삼촌이 하와이를 갔다.", "My uncle went to hawaii."},
    {ErrorCode::MODIFIER, "MODIFIER", "Modifier errors.", "외냐하면 예쁘기 때문이다.",
     "왜냐하면 예쁘기 때문이다.", "Because it's pretty."},
    {ErrorCode::SP_RELATION, "SP_RELATION",
     "Sentence coherence errors, changing the structure or meaning of the sentence.", "너는결코 혼자야.",
     "너는 결코 혼자가 아니야.", "You are never alone."},
    {ErrorCode::END, "END", "Ending errors, occurring in tense, connective endings, or final endings.",
     "먹던가 말던가 마음대로 해.", "먹든가 말든가 마음대로 해.",
     "Whether you eat or not, do as you please."},
    {ErrorCode::SHORT, "SHORT", "Affix errors, occurring in prefixes or suffixes.",
     "솔직이 말해서 출산률이 너무 낮다.", "솔직히 말해서 출산율이 너무 낮다.",
     "To be honest, the birth rate is too low."},
}};

struct Alias {
  std::string_view alias;
  ErrorCode code;
};

// Keys are already uppercased with '-' and ' ' folded to '_'.
constexpr Alias kAliases[] = {
    {"PRONOUN", ErrorCode::PRO_NOUN},     {"NOUN", ErrorCode::PRO_NOUN},
    {"VERBADJ", ErrorCode::VERB_ADJ},     {"VERB", ErrorCode::VERB_ADJ},
    {"SPRELATION", ErrorCode::SP_RELATION}, {"SPACING", ErrorCode::WS},
    {"WORD_SPACING", ErrorCode::WS},      {"PUNCTUATION", ErrorCode::PUNCT},
    {"SPELLING", ErrorCode::SPELL},       {"INSERTION", ErrorCode::INS},
    {"DELETION", ErrorCode::DEL},         {"ENDING", ErrorCode::END},
    {"PARTICLE", ErrorCode::PART},        {"AFFIX", ErrorCode::SHORT},
};

}  // namespace

std::span<const ErrorCodeInfo, kErrorCodeCount> taxonomy() { return kTaxonomy; }

const ErrorCodeInfo& info(ErrorCode code) { return kTaxonomy[static_cast<std::size_t>(code)]; }

std::string_view to_string(ErrorCode code) { return info(code).name; }

std::optional<ErrorCode> parse_error_code(std::string_view token) {
  std::string key;
  for (unsigned char c : token) {
    if (c == '-' || c == ' ') {
      key.push_back('_');
    } else {
      key.push_back(static_cast<char>(std::toupper(c)));
    }
  }
  const auto first = key.find_first_not_of("_\t\r\n\"'");
  if (first == std::string::npos) return std::nullopt;
  key = key.substr(first, key.find_last_not_of("_\t\r\n\"'") - first + 1);

  for (const auto& entry : kTaxonomy) {
    if (entry.name == key) return entry.code;
  }
  for (const auto& a : kAliases) {
    if (a.alias == key) return a.code;
  }
  return std::nullopt;
}

}  // namespace hgec::judge
