#pragma once

// Korean grammatical error taxonomy used by the judge protocol: twelve codes,
// each with a definition and one incorrect/correct example sentence.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace hgec::judge {

enum class ErrorCode : std::uint8_t {
  INS,
  DEL,
  WS,
  SPELL,
  PUNCT,
  VERB_ADJ,
  PRO_NOUN,
  PART,
  MODIFIER,
  SP_RELATION,
  END,
  SHORT,
};

inline constexpr std::size_t kErrorCodeCount = 12;

struct ErrorCodeInfo {
  ErrorCode code;
  std::string_view name;
  std::string_view definition;
  std::string_view incorrect;
  std::string_view correct;
  std::string_view gloss;  ///< English rendering of the correct sentence
};

/// All twelve codes in taxonomy order (INS first, SHORT last).
std::span<const ErrorCodeInfo, kErrorCodeCount> taxonomy();
const ErrorCodeInfo& info(ErrorCode code);
std::string_view to_string(ErrorCode code);

/// Uppercases and trims, then accepts canonical names and common aliases
/// ("PRO-NOUN", "PRONOUN", "VERB-ADJ", "SP RELATION", ...).
std::optional<ErrorCode> parse_error_code(std::string_view token);

/// The eleven codes reported in distribution tables, in table row order
/// (alphabetical; SHORT is excluded).
inline constexpr std::array<ErrorCode, 11> kTableOrder = {
    ErrorCode::DEL,  ErrorCode::END,   ErrorCode::INS,   ErrorCode::MODIFIER,    ErrorCode::PART,    ErrorCode::PRO_NOUN,
    ErrorCode::PUNCT, ErrorCode::SPELL, ErrorCode::SP_RELATION, ErrorCode::VERB_ADJ, ErrorCode::WS,
};

}  // namespace hgec::judge
