#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hgec::utf8 {

inline constexpr char32_t kReplacement = U'�';

/// Lenient UTF-8 decode. Ill-formed sequences (including encoded surrogates
/// and overlong forms) become U+FFFD; `replaced` is incremented once per
/// substituted sequence.
std::u32string decode(std::string_view bytes, std::size_t& replaced);
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

std::size_t length(std::string_view bytes);

bool is_whitespace(char32_t cp);

/// Strips leading and trailing Unicode whitespace.
std::string trim(std::string_view bytes);

/// Splits on runs of Unicode whitespace; empty input yields no tokens.
std::vector<std::string> split_whitespace(std::string_view bytes);

std::size_t count_whitespace_tokens(std::string_view bytes);

}  // namespace hgec::utf8
