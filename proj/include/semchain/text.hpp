#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace semchain {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool is_ascii_letter(char c);

// Guess normalisation applied by the engine: trim, lowercase, then drop
// leading and trailing non-letters. Internal non-letters are kept (such a
// word is simply out of vocabulary).
std::string sanitize_guess(std::string_view raw);

std::vector<std::string> split_whitespace(std::string_view s);

// Lowercase, cut surrounding punctuation and quotes, split on whitespace.
std::vector<std::string> response_tokens(std::string_view raw);

// Cuts at a UTF-8 code point boundary so the result has at most `max_chars`
// code points.
std::string truncate_utf8(std::string_view s, std::size_t max_chars);
std::size_t utf8_length(std::string_view s);
// Well-formed UTF-8: no stray continuation bytes, overlongs or surrogates.
bool is_valid_utf8(std::string_view s);

}  // namespace semchain
