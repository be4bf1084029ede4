#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace genreforge::text {

// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

// Byte length of the UTF-8 sequence starting with `lead`.
std::size_t utf8_sequence_length(unsigned char lead);

// Latin letters only: ASCII, Latin-1 Supplement and Latin Extended-A.
// That covers the six corpus languages.
bool is_letter(char32_t cp);
bool is_upper(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
char32_t to_lower(char32_t cp);

std::string to_lower(std::string_view s);

// Lowercases and collapses every whitespace run into a single space;
// leading and trailing whitespace is dropped.
std::string normalize_whitespace_lower(std::string_view s);

std::string_view trim(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// Word tokens: maximal runs of letters, digits and word-internal
// apostrophes. Everything else separates tokens.
std::vector<std::string> word_tokens(std::string_view s);

// Lowercase, with every non letter/digit removed ("Don't," -> "dont").
std::string normalize_word(std::string_view word);

}  // namespace genreforge::text
