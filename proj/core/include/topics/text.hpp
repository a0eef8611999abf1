#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace topics {

// Lower-cases ASCII letters in place; non-ASCII bytes pass through untouched.
std::string to_lower(std::string_view s);

// True for ASCII punctuation characters.
bool is_punct_char(char c);

// True if the token consists of digits plus commas, periods or hyphens
// appearing strictly between digits ("29", "1,000", "3.14").
bool is_numeric_token(std::string_view token);

// Normalizes raw text into the word list used everywhere downstream:
// lower-case, every ASCII punctuation character becomes its own word,
// whitespace collapsed.
std::vector<std::string> normalize_words(std::string_view text);

// Lower-cases and collapses internal whitespace to single spaces. Used for
// titles and span strings; punctuation is left attached.
std::string normalize_phrase(std::string_view s);

std::vector<std::string> split_ws(std::string_view s);
std::string join_words(const std::vector<std::string>& words,
                       std::size_t begin, std::size_t end);

// FNV-1a, the stable hash used for document embeddings and vocabulary
// fingerprints.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 14695981039346656037ull);
std::string to_hex(std::uint64_t v);

}  // namespace topics
