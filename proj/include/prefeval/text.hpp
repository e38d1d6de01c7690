#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prefeval::text {

/// Number of whitespace-delimited tokens in `s`. Whitespace follows the
/// Unicode definition (ASCII space/tab/newlines plus NBSP, the U+2000 block,
/// line/paragraph separators and ideographic space).
std::int64_t count_words(std::string_view s);

/// Lowercased alphanumeric tokens ("don't" keeps its apostrophe). Used by the
/// lexical similarity metrics and title normalization.
std::vector<std::string> tokenize_words(std::string_view s);

std::string to_lower(std::string_view s);

/// True if s[pos, pos+len) is delimited by non-word characters on both sides.
/// Word characters are ASCII alphanumerics, '_' and any non-ASCII byte.
bool is_whole_word(std::string_view s, std::size_t pos, std::size_t len);

/// True if `needle` occurs in `haystack` delimited as a whole word.
bool contains_whole_word(std::string_view haystack, std::string_view needle);

/// Final whitespace-delimited token of `name` (the name itself if single-token).
std::string_view family_name(std::string_view name);

std::string_view trim(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

/// FNV-1a 64-bit over raw bytes; used for run-manifest content hashes.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace prefeval::text
