#include "prefeval/text.hpp"

#include <algorithm>
#include <cctype>

namespace prefeval::text {

namespace {

bool is_unicode_space(char32_t cp) {
    switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 code point at `i`, advancing `i`. Malformed bytes are
// consumed one at a time and returned verbatim so counting never stalls.
char32_t next_codepoint(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { extra = 1; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { extra = 2; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { extra = 3; cp = b0 & 0x07; }
    else { ++i; return b0; }
    if (i + extra >= s.size()) { ++i; return b0; }
    for (std::size_t k = 1; k <= extra; ++k) {
        if ((byte(i + k) & 0xC0) != 0x80) { ++i; return b0; }
        cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    i += 1 + extra;
    return cp;
}

} // namespace

std::int64_t count_words(std::string_view s) {
    std::int64_t words = 0;
    bool in_word = false;
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp = next_codepoint(s, i);
        if (is_unicode_space(cp)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

std::vector<std::string> tokenize_words(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        bool word_char = std::isalnum(u) || c == '\'' || u >= 0x80;
        if (word_char) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

namespace {
bool is_word_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || u >= 0x80;
}
} // namespace

bool is_whole_word(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) return false;
    if (pos > 0 && is_word_char(s[pos - 1])) return false;
    if (pos + len < s.size() && is_word_char(s[pos + len])) return false;
    return true;
}

bool contains_whole_word(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    std::size_t pos = haystack.find(needle);
    while (pos != std::string_view::npos) {
        if (is_whole_word(haystack, pos, needle.size())) return true;
        pos = haystack.find(needle, pos + 1);
    }
    return false;
}

std::string_view family_name(std::string_view name) {
    std::string_view t = trim(name);
    std::size_t pos = t.find_last_of(" \t\n\r");
    return pos == std::string_view::npos ? t : t.substr(pos + 1);
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    if (s.empty()) return lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            std::string_view line = s.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            start = i + 1;
        }
    }
    if (lines.back().empty() && s.back() == '\n') lines.pop_back();
    return lines;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace prefeval::text
