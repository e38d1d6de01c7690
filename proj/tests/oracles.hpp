// Independent reference implementations used to check the production code.
// These deliberately take the naive definitional route (two-pass covariance,
// counting ranks, O(n^2) pair enumeration, permutation search) and must stay
// decoupled from the library's implementations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace oracles {

/// Two-pass covariance Pearson.
inline double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return cov / std::sqrt(vx * vy);
}

/// Mid-ranks by direct counting: rank_i = #less + (#equal + 1) / 2.
inline std::vector<double> counting_ranks(const std::vector<double>& v) {
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t less = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++less;
            if (v[j] == v[i]) ++equal;
        }
        ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return ranks;
}

/// Rank-then-Pearson Spearman.
inline double naive_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return naive_pearson(counting_ranks(x), counting_ranks(y));
}

/// O(n^2) concordant/discordant enumeration, tau-b tie correction.
inline double naive_kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = x[i] - x[j];
            double dy = y[i] - y[j];
            if (dx == 0.0) ++ties_x;
            if (dy == 0.0) ++ties_y;
            if (dx == 0.0 || dy == 0.0) continue;
            if (dx * dy > 0.0) ++concordant;
            else ++discordant;
        }
    }
    double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    return (concordant - discordant) / std::sqrt((n0 - ties_x) * (n0 - ties_y));
}

/// Whole-word match helper mirroring standard word-boundary semantics.
inline bool word_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || u >= 0x80;
}

inline bool whole_word_at(const std::string& s, std::size_t pos, std::size_t len) {
    if (pos > 0 && word_char(s[pos - 1])) return false;
    if (pos + len < s.size() && word_char(s[pos + len])) return false;
    return true;
}

inline bool survives_as_word(const std::string& haystack, const std::string& needle) {
    std::size_t pos = haystack.find(needle);
    while (pos != std::string::npos) {
        if (whole_word_at(haystack, pos, needle.size())) return true;
        pos = haystack.find(needle, pos + 1);
    }
    return false;
}

/// Sequential global whole-word replacement of one name.
inline std::string replace_word_everywhere(std::string body, const std::string& original,
                                           const std::string& replacement) {
    std::string out;
    std::size_t i = 0;
    while (i < body.size()) {
        if (body.compare(i, original.size(), original) == 0 &&
            whole_word_at(body, i, original.size())) {
            out += replacement;
            i += original.size();
        } else {
            out.push_back(body[i]);
            ++i;
        }
    }
    return out;
}

/// Applies per-name sequential replacement in every permutation order and
/// returns the outputs in which no original survives as a whole word.
inline std::vector<std::string> brute_force_anonymizations(
    const std::string& body, std::vector<std::pair<std::string, std::string>> entries) {
    std::sort(entries.begin(), entries.end());
    std::vector<std::string> clean_outputs;
    do {
        std::string out = body;
        for (const auto& [original, replacement] : entries)
            out = replace_word_everywhere(out, original, replacement);
        bool clean = true;
        for (const auto& [original, _] : entries) {
            if (survives_as_word(out, original)) clean = false;
        }
        if (clean) clean_outputs.push_back(out);
    } while (std::next_permutation(entries.begin(), entries.end()));
    return clean_outputs;
}

} // namespace oracles
