#pragma once

// Text primitives shared by keyword extraction, cleaning and summarization.
// Bytes >= 0x80 are treated as word characters, so UTF-8 letters stay inside
// tokens without a full Unicode database.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace rambler::text {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_alnum_byte(char c) {
    auto u = static_cast<unsigned char>(c);
    return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') || u >= 0x80;
}

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
inline char ascii_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

inline std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

/// Collapses every whitespace run to one space and trims both ends.
inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

/// Whitespace-delimited words; the unit of every word budget.
inline std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) words.push_back(s.substr(start, i - start));
    }
    return words;
}

inline std::size_t word_count(std::string_view s) { return split_words(s).size(); }

/// First `n` whitespace-delimited words of `s`, joined by single spaces.
inline std::string first_words(std::string_view s, std::size_t n) {
    std::string out;
    auto words = split_words(s);
    for (std::size_t i = 0; i < words.size() && i < n; ++i) {
        if (!out.empty()) out.push_back(' ');
        out.append(words[i]);
    }
    return out;
}

struct Token {
    std::string_view text;
    std::size_t begin = 0;  // byte offset in the source
    std::size_t end = 0;
};

/// Word tokens: runs of letters/digits, with internal apostrophes and
/// hyphens kept ("don't", "state-of-the-art" are single tokens).
inline std::vector<Token> word_tokens(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_alnum_byte(s[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < s.size()) {
            if (is_alnum_byte(s[i])) {
                ++i;
            } else if ((s[i] == '\'' || s[i] == '-') && i + 1 < s.size() && is_alnum_byte(s[i + 1])) {
                ++i;
            } else {
                break;
            }
        }
        tokens.push_back({s.substr(start, i - start), start, i});
    }
    return tokens;
}

/// Lowercased word tokens; the case-insensitive token sequence of a text.
inline std::vector<std::string> lower_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& t : word_tokens(s)) out.push_back(to_lower(t.text));
    return out;
}

inline bool contains_word(std::string_view text, std::string_view word) {
    auto needle = to_lower(word);
    for (const auto& t : word_tokens(text)) {
        if (to_lower(t.text) == needle) return true;
    }
    return false;
}

inline constexpr std::array<std::string_view, 14> kAbbreviations = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.", "i.e.", "inc.", "approx.",
};

inline bool ends_with_abbreviation(std::string_view before_space) {
    std::size_t start = before_space.find_last_of(" \t\n\r");
    std::string last = to_lower(start == std::string_view::npos ? before_space : before_space.substr(start + 1));
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), last) != kAbbreviations.end();
}

/// Splits at terminal punctuation (. ! ?) followed by whitespace and an
/// uppercase letter or digit, skipping known abbreviations. Returned
/// sentences are whitespace-normalized and non-empty.
inline std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        // closing quotes/brackets stay with the sentence
        while (j < s.size() && (s[j] == '"' || s[j] == '\'' || s[j] == ')')) ++j;
        if (j >= s.size() || !is_space(s[j])) continue;
        std::size_t k = j;
        while (k < s.size() && is_space(s[k])) ++k;
        if (k >= s.size()) continue;
        char next = s[k];
        bool starts_sentence = (next >= 'A' && next <= 'Z') || (next >= '0' && next <= '9') || next == '"';
        if (!starts_sentence) continue;
        if (c == '.' && ends_with_abbreviation(s.substr(start, j - start))) continue;
        auto sentence = normalize_whitespace(s.substr(start, j - start));
        if (!sentence.empty()) out.push_back(std::move(sentence));
        start = k;
        i = k - 1;
    }
    auto tail = normalize_whitespace(s.substr(start));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace rambler::text
