#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rambler/error.hpp"
#include "rambler/rake.hpp"
#include "rambler/text.hpp"

namespace rambler {

enum class KeywordSource { Auto, Manual };

struct KeywordEntry {
    KeywordSource source = KeywordSource::Auto;
    bool active = true;
    Rational score;

    friend bool operator==(const KeywordEntry&, const KeywordEntry&) = default;
};

/// word (lowercase) -> entry. Manual entries are user toggles layered over
/// the automatic RAKE selection.
using KeywordSet = std::map<std::string, KeywordEntry, std::less<>>;

/// Replaces Auto entries with a fresh extraction and keeps every Manual entry
/// whose word still occurs in `source_text`. Manual flags win over Auto.
inline KeywordSet recompute_keywords(std::string_view source_text, const KeywordSet& prior,
                                     const RakeParams& params = {}) {
    auto rake = rake_extract(source_text, params);
    KeywordSet next;
    for (const auto& word : rake.auto_words()) {
        next[word] = KeywordEntry{KeywordSource::Auto, true, rake.scores.find(word)->second.score};
    }
    auto present = text::lower_tokens(source_text);
    for (const auto& [word, entry] : prior) {
        if (entry.source != KeywordSource::Manual) continue;
        if (std::find(present.begin(), present.end(), word) == present.end()) continue;
        auto it = rake.scores.find(word);
        next[word] = KeywordEntry{KeywordSource::Manual, entry.active, it == rake.scores.end() ? Rational{} : it->second.score};
    }
    return next;
}

inline KeywordSet toggle_keyword(const KeywordSet& current, std::string_view source_text, std::string_view word) {
    auto lower = text::to_lower(text::trim(word));
    if (lower.empty() || !text::contains_word(source_text, lower))
        fail(ErrorCode::BadRequest, "word does not occur in ramble text: " + std::string(word));
    KeywordSet next = current;
    auto it = next.find(lower);
    if (it == next.end()) {
        next[lower] = KeywordEntry{KeywordSource::Manual, true, Rational{}};
    } else {
        it->second.source = KeywordSource::Manual;
        it->second.active = !it->second.active;
    }
    return next;
}

/// Active words ordered by first occurrence in the text. This exact list is
/// what prompts receive.
inline std::vector<std::string> active_keywords(const KeywordSet& set, std::string_view source_text) {
    std::vector<std::string> out;
    for (const auto& token : text::lower_tokens(source_text)) {
        auto it = set.find(token);
        if (it == set.end() || !it->second.active) continue;
        if (std::find(out.begin(), out.end(), token) == out.end()) out.push_back(token);
    }
    return out;
}

inline std::string keyword_hash(const std::vector<std::string>& active) {
    return text::sha256_hex(text::join(active, "\n"));
}

inline std::string_view to_string(KeywordSource s) { return s == KeywordSource::Auto ? "auto" : "manual"; }

}  // namespace rambler
