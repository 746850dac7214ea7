#pragma once

// Rapid Automatic Keyword Extraction: candidate phrases are maximal runs of
// content words delimited by stopwords and punctuation; each word scores
// degree/frequency and a phrase scores the sum of its member words.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rambler/error.hpp"
#include "rambler/resources.hpp"
#include "rambler/text.hpp"

namespace rambler {

/// Non-negative exact fraction, always reduced.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
        if (den_ == 0) throw std::invalid_argument("Rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        reduce();
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        std::int64_t g = std::gcd(a.den_, b.den_);
        __int128 den = static_cast<__int128>(a.den_ / g) * b.den_;
        __int128 num = static_cast<__int128>(a.num_) * (b.den_ / g) + static_cast<__int128>(b.num_) * (a.den_ / g);
        return from_wide(num, den);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    static Rational from_wide(__int128 num, __int128 den) {
        __int128 a = num < 0 ? -num : num;
        __int128 b = den;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            num /= a;
            den /= a;
        }
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    void reduce() {
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

using Stoplist = std::set<std::string, std::less<>>;

/// Parses a stoplist: UTF-8, one word per line, `#` starts a comment.
inline Stoplist parse_stoplist(std::string_view content) {
    Stoplist words;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t nl = content.find('\n', pos);
        auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (!line.empty()) words.insert(text::to_lower(line));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return words;
}

inline Stoplist load_stoplist(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::BadRequest, "cannot read stoplist file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto words = parse_stoplist(ss.str());
    if (words.empty()) fail(ErrorCode::BadRequest, "stoplist is empty: " + path);
    return words;
}

/// The bundled SMART English stoplist.
inline std::shared_ptr<const Stoplist> smart_stoplist() {
    static const auto list = std::make_shared<const Stoplist>(parse_stoplist(resources::kSmartStoplist));
    return list;
}

struct RakeParams {
    std::shared_ptr<const Stoplist> stoplist = smart_stoplist();
    std::size_t max_phrase_words = 3;
    // Fraction of distinct candidates kept, as num/den.
    std::int64_t keyword_fraction_num = 1;
    std::int64_t keyword_fraction_den = 3;

    void validate() const {
        if (!stoplist || stoplist->empty()) fail(ErrorCode::BadRequest, "stoplist must be non-empty");
        if (max_phrase_words < 1) fail(ErrorCode::BadRequest, "max_phrase_words must be >= 1");
        if (keyword_fraction_den <= 0 || keyword_fraction_num <= 0 || keyword_fraction_num > keyword_fraction_den)
            fail(ErrorCode::BadRequest, "keyword_fraction must lie in (0, 1]");
    }

    bool is_stopword(std::string_view lower_word) const { return stoplist->find(lower_word) != stoplist->end(); }
};

struct CandidatePhrase {
    std::vector<std::string> words;  // lowercased content words
    std::size_t span_begin = 0;      // byte range in the source text
    std::size_t span_end = 0;
    Rational score;

    std::string phrase() const { return text::join(words, " "); }
};

struct WordStats {
    std::int64_t freq = 0;
    std::int64_t degree = 0;
    Rational score;

    friend bool operator==(const WordStats&, const WordStats&) = default;
};

using WordScoreTable = std::map<std::string, WordStats, std::less<>>;

inline std::vector<CandidatePhrase> candidate_phrases(std::string_view source, const RakeParams& params = {}) {
    params.validate();
    std::vector<CandidatePhrase> phrases;
    CandidatePhrase current;
    auto flush = [&] {
        if (!current.words.empty()) phrases.push_back(std::move(current));
        current = {};
    };
    auto tokens = text::word_tokens(source);
    std::size_t prev_end = 0;
    for (const auto& tok : tokens) {
        // Any punctuation between two tokens delimits a phrase.
        for (std::size_t i = prev_end; i < tok.begin; ++i) {
            if (!text::is_space(source[i])) {
                flush();
                break;
            }
        }
        prev_end = tok.end;
        auto lower = text::to_lower(tok.text);
        if (params.is_stopword(lower)) {
            flush();
            continue;
        }
        if (current.words.size() >= params.max_phrase_words) continue;  // truncated tail
        if (current.words.empty()) current.span_begin = tok.begin;
        current.span_end = tok.end;
        current.words.push_back(std::move(lower));
    }
    flush();
    return phrases;
}

inline WordScoreTable word_scores(const std::vector<CandidatePhrase>& phrases) {
    WordScoreTable table;
    for (const auto& p : phrases) {
        auto len = static_cast<std::int64_t>(p.words.size());
        for (const auto& w : p.words) {
            auto& stats = table[w];
            stats.freq += 1;
            stats.degree += len;
        }
    }
    for (auto& [word, stats] : table) stats.score = Rational(stats.degree, stats.freq);
    return table;
}

struct RakeResult {
    std::vector<CandidatePhrase> ranked;  // distinct candidates, best first
    std::size_t selected_count = 0;       // the top `selected_count` of `ranked`
    WordScoreTable scores;

    std::vector<CandidatePhrase> selected() const {
        return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(selected_count)};
    }

    /// Union of member words of the selected phrases, in rank order.
    std::vector<std::string> auto_words() const {
        std::vector<std::string> words;
        for (std::size_t i = 0; i < selected_count; ++i) {
            for (const auto& w : ranked[i].words) {
                if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
            }
        }
        return words;
    }
};

inline RakeResult rake_extract(std::string_view source, const RakeParams& params = {}) {
    auto phrases = candidate_phrases(source, params);
    RakeResult result;
    result.scores = word_scores(phrases);

    // Repeated phrases are ranked once, at their earliest position.
    std::set<std::vector<std::string>> seen;
    for (auto& p : phrases) {
        if (!seen.insert(p.words).second) continue;
        Rational score;
        for (const auto& w : p.words) score += result.scores.find(w)->second.score;
        p.score = score;
        result.ranked.push_back(std::move(p));
    }
    std::stable_sort(result.ranked.begin(), result.ranked.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.span_begin < b.span_begin;
    });

    auto n = static_cast<std::int64_t>(result.ranked.size());
    std::int64_t keep = (params.keyword_fraction_num * n + params.keyword_fraction_den - 1) / params.keyword_fraction_den;
    result.selected_count = static_cast<std::size_t>(std::min(keep, n));
    return result;
}

}  // namespace rambler
