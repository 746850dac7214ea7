#pragma once

// Deterministic offline backend. Every rule here is simple enough to trace
// by hand, which makes it the oracle for the engine's contracts.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rambler/backend.hpp"
#include "rambler/rake.hpp"
#include "rambler/text.hpp"
#include "rambler/zoom.hpp"

namespace rambler {
namespace offline {

/// Collapses whitespace, capitalizes sentence starts and ensures terminal
/// punctuation. The case-insensitive token sequence is preserved.
inline std::string clean(std::string_view raw) {
    std::string out = text::normalize_whitespace(raw);
    bool at_start = true;
    for (std::size_t i = 0; i < out.size(); ++i) {
        char c = out[i];
        if (text::is_alnum_byte(c)) {
            if (at_start) out[i] = text::ascii_upper(c);
            at_start = false;
        } else if ((c == '.' || c == '!' || c == '?') && i + 1 < out.size() && out[i + 1] == ' ') {
            at_start = true;
        }
    }
    if (!out.empty() && out.back() != '.' && out.back() != '!' && out.back() != '?') out.push_back('.');
    return out;
}

struct SummaryPlan {
    std::vector<std::string> sentences;
    std::vector<std::size_t> ranking;  // sentence indices, best first
    std::vector<std::pair<std::size_t, std::size_t>> selected;  // (sentence index, words taken), rank order
    std::size_t budget = 0;
    std::string text;
};

/// Extractive summary: sentences ranked by active-keyword occurrences, then
/// RAKE word-score sum, then earlier position; taken greedily in rank order
/// until the word budget is spent (the last one truncated), then emitted in
/// original order.
inline SummaryPlan summarize(std::string_view source, ZoomLevel level, const std::vector<std::string>& keywords,
                             const RakeParams& params = {}) {
    SummaryPlan plan;
    plan.sentences = text::split_sentences(source);
    plan.budget = word_budget(level, text::word_count(source));
    auto scores = rake_extract(source, params).scores;
    std::set<std::string, std::less<>> active;
    for (const auto& k : keywords) active.insert(text::to_lower(k));

    struct Rank {
        std::size_t index;
        std::size_t keyword_hits;
        Rational rake_sum;
    };
    std::vector<Rank> ranks;
    for (std::size_t i = 0; i < plan.sentences.size(); ++i) {
        Rank r{i, 0, Rational{}};
        for (const auto& tok : text::lower_tokens(plan.sentences[i])) {
            if (active.count(tok)) ++r.keyword_hits;
            if (auto it = scores.find(tok); it != scores.end()) r.rake_sum += it->second.score;
        }
        ranks.push_back(r);
    }
    std::stable_sort(ranks.begin(), ranks.end(), [](const Rank& a, const Rank& b) {
        if (a.keyword_hits != b.keyword_hits) return a.keyword_hits > b.keyword_hits;
        if (a.rake_sum != b.rake_sum) return a.rake_sum > b.rake_sum;
        return a.index < b.index;
    });

    std::size_t remaining = plan.budget;
    for (const auto& r : ranks) {
        plan.ranking.push_back(r.index);
        if (remaining == 0) continue;
        std::size_t words = text::word_count(plan.sentences[r.index]);
        std::size_t take = std::min(words, remaining);
        plan.selected.emplace_back(r.index, take);
        remaining -= take;
    }

    auto in_order = plan.selected;
    std::sort(in_order.begin(), in_order.end());
    std::vector<std::string> pieces;
    for (const auto& [index, take] : in_order) pieces.push_back(text::first_words(plan.sentences[index], take));
    plan.text = text::join(pieces, " ");
    return plan;
}

/// Number of split parts for a text of `words` words.
inline std::size_t split_part_count(std::size_t words) {
    std::size_t by_length = (words + 119) / 120;
    return std::max<std::size_t>(2, std::min<std::size_t>(5, by_length));
}

/// Partitions sentences into N contiguous groups with greedily balanced
/// word counts. Throws BadRequest when fewer than two sentences exist.
inline std::vector<std::string> split(std::string_view source) {
    auto sentences = text::split_sentences(source);
    if (sentences.size() < 2)
        fail(ErrorCode::BadRequest, "text has a single sentence; cannot split into two or more parts");
    std::size_t parts = std::min(split_part_count(text::word_count(source)), sentences.size());

    std::vector<std::size_t> words;
    std::size_t total = 0;
    for (const auto& s : sentences) {
        words.push_back(text::word_count(s));
        total += words.back();
    }

    std::vector<std::string> out;
    std::size_t next = 0;
    std::size_t remaining_words = total;
    for (std::size_t p = 0; p < parts; ++p) {
        std::size_t parts_left = parts - p;
        std::vector<std::string> group;
        if (parts_left == 1) {
            for (; next < sentences.size(); ++next) group.push_back(sentences[next]);
        } else {
            double target = static_cast<double>(remaining_words) / static_cast<double>(parts_left);
            std::size_t acc = words[next];
            group.push_back(sentences[next++]);
            while (sentences.size() - next > parts_left - 1) {
                double with = std::abs(static_cast<double>(acc + words[next]) - target);
                double without = std::abs(static_cast<double>(acc) - target);
                if (!(with < without)) break;
                acc += words[next];
                group.push_back(sentences[next++]);
            }
            remaining_words -= acc;
        }
        out.push_back(text::join(group, " "));
    }
    return out;
}

/// Concatenates in order and drops exact-duplicate sentences after the first.
inline std::string merge(const std::vector<std::string>& texts) {
    auto sentences = text::split_sentences(text::join(texts, " "));
    std::vector<std::string> kept;
    std::set<std::string> seen;
    for (auto& s : sentences) {
        if (seen.insert(s).second) kept.push_back(std::move(s));
    }
    return text::join(kept, " ");
}

}  // namespace offline

class OfflineBackend : public GistBackend {
public:
    explicit OfflineBackend(RakeParams params = {}) : params_(std::move(params)) {}

    std::string name() const override { return "offline"; }
    std::string model() const override { return "deterministic-v1"; }

    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) override {
        std::string out = respond(prompt.request);
        emit_word_chunks(out, sink);
        return out;
    }

private:
    std::string respond(const GistRequest& req) const {
        switch (req.kind) {
            case PromptKind::Clean: return offline::clean(req.texts.at(0));
            case PromptKind::Summarize:
                return offline::summarize(req.texts.at(0), req.level.value_or(ZoomLevel::Gist), req.keywords, params_).text;
            case PromptKind::SemanticSplit: return nlohmann::json(offline::split(req.texts.at(0))).dump();
            case PromptKind::SemanticMerge: return offline::merge(req.texts);
            case PromptKind::CustomTransform: return req.texts.at(0);
        }
        return {};
    }

    RakeParams params_;
};

}  // namespace rambler
