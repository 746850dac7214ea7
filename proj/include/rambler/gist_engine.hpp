#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rambler/backend.hpp"
#include "rambler/error.hpp"
#include "rambler/prompts.hpp"
#include "rambler/text.hpp"
#include "rambler/zoom.hpp"

namespace rambler {

struct SplitPlan {
    std::vector<std::string> parts;  // N >= 2, none empty
};

struct EngineOptions {
    int max_attempts = 2;  // one retry
    std::size_t clean_memo_capacity = 512;
    double soft_budget_factor = 1.5;
};

/// Parses a split response: a JSON array of >= 2 non-empty strings,
/// optionally wrapped in a markdown code fence.
inline std::optional<std::vector<std::string>> parse_split_response(std::string_view raw) {
    auto body = text::trim(raw);
    if (body.starts_with("```")) {
        auto first_nl = body.find('\n');
        auto last_fence = body.rfind("```");
        if (first_nl == std::string_view::npos || last_fence <= first_nl) return std::nullopt;
        body = text::trim(body.substr(first_nl + 1, last_fence - first_nl - 1));
    }
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_array() || j.size() < 2) return std::nullopt;
    std::vector<std::string> parts;
    for (const auto& el : j) {
        if (!el.is_string()) return std::nullopt;
        auto part = std::string(text::trim(el.get<std::string>()));
        if (part.empty()) return std::nullopt;
        parts.push_back(std::move(part));
    }
    return parts;
}

class GistEngine {
public:
    explicit GistEngine(std::shared_ptr<GistBackend> backend, EngineOptions options = {})
        : backend_(std::move(backend)), options_(options) {
        if (!backend_) throw std::invalid_argument("GistEngine needs a backend");
    }

    GistBackend& backend() const { return *backend_; }
    const EngineOptions& options() const { return options_; }

    /// Whole cleaned text. On failure the error carries the raw text in
    /// its details so the caller can keep it.
    std::string clean_transcript(std::string_view raw) {
        if (text::trim(raw).empty()) fail(ErrorCode::BadRequest, "raw transcript is empty");
        auto key = text::sha256_hex(raw);
        {
            std::lock_guard lock(memo_mu_);
            if (auto it = clean_memo_.find(key); it != clean_memo_.end()) return it->second;
        }
        std::string cleaned;
        try {
            cleaned = generate(render_prompt({.kind = PromptKind::Clean, .texts = {std::string(raw)}}), {});
        } catch (const Error& e) {
            fail(ErrorCode::BackendFailure, std::string("transcript cleaning failed: ") + e.what(), {std::string(raw)});
        }
        if (text::trim(cleaned).empty())
            fail(ErrorCode::BackendFailure, "transcript cleaning returned nothing", {std::string(raw)});
        std::lock_guard lock(memo_mu_);
        if (clean_memo_.size() >= options_.clean_memo_capacity) clean_memo_.clear();
        clean_memo_[key] = cleaned;
        return cleaned;
    }

    /// Streams the summary to `sink` and returns it. Caching is the
    /// scheduler's job.
    std::string summarize(std::string_view source, ZoomLevel level, const std::vector<std::string>& keywords,
                          const ChunkSink& sink = {}) {
        if (level == ZoomLevel::Full) fail(ErrorCode::BadRequest, "the full level is never summarized");
        if (text::trim(source).empty()) fail(ErrorCode::BadRequest, "cannot summarize empty text");
        GistRequest req{.kind = PromptKind::Summarize, .texts = {std::string(source)}, .keywords = keywords, .level = level};
        auto out = generate(render_prompt(req), sink);
        auto budget = word_budget(level, text::word_count(source));
        if (static_cast<double>(text::word_count(out)) > options_.soft_budget_factor * static_cast<double>(budget))
            warn("summary at " + std::string(to_string(level)) + " has " + std::to_string(text::word_count(out)) +
                 " words, budget " + std::to_string(budget));
        return out;
    }

    SplitPlan semantic_split(std::string_view source) {
        if (text::trim(source).empty()) fail(ErrorCode::BadRequest, "cannot split empty text");
        auto prompt = render_prompt({.kind = PromptKind::SemanticSplit, .texts = {std::string(source)}});
        auto first = generate(prompt, {});
        if (auto parts = parse_split_response(first)) return {std::move(*parts)};
        auto repaired = generate(split_repair_prompt(prompt, first), {});
        if (auto parts = parse_split_response(repaired)) return {std::move(*parts)};
        fail(ErrorCode::BackendFailure, "split response is not a JSON array of two or more paragraphs");
    }

    std::string semantic_merge(const std::vector<std::string>& texts, const std::vector<std::string>& keywords) {
        if (texts.size() < 2) fail(ErrorCode::BadRequest, "merge needs at least two texts");
        for (const auto& t : texts) {
            if (text::trim(t).empty()) fail(ErrorCode::BadRequest, "cannot merge an empty text");
        }
        auto out = generate(render_prompt({.kind = PromptKind::SemanticMerge, .texts = texts, .keywords = keywords}), {});
        if (text::trim(out).empty()) fail(ErrorCode::BackendFailure, "merge returned nothing");
        for (const auto& k : keywords) {
            if (!text::contains_word(out, k)) warn("merged text lacks keyword '" + k + "'");
        }
        return out;
    }

    /// Returns the candidate only; committing it is a separate step.
    std::string custom_transform(std::string_view source, std::string_view user_prompt, bool include_keywords,
                                 const std::vector<std::string>& keywords) {
        GistRequest req{.kind = PromptKind::CustomTransform,
                        .texts = {std::string(source)},
                        .keywords = keywords,
                        .user_prompt = std::string(user_prompt),
                        .include_keywords = include_keywords};
        auto out = generate(render_prompt(req), {});
        if (text::trim(out).empty()) fail(ErrorCode::BackendFailure, "transform returned nothing");
        return out;
    }

    /// Soft-validation findings (remote output over budget, missing keywords).
    std::vector<std::string> warnings() const {
        std::lock_guard lock(warn_mu_);
        return warnings_;
    }

private:
    /// Calls the backend, retrying once on BackendFailure unless chunks
    /// were already delivered.
    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) {
        for (int attempt = 1;; ++attempt) {
            bool delivered = false;
            ChunkSink tracking = [&](std::string_view piece) {
                delivered = true;
                if (sink) sink(piece);
            };
            try {
                return backend_->generate(prompt, tracking);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::BackendFailure || delivered || attempt >= options_.max_attempts) throw;
            } catch (const std::exception& e) {
                if (delivered || attempt >= options_.max_attempts)
                    fail(ErrorCode::BackendFailure, std::string("backend error: ") + e.what());
            }
        }
    }

    void warn(std::string message) {
        std::lock_guard lock(warn_mu_);
        warnings_.push_back(std::move(message));
    }

    std::shared_ptr<GistBackend> backend_;
    EngineOptions options_;
    std::mutex memo_mu_;
    std::map<std::string, std::string> clean_memo_;
    mutable std::mutex warn_mu_;
    std::vector<std::string> warnings_;
};

}  // namespace rambler
