#pragma once

// Prompt templates (resources/prompts/v1) and their rendering.
//
// Template syntax: {{NAME}} substitutes a value; {{#NAME}}...{{/NAME}}
// keeps the enclosed block only when NAME is non-empty.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rambler/error.hpp"
#include "rambler/resources.hpp"
#include "rambler/text.hpp"
#include "rambler/zoom.hpp"

namespace rambler {

enum class PromptKind { Clean, Summarize, SemanticSplit, SemanticMerge, CustomTransform };

inline std::string_view to_string(PromptKind k) {
    switch (k) {
        case PromptKind::Clean: return "clean";
        case PromptKind::Summarize: return "summarize";
        case PromptKind::SemanticSplit: return "split";
        case PromptKind::SemanticMerge: return "merge";
        case PromptKind::CustomTransform: return "transform";
    }
    return "clean";
}

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Structured inputs of one generation request. Prompt-driven backends
/// read the rendered messages; the offline backend reads these fields.
struct GistRequest {
    PromptKind kind = PromptKind::Clean;
    std::vector<std::string> texts;  // one text, or >= 2 for merge
    std::vector<std::string> keywords;
    std::optional<ZoomLevel> level;
    std::string user_prompt;
    bool include_keywords = false;
};

struct RenderedPrompt {
    GistRequest request;
    std::vector<ChatMessage> messages;

    const std::string& system() const { return messages.front().content; }
};

namespace prompts {

inline constexpr std::string_view kTemplateVersion = "v1";

using Bindings = std::map<std::string, std::string, std::less<>>;

inline std::string render_template(std::string_view tpl, const Bindings& vars) {
    auto lookup = [&](std::string_view name) -> std::string_view {
        auto it = vars.find(name);
        return it == vars.end() ? std::string_view{} : std::string_view(it->second);
    };
    std::string out;
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        auto open = tpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, open - pos));
        auto close = tpl.find("}}", open);
        if (close == std::string_view::npos) throw std::logic_error("unterminated template tag");
        auto tag = tpl.substr(open + 2, close - open - 2);
        pos = close + 2;
        if (!tag.empty() && tag[0] == '#') {
            auto name = tag.substr(1);
            std::string end_tag = "{{/" + std::string(name) + "}}";
            auto end = tpl.find(end_tag, pos);
            if (end == std::string_view::npos) throw std::logic_error("unterminated template section");
            if (!lookup(name).empty()) out.append(render_template(tpl.substr(pos, end - pos), vars));
            pos = end + end_tag.size();
        } else {
            out.append(lookup(tag));
        }
    }
    return out;
}

/// The level phrase substituted into the summarize prompt, with L replaced
/// by the source word count.
inline std::string level_text(ZoomLevel level, std::size_t source_words) {
    switch (level) {
        case ZoomLevel::Gist: return "5 words or less";
        case ZoomLevel::Quarter: return std::to_string(source_words) + " / 4 words or less";
        case ZoomLevel::Half: return std::to_string(source_words) + " / 2 words or less";
        case ZoomLevel::Full: break;
    }
    fail(ErrorCode::BadRequest, "the full level has no summary prompt");
}

inline std::string keyword_list(const std::vector<std::string>& keywords) { return text::join(keywords, ", "); }

inline std::vector<ChatMessage> messages(std::string_view system_tpl, std::optional<std::string_view> user_tpl,
                                         const Bindings& vars) {
    std::vector<ChatMessage> out{{"system", render_template(system_tpl, vars)}};
    if (user_tpl) out.push_back({"user", render_template(*user_tpl, vars)});
    return out;
}

}  // namespace prompts

inline RenderedPrompt render_prompt(const GistRequest& req) {
    auto require_one_text = [&] {
        if (req.texts.size() != 1) fail(ErrorCode::BadRequest, std::string(to_string(req.kind)) + " takes exactly one text");
    };
    namespace res = resources;
    RenderedPrompt out{req, {}};
    switch (req.kind) {
        case PromptKind::Clean:
            require_one_text();
            out.messages = prompts::messages(res::kCleanSystemV1, res::kCleanUserV1, {{"TEXT", req.texts[0]}});
            break;
        case PromptKind::Summarize: {
            require_one_text();
            if (!req.level || *req.level == ZoomLevel::Full)
                fail(ErrorCode::BadRequest, "summarize needs a half, quarter or gist level");
            auto L = text::word_count(req.texts[0]);
            out.messages = prompts::messages(res::kSummarizeSystemV1, res::kSummarizeUserV1,
                                             {{"TEXT", req.texts[0]},
                                              {"LEVEL_TEXT", prompts::level_text(*req.level, L)},
                                              {"KEYWORDS", prompts::keyword_list(req.keywords)}});
            break;
        }
        case PromptKind::SemanticSplit:
            require_one_text();
            out.messages = prompts::messages(res::kSplitSystemV1, res::kSplitUserV1, {{"TEXT", req.texts[0]}});
            break;
        case PromptKind::SemanticMerge:
            if (req.texts.size() < 2) fail(ErrorCode::BadRequest, "merge needs at least two texts");
            out.messages = prompts::messages(res::kMergeSystemV1, std::nullopt,
                                             {{"TEXTS", text::join(req.texts, "\n")},
                                              {"KEYWORDS", prompts::keyword_list(req.keywords)}});
            break;
        case PromptKind::CustomTransform:
            require_one_text();
            if (text::trim(req.user_prompt).empty()) fail(ErrorCode::BadRequest, "transform needs a non-empty prompt");
            out.messages = prompts::messages(
                res::kTransformSystemV1, res::kTransformUserV1,
                {{"TEXT", req.texts[0]},
                 {"PROMPT", req.user_prompt},
                 {"KEYWORDS", req.include_keywords ? prompts::keyword_list(req.keywords) : std::string{}}});
            break;
    }
    return out;
}

inline constexpr std::string_view kSplitRepairInstruction = "Return only the JSON array.";

/// Follow-up prompt asking the backend to fix a malformed split response.
inline RenderedPrompt split_repair_prompt(const RenderedPrompt& original, std::string malformed_output) {
    RenderedPrompt out = original;
    out.messages.push_back({"assistant", std::move(malformed_output)});
    out.messages.push_back({"user", std::string(kSplitRepairInstruction)});
    return out;
}

/// Stable identity of a rendered prompt: SHA-256 of the compact JSON
/// message array [{"content":..,"role":..},..]. Replay fixtures are named by it.
inline std::string prompt_fingerprint(const std::vector<ChatMessage>& messages) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
    return text::sha256_hex(arr.dump());
}

}  // namespace rambler
