#pragma once

// OpenAI-compatible chat-completions backend using streamed responses.

#include <chrono>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "rambler/backend.hpp"
#include "rambler/sse.hpp"

namespace rambler {

struct RemoteConfig {
    static constexpr const char* kApiKeyEnv = "RAMBLER_API_KEY";
    static constexpr const char* kBaseUrlEnv = "RAMBLER_BASE_URL";
    static constexpr const char* kModelEnv = "RAMBLER_MODEL";

    std::string api_key;
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4";
    double temperature = 0.3;
    std::chrono::seconds timeout{60};

    static RemoteConfig from_env() {
        RemoteConfig cfg;
        if (const char* v = std::getenv(kApiKeyEnv)) cfg.api_key = v;
        if (const char* v = std::getenv(kBaseUrlEnv); v && *v) cfg.base_url = v;
        if (const char* v = std::getenv(kModelEnv); v && *v) cfg.model = v;
        return cfg;
    }
};

class RemoteBackend : public GistBackend {
public:
    explicit RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
        auto scheme_end = config_.base_url.find("://");
        if (scheme_end == std::string::npos) fail(ErrorCode::BadRequest, "base URL needs a scheme: " + config_.base_url);
        auto path_start = config_.base_url.find('/', scheme_end + 3);
        origin_ = config_.base_url.substr(0, path_start);
        path_prefix_ = path_start == std::string::npos ? std::string{} : config_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }

    std::string name() const override { return "remote"; }
    std::string model() const override { return config_.model; }

    static nlohmann::json request_body(const RemoteConfig& cfg, const std::vector<ChatMessage>& messages) {
        nlohmann::json msgs = nlohmann::json::array();
        for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
        return {{"model", cfg.model}, {"messages", msgs}, {"temperature", cfg.temperature}, {"stream", true}};
    }

    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) override {
        httplib::Client client(origin_);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        httplib::Headers headers{{"Accept", "text/event-stream"}};
        if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

        std::string text;
        std::string error_body;
        bool finished = false;
        bool bad_payload = false;
        int status = 0;
        sse::Parser parser;

        httplib::Request req;
        req.method = "POST";
        req.path = path_prefix_ + "/chat/completions";
        req.headers = headers;
        req.headers.emplace("Content-Type", "application/json");
        req.body = request_body(config_, prompt.messages).dump();
        req.response_handler = [&](const httplib::Response& res) {
            status = res.status;
            return true;
        };
        req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
            if (status != 200) {
                error_body.append(data, len);
                return true;
            }
            for (const auto& ev : parser.feed(std::string_view(data, len))) {
                if (ev.data == "[DONE]") {
                    finished = true;
                    continue;
                }
                auto j = nlohmann::json::parse(ev.data, nullptr, false);
                if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array()) {
                    bad_payload = true;
                    return false;
                }
                if (j["choices"].empty()) continue;
                const auto& choice = j["choices"][0];
                if (choice.contains("delta") && choice["delta"].contains("content") && choice["delta"]["content"].is_string()) {
                    auto piece = choice["delta"]["content"].get<std::string>();
                    if (!piece.empty()) {
                        text += piece;
                        if (sink) sink(piece);
                    }
                }
                if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) finished = true;
            }
            return true;
        };

        auto result = client.send(req);
        if (bad_payload) fail(ErrorCode::BackendFailure, "remote stream carried a malformed payload");
        if (!result) fail(ErrorCode::BackendFailure, "remote transport error: " + httplib::to_string(result.error()));
        if (status != 200)
            fail(ErrorCode::BackendFailure, "remote returned HTTP " + std::to_string(status) + ": " + error_body);
        if (!finished) fail(ErrorCode::BackendFailure, "remote stream ended before completion");
        return text;
    }

private:
    RemoteConfig config_;
    std::string origin_;
    std::string path_prefix_;
};

}  // namespace rambler
