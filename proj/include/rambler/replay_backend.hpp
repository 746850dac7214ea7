#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include "rambler/backend.hpp"

namespace rambler {

/// Serves canned responses keyed by prompt fingerprint. On disk a fixture
/// store is a directory of files named by the fingerprint (hex) whose
/// UTF-8 contents are the response. Misses go to `fallback` when set.
class ReplayBackend : public GistBackend {
public:
    explicit ReplayBackend(std::filesystem::path fixture_dir = {}, std::shared_ptr<GistBackend> fallback = nullptr)
        : dir_(std::move(fixture_dir)), fallback_(std::move(fallback)) {}

    std::string name() const override { return "replay"; }

    void add(const std::vector<ChatMessage>& messages, std::string response) {
        std::lock_guard lock(mu_);
        memory_[prompt_fingerprint(messages)] = std::move(response);
    }

    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) override {
        auto key = prompt_fingerprint(prompt.messages);
        if (auto hit = lookup(key)) {
            emit_word_chunks(*hit, sink);
            return *hit;
        }
        if (fallback_) return fallback_->generate(prompt, sink);
        fail(ErrorCode::BackendFailure, "no replay fixture for prompt " + key + " (" +
                                            std::string(to_string(prompt.request.kind)) + ")");
    }

private:
    std::optional<std::string> lookup(const std::string& key) {
        {
            std::lock_guard lock(mu_);
            if (auto it = memory_.find(key); it != memory_.end()) return it->second;
        }
        if (dir_.empty()) return std::nullopt;
        std::ifstream in(dir_ / key, std::ios::binary);
        if (!in) return std::nullopt;
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::filesystem::path dir_;
    std::shared_ptr<GistBackend> fallback_;
    std::mutex mu_;
    std::map<std::string, std::string> memory_;
};

}  // namespace rambler
