#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "rambler/rambler.hpp"

namespace testsupport {

using namespace rambler;

inline std::filesystem::path source_dir() { return RAMBLER_SOURCE_DIR; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("rambler-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + random_hex_id(4));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Offline backend that counts calls per prompt kind.
class CountingBackend : public GistBackend {
public:
    explicit CountingBackend(std::chrono::milliseconds delay = {}) : delay_(delay) {}

    std::string name() const override { return "counting"; }

    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) override {
        {
            std::lock_guard lock(mu_);
            ++calls_[prompt.request.kind];
        }
        if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
        return inner_.generate(prompt, sink);
    }

    int calls(PromptKind kind) const {
        std::lock_guard lock(mu_);
        auto it = calls_.find(kind);
        return it == calls_.end() ? 0 : it->second;
    }

    int total() const {
        std::lock_guard lock(mu_);
        int n = 0;
        for (const auto& [_, c] : calls_) n += c;
        return n;
    }

    void reset() {
        std::lock_guard lock(mu_);
        calls_.clear();
    }

private:
    OfflineBackend inner_;
    std::chrono::milliseconds delay_;
    mutable std::mutex mu_;
    std::map<PromptKind, int> calls_;
};

/// Summaries block until `release()`; everything else passes through.
class GatedBackend : public GistBackend {
public:
    std::string name() const override { return "gated"; }

    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) override {
        if (prompt.request.kind == PromptKind::Summarize) {
            std::unique_lock lock(mu_);
            ++waiting_;
            cv_.notify_all();
            cv_.wait(lock, [&] { return open_; });
        }
        return inner_.generate(prompt, sink);
    }

    void wait_for_waiters(int n) {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return waiting_ >= n; });
    }

    void release() {
        std::lock_guard lock(mu_);
        open_ = true;
        cv_.notify_all();
    }

private:
    OfflineBackend inner_;
    std::mutex mu_;
    std::condition_variable cv_;
    int waiting_ = 0;
    bool open_ = false;
};

/// Hands out canned responses in order; throws BackendFailure for "!fail".
class ScriptedBackend : public GistBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses) : responses_(responses.begin(), responses.end()) {}

    std::string name() const override { return "scripted"; }

    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) override {
        std::string out;
        {
            std::lock_guard lock(mu_);
            prompts_.push_back(prompt);
            if (responses_.empty()) fail(ErrorCode::BackendFailure, "script exhausted");
            out = responses_.front();
            responses_.pop_front();
        }
        if (out == "!fail") fail(ErrorCode::BackendFailure, "scripted failure");
        emit_word_chunks(out, sink);
        return out;
    }

    std::vector<RenderedPrompt> prompts() const {
        std::lock_guard lock(mu_);
        return prompts_;
    }

private:
    mutable std::mutex mu_;
    std::deque<std::string> responses_;
    std::vector<RenderedPrompt> prompts_;
};

/// Offline behaviour except for the kinds given an override.
class OverrideBackend : public GistBackend {
public:
    using Fn = std::function<std::string(const RenderedPrompt&)>;

    explicit OverrideBackend(std::map<PromptKind, Fn> overrides) : overrides_(std::move(overrides)) {}

    std::string name() const override { return "override"; }

    std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) override {
        auto it = overrides_.find(prompt.request.kind);
        if (it == overrides_.end()) return inner_.generate(prompt, sink);
        auto out = it->second(prompt);
        emit_word_chunks(out, sink);
        return out;
    }

private:
    OfflineBackend inner_;
    std::map<PromptKind, Fn> overrides_;
};

/// Random prose: sentences of 4-16 words from a small vocabulary, mixing
/// stopwords and content words so RAKE has phrases to find.
class TextGenerator {
public:
    explicit TextGenerator(std::uint64_t seed) : rng_(seed) {}

    std::string sentence() {
        static const std::vector<std::string> content = {
            "river",   "orchard", "budget", "festival", "volunteers", "water",   "soil",     "harvest", "county",
            "grant",   "trees",   "summer", "sandy",    "irrigation", "apples",  "planning", "meeting", "schedule",
            "draft",   "chapter", "editor", "speech",   "dictation",  "summary", "keyword",  "paper",   "robot",
            "quantum", "coffee",  "tea",    "garden",   "library",    "museum",  "station",  "bridge",  "mountain"};
        static const std::vector<std::string> stop = {"the", "and", "of", "a", "to", "in", "is", "we", "it", "for", "with", "on"};
        std::uniform_int_distribution<int> len(4, 16);
        std::uniform_int_distribution<int> coin(0, 9);
        int n = len(rng_);
        std::string s;
        for (int i = 0; i < n; ++i) {
            const auto& pool = coin(rng_) < 4 ? stop : content;
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            auto w = pool[pick(rng_)];
            if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
            if (i > 0) s.push_back(' ');
            s += w;
            if (i + 1 < n && coin(rng_) == 0) s.push_back(',');
        }
        return s + ".";
    }

    /// At least `min_words` words, whole sentences.
    std::string text(std::size_t min_words) {
        std::string t;
        while (text::word_count(t) < min_words) {
            if (!t.empty()) t.push_back(' ');
            t += sentence();
        }
        return t;
    }

    std::string text_between(std::size_t lo, std::size_t hi) {
        std::uniform_int_distribution<std::size_t> d(lo, hi);
        auto target = d(rng_);
        while (true) {
            auto t = text(target);
            if (text::word_count(t) <= hi) return t;
        }
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// In-memory SummaryHost for scheduler tests: one ramble per target.
class MapHost : public SummaryHost {
public:
    void set_text(const std::string& ramble_id, std::string text, std::vector<std::string> keywords = {}) {
        std::lock_guard lock(mu_);
        auto& r = rambles_[ramble_id];
        r.text = std::move(text);
        r.content_hash = content_hash_of(r.text);
        r.keywords = std::move(keywords);
        r.keyword_hash = rambler::keyword_hash(r.keywords);
        r.summaries.mark_stale_except(r.content_hash);
    }

    std::optional<GistSnapshot> snapshot(const SummaryTarget& target, ZoomLevel level) override {
        std::lock_guard lock(mu_);
        auto it = rambles_.find(target.ramble_id);
        if (it == rambles_.end()) return std::nullopt;
        auto& r = it->second;
        return GistSnapshot{r.text, r.content_hash, r.keywords, r.keyword_hash,
                            r.summaries.lookup(level, r.content_hash, r.keyword_hash)};
    }

    bool store(const SummaryTarget& target, const SummaryEntry& entry) override {
        std::lock_guard lock(mu_);
        auto it = rambles_.find(target.ramble_id);
        if (it == rambles_.end()) return false;
        auto& r = it->second;
        if (entry.content_hash != r.content_hash || entry.keyword_hash != r.keyword_hash) return false;
        r.summaries.put(entry);
        return true;
    }

    SummaryCache cache(const std::string& ramble_id) {
        std::lock_guard lock(mu_);
        return rambles_[ramble_id].summaries;
    }

private:
    struct Entry {
        std::string text;
        std::string content_hash;
        std::vector<std::string> keywords;
        std::string keyword_hash;
        SummaryCache summaries;
    };
    std::mutex mu_;
    std::map<std::string, Entry> rambles_;
};

}  // namespace testsupport
