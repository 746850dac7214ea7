#pragma once

// Transcript sources: the contract between live transcription and the
// dictation loop, a scripted source for tests and batch runs, and a queue
// source fed by a vendor websocket adapter.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rambler/error.hpp"
#include "rambler/text.hpp"

namespace rambler::stt {

enum class EventKind { Partial, Final, EndOfStream };

struct TranscriptEvent {
    EventKind kind = EventKind::EndOfStream;
    std::string text;
    std::chrono::steady_clock::time_point at = std::chrono::steady_clock::now();
};

/// Thrown by a source whose underlying stream broke.
class SourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TranscriptSource {
public:
    virtual ~TranscriptSource() = default;
    /// Blocks for the next event. After EndOfStream it keeps returning EndOfStream.
    virtual TranscriptEvent next_event() = 0;
    virtual void close() = 0;
};

/// Emits, per utterance, word-prefix Partials then a Final, then EndOfStream.
/// `fail_after` injects a SourceError after that many events.
class ScriptedSource : public TranscriptSource {
public:
    explicit ScriptedSource(std::vector<std::string> utterances, std::optional<std::size_t> fail_after = std::nullopt)
        : fail_after_(fail_after) {
        for (const auto& u : utterances) {
            auto words = text::split_words(u);
            if (words.empty()) continue;
            std::size_t partials = std::max<std::size_t>(1, words.size() - 1);
            std::string prefix;
            for (std::size_t i = 0; i < partials; ++i) {
                if (i > 0) prefix.push_back(' ');
                prefix.append(words[i]);
                script_.push_back({EventKind::Partial, prefix});
            }
            script_.push_back({EventKind::Final, text::normalize_whitespace(u)});
        }
    }

    TranscriptEvent next_event() override {
        if (fail_after_ && emitted_ >= *fail_after_) throw SourceError("scripted source failure");
        if (closed_ || emitted_ >= script_.size()) {
            closed_ = true;
            return {EventKind::EndOfStream, {}};
        }
        auto ev = script_[emitted_++];
        ev.at = std::chrono::steady_clock::now();
        return ev;
    }

    void close() override { closed_ = true; }

private:
    std::vector<TranscriptEvent> script_;
    std::size_t emitted_ = 0;
    bool closed_ = false;
    std::optional<std::size_t> fail_after_;
};

/// Utterances from a UTF-8 file, one per line; blank lines are skipped.
inline std::vector<std::string> load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::BadRequest, "cannot read transcript file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!text::trim(line).empty()) lines.push_back(std::string(text::trim(line)));
    }
    return lines;
}

/// Parses one vendor adapter message: {"type": "partial"|"final", "text": ...}.
/// Any other type, or {"type": "end"}, ends the stream.
inline TranscriptEvent parse_vendor_message(std::string_view message) {
    auto j = nlohmann::json::parse(message, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw SourceError("malformed transcription message");
    auto type = j["type"].get<std::string>();
    std::string body = j.value("text", std::string{});
    if (type == "partial") return {EventKind::Partial, body};
    if (type == "final") return {EventKind::Final, body};
    return {EventKind::EndOfStream, {}};
}

/// Source fed by an adapter thread pushing raw vendor messages.
class QueueSource : public TranscriptSource {
public:
    void push_message(std::string_view message) {
        auto ev = parse_vendor_message(message);
        std::lock_guard lock(mu_);
        queue_.push_back(std::move(ev));
        cv_.notify_one();
    }

    void fail_stream(std::string reason) {
        std::lock_guard lock(mu_);
        failure_ = std::move(reason);
        cv_.notify_one();
    }

    TranscriptEvent next_event() override {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return !queue_.empty() || closed_ || failure_; });
        if (!queue_.empty()) {
            auto ev = std::move(queue_.front());
            queue_.pop_front();
            if (ev.kind == EventKind::EndOfStream) closed_ = true;
            return ev;
        }
        if (failure_) throw SourceError(*failure_);
        return {EventKind::EndOfStream, {}};
    }

    void close() override {
        std::lock_guard lock(mu_);
        closed_ = true;
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<TranscriptEvent> queue_;
    bool closed_ = false;
    std::optional<std::string> failure_;
};

struct DictationResult {
    std::string raw_text;  // Finals joined by single spaces
    bool failed = false;
    std::string error;
};

/// Consumes a source to EndOfStream. Partials go only to `on_partial`
/// (live display); Finals build the raw buffer. A broken source still
/// returns everything gathered so far.
inline DictationResult run_dictation(TranscriptSource& source,
                                     const std::function<void(std::string_view)>& on_partial = {}) {
    DictationResult result;
    try {
        while (true) {
            auto ev = source.next_event();
            if (ev.kind == EventKind::EndOfStream) break;
            if (ev.kind == EventKind::Partial) {
                if (on_partial) on_partial(ev.text);
                continue;
            }
            auto piece = text::normalize_whitespace(ev.text);
            if (piece.empty()) continue;
            if (!result.raw_text.empty()) result.raw_text.push_back(' ');
            result.raw_text.append(piece);
        }
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
    }
    source.close();
    return result;
}

}  // namespace rambler::stt
