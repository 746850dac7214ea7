#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "rambler/error.hpp"
#include "rambler/prompts.hpp"
#include "rambler/text.hpp"

namespace rambler {

using ChunkSink = std::function<void(std::string_view)>;

/// Text-generation contract behind clean/summarize/split/merge/transform.
///
/// `generate` delivers the response as ordered chunks and returns the full
/// text, which must equal the concatenation of the chunks. Failures throw
/// `Error` with code BackendFailure; a stream is never silently truncated.
/// Implementations must tolerate concurrent calls.
class GistBackend {
public:
    virtual ~GistBackend() = default;

    virtual std::string name() const = 0;
    virtual std::string model() const { return name(); }

    virtual std::string generate(const RenderedPrompt& prompt, const ChunkSink& sink) = 0;

    std::string identity() const { return name() + "/" + model(); }
};

/// Splits `out` into word-sized chunks (each word with its trailing
/// whitespace) and hands them to `sink`.
inline void emit_word_chunks(std::string_view out, const ChunkSink& sink) {
    if (!sink) return;
    std::size_t pos = 0;
    while (pos < out.size()) {
        std::size_t end = pos;
        while (end < out.size() && text::is_space(out[end])) ++end;
        while (end < out.size() && !text::is_space(out[end])) ++end;
        while (end < out.size() && text::is_space(out[end])) ++end;
        sink(out.substr(pos, end - pos));
        pos = end;
    }
}

}  // namespace rambler
