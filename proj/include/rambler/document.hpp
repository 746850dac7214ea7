#pragma once

// Ramble document model and the manual macro-revision operations.
//
// Every operation validates before it touches the document, so a failed
// call leaves it bit-identical; every successful mutating call bumps
// `revision` by exactly one.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rambler/error.hpp"
#include "rambler/keywords.hpp"
#include "rambler/summary_cache.hpp"
#include "rambler/text.hpp"

namespace rambler {

enum class RambleState { Idle, Respeaking, Editing };

inline std::string_view to_string(RambleState s) {
    switch (s) {
        case RambleState::Idle: return "idle";
        case RambleState::Respeaking: return "respeaking";
        case RambleState::Editing: return "editing";
    }
    return "idle";
}

struct RawCapture {
    std::string text;
    std::string at;

    friend bool operator==(const RawCapture&, const RawCapture&) = default;
};

struct RespeakSession {
    std::string ramble_id;
    std::string original_text;  // frozen at begin
    std::string new_text;

    friend bool operator==(const RespeakSession&, const RespeakSession&) = default;
};

enum class RespeakAction { Append, Replace, Discard };

inline std::optional<RespeakAction> parse_respeak_action(std::string_view s) {
    if (s == "append") return RespeakAction::Append;
    if (s == "replace") return RespeakAction::Replace;
    if (s == "discard") return RespeakAction::Discard;
    return std::nullopt;
}

inline RespeakAction require_respeak_action(std::string_view s) {
    if (auto a = parse_respeak_action(s)) return *a;
    fail(ErrorCode::BadRequest, "respeak mode must be append, replace or discard", {std::string(s)});
}

inline std::string content_hash_of(std::string_view text) { return text::sha256_hex(text); }

struct Ramble {
    static constexpr std::size_t kMaxRawHistory = 50;

    std::string id;
    std::string text;
    std::vector<RawCapture> raw_history;  // most recent last
    KeywordSet keywords;
    SummaryCache summaries;
    std::string content_hash = content_hash_of("");
    RambleState state = RambleState::Idle;
    std::optional<RespeakSession> respeak;  // engaged iff state == Respeaking

    std::vector<std::string> active_keywords() const { return rambler::active_keywords(keywords, text); }
    std::string keyword_hash() const { return rambler::keyword_hash(active_keywords()); }

    void push_raw(std::string raw, std::string at = now_iso8601()) {
        raw_history.push_back({std::move(raw), std::move(at)});
        if (raw_history.size() > kMaxRawHistory)
            raw_history.erase(raw_history.begin(), raw_history.end() - static_cast<std::ptrdiff_t>(kMaxRawHistory));
    }

    friend bool operator==(const Ramble&, const Ramble&) = default;
};

struct RambleDocument {
    std::string doc_id;
    std::string title;
    std::vector<Ramble> rambles;
    std::uint64_t revision = 0;
    std::string created_at;
    std::string updated_at;
    std::uint64_t next_ramble_seq = 1;

    std::optional<std::size_t> index_of(std::string_view ramble_id) const {
        for (std::size_t i = 0; i < rambles.size(); ++i) {
            if (rambles[i].id == ramble_id) return i;
        }
        return std::nullopt;
    }

    const Ramble* find(std::string_view ramble_id) const {
        auto i = index_of(ramble_id);
        return i ? &rambles[*i] : nullptr;
    }

    std::vector<std::string> ramble_ids() const {
        std::vector<std::string> ids;
        for (const auto& r : rambles) ids.push_back(r.id);
        return ids;
    }

    friend bool operator==(const RambleDocument&, const RambleDocument&) = default;
};

inline RambleDocument make_document(std::string doc_id, std::string title = {}) {
    RambleDocument doc;
    doc.doc_id = std::move(doc_id);
    doc.title = std::move(title);
    doc.created_at = now_iso8601();
    doc.updated_at = doc.created_at;
    return doc;
}

namespace detail {

inline void touch(RambleDocument& doc) {
    ++doc.revision;
    doc.updated_at = now_iso8601();
}

inline std::size_t require_index(const RambleDocument& doc, std::string_view ramble_id) {
    auto i = doc.index_of(ramble_id);
    if (!i) fail(ErrorCode::NotFound, "no ramble with id " + std::string(ramble_id), {std::string(ramble_id)});
    return *i;
}

inline void require_not_respeaking(const Ramble& r) {
    if (r.state == RambleState::Respeaking)
        fail(ErrorCode::InvalidState, "ramble " + r.id + " is being respoken", {r.id});
}

inline void append_segment(RespeakSession& session, std::string_view segment) {
    auto piece = text::trim(segment);
    if (piece.empty()) return;
    if (!session.new_text.empty()) session.new_text.push_back(' ');
    session.new_text.append(piece);
}

inline std::string next_ramble_id(RambleDocument& doc) { return "r" + std::to_string(doc.next_ramble_seq++); }

/// Writes text into a ramble: new hash, stale summaries, fresh keywords.
inline void apply_text(Ramble& r, std::string new_text, const KeywordSet& prior_keywords, const RakeParams& params) {
    r.text = std::move(new_text);
    r.content_hash = content_hash_of(r.text);
    r.summaries.mark_stale_except(r.content_hash);
    r.keywords = recompute_keywords(r.text, prior_keywords, params);
}

inline KeywordSet manual_entries(const KeywordSet& set) {
    KeywordSet out;
    for (const auto& [w, e] : set) {
        if (e.source == KeywordSource::Manual) out.emplace(w, e);
    }
    return out;
}

}  // namespace detail

inline std::string create_ramble(RambleDocument& doc, std::optional<std::size_t> insert_index = std::nullopt) {
    std::size_t index = insert_index.value_or(doc.rambles.size());
    if (index > doc.rambles.size())
        fail(ErrorCode::BadRequest, "insert index " + std::to_string(index) + " out of range [0, " +
                                        std::to_string(doc.rambles.size()) + "]");
    Ramble r;
    r.id = detail::next_ramble_id(doc);
    auto id = r.id;
    doc.rambles.insert(doc.rambles.begin() + static_cast<std::ptrdiff_t>(index), std::move(r));
    detail::touch(doc);
    return id;
}

/// Stores a raw transcript capture (audit trail for finalize/respeak).
inline void record_raw_capture(RambleDocument& doc, std::string_view ramble_id, std::string raw) {
    auto i = detail::require_index(doc, ramble_id);
    doc.rambles[i].push_raw(std::move(raw));
    detail::touch(doc);
}

/// Keyboard micro-editing: Idle -> Editing. commit_text returns to Idle.
inline void begin_editing(RambleDocument& doc, std::string_view ramble_id) {
    auto i = detail::require_index(doc, ramble_id);
    auto& r = doc.rambles[i];
    if (r.state != RambleState::Idle)
        fail(ErrorCode::InvalidState, "ramble " + r.id + " is " + std::string(to_string(r.state)), {r.id});
    r.state = RambleState::Editing;
    detail::touch(doc);
}

inline const Ramble& commit_text(RambleDocument& doc, std::string_view ramble_id, std::string new_text,
                                 const RakeParams& params = {}) {
    auto i = detail::require_index(doc, ramble_id);
    auto& r = doc.rambles[i];
    detail::require_not_respeaking(r);
    if (text::trim(new_text).empty()) fail(ErrorCode::BadRequest, "cannot commit empty text", {r.id});
    detail::apply_text(r, std::move(new_text), r.keywords, params);
    r.state = RambleState::Idle;
    detail::touch(doc);
    return r;
}

inline std::pair<std::string, std::string> manual_split(RambleDocument& doc, std::string_view ramble_id,
                                                        std::size_t boundary, const RakeParams& params = {}) {
    auto i = detail::require_index(doc, ramble_id);
    const auto& src = doc.rambles[i];
    detail::require_not_respeaking(src);
    if (boundary == 0 || boundary >= src.text.size())
        fail(ErrorCode::BadRequest, "split boundary must lie strictly inside the text", {src.id});
    if ((static_cast<unsigned char>(src.text[boundary]) & 0xC0) == 0x80)
        fail(ErrorCode::BadRequest, "split boundary falls inside a UTF-8 sequence", {src.id});
    std::string left(text::trim(std::string_view(src.text).substr(0, boundary)));
    std::string right(text::trim(std::string_view(src.text).substr(boundary)));
    if (left.empty() || right.empty())
        fail(ErrorCode::BadRequest, "split would create an empty ramble", {src.id});

    auto prior = src.keywords;
    Ramble right_ramble;
    right_ramble.id = detail::next_ramble_id(doc);
    detail::apply_text(right_ramble, std::move(right), prior, params);
    auto& left_ramble = doc.rambles[i];
    detail::apply_text(left_ramble, std::move(left), prior, params);
    std::pair<std::string, std::string> ids{left_ramble.id, right_ramble.id};
    doc.rambles.insert(doc.rambles.begin() + static_cast<std::ptrdiff_t>(i + 1), std::move(right_ramble));
    detail::touch(doc);
    return ids;
}

/// Drops `source_id` onto `target_id`: target text, one space, source text.
inline std::string manual_merge(RambleDocument& doc, std::string_view target_id, std::string_view source_id,
                                const RakeParams& params = {}) {
    if (target_id == source_id) fail(ErrorCode::BadRequest, "cannot merge a ramble with itself", {std::string(target_id)});
    auto ti = detail::require_index(doc, target_id);
    auto si = detail::require_index(doc, source_id);
    detail::require_not_respeaking(doc.rambles[ti]);
    detail::require_not_respeaking(doc.rambles[si]);

    auto source = std::move(doc.rambles[si]);
    auto& target = doc.rambles[ti];
    std::string merged(text::trim(target.text));
    auto tail = text::trim(source.text);
    if (!merged.empty() && !tail.empty()) merged.push_back(' ');
    merged.append(tail);

    auto prior = detail::manual_entries(source.keywords);
    for (const auto& [w, e] : detail::manual_entries(target.keywords)) prior[w] = e;
    detail::apply_text(target, std::move(merged), prior, params);
    for (auto& cap : source.raw_history) target.push_raw(std::move(cap.text), std::move(cap.at));
    target.state = RambleState::Idle;
    auto id = target.id;
    doc.rambles.erase(doc.rambles.begin() + static_cast<std::ptrdiff_t>(si));
    detail::touch(doc);
    return id;
}

/// Tap-to-toggle on one word of a ramble.
inline const KeywordSet& toggle_keyword(RambleDocument& doc, std::string_view ramble_id, std::string_view word) {
    auto& r = doc.rambles[detail::require_index(doc, ramble_id)];
    r.keywords = toggle_keyword(r.keywords, r.text, word);
    detail::touch(doc);
    return r.keywords;
}

inline void reorder(RambleDocument& doc, std::string_view ramble_id, std::size_t new_index) {
    auto i = detail::require_index(doc, ramble_id);
    if (new_index >= doc.rambles.size())
        fail(ErrorCode::BadRequest, "new index " + std::to_string(new_index) + " out of range", {std::string(ramble_id)});
    auto moved = std::move(doc.rambles[i]);
    doc.rambles.erase(doc.rambles.begin() + static_cast<std::ptrdiff_t>(i));
    doc.rambles.insert(doc.rambles.begin() + static_cast<std::ptrdiff_t>(new_index), std::move(moved));
    detail::touch(doc);
}

inline void delete_ramble(RambleDocument& doc, std::string_view ramble_id) {
    auto i = detail::require_index(doc, ramble_id);
    detail::require_not_respeaking(doc.rambles[i]);
    doc.rambles.erase(doc.rambles.begin() + static_cast<std::ptrdiff_t>(i));
    detail::touch(doc);
}

inline RespeakSession respeak_begin(RambleDocument& doc, std::string_view ramble_id) {
    auto i = detail::require_index(doc, ramble_id);
    auto& r = doc.rambles[i];
    if (r.state != RambleState::Idle)
        fail(ErrorCode::InvalidState, "ramble " + r.id + " is already " + std::string(to_string(r.state)), {r.id});
    r.state = RambleState::Respeaking;
    r.respeak = RespeakSession{r.id, r.text, {}};
    detail::touch(doc);
    return *r.respeak;
}

/// Appends a final transcript segment to the open session's buffer.
inline const RespeakSession& respeak_feed(RambleDocument& doc, std::string_view ramble_id, std::string_view segment) {
    auto i = detail::require_index(doc, ramble_id);
    auto& r = doc.rambles[i];
    if (!r.respeak) fail(ErrorCode::InvalidState, "no open respeak session on " + r.id, {r.id});
    detail::append_segment(*r.respeak, segment);
    detail::touch(doc);
    return *r.respeak;
}

using Cleaner = std::function<std::string(std::string_view)>;

/// Closes the open session. Append and Replace run `clean` over the full
/// resulting text; Discard restores nothing because nothing was written.
/// If `clean` throws the session stays open and the document is unchanged.
inline std::string respeak_commit(RambleDocument& doc, std::string_view ramble_id, RespeakAction action,
                                  const Cleaner& clean, const RakeParams& params = {}) {
    auto i = detail::require_index(doc, ramble_id);
    auto& r = doc.rambles[i];
    if (!r.respeak) fail(ErrorCode::InvalidState, "no open respeak session on " + r.id, {r.id});
    const auto& session = *r.respeak;

    if (action == RespeakAction::Discard) {
        r.respeak.reset();
        r.state = RambleState::Idle;
        detail::touch(doc);
        return r.text;
    }

    std::string combined;
    if (action == RespeakAction::Append) {
        combined = text::normalize_whitespace(session.original_text + " " + session.new_text);
    } else {
        combined = text::normalize_whitespace(session.new_text);
    }
    if (combined.empty()) fail(ErrorCode::BadRequest, "respeak would leave the ramble empty", {r.id});
    std::string cleaned = clean(combined);
    if (text::trim(cleaned).empty()) fail(ErrorCode::BackendFailure, "cleaner returned empty text", {r.id});

    if (!session.new_text.empty()) r.push_raw(session.new_text);
    r.respeak.reset();
    r.state = RambleState::Idle;
    detail::apply_text(r, std::move(cleaned), r.keywords, params);
    detail::touch(doc);
    return r.text;
}

/// Replaces one ramble with `parts` in place; the first part keeps the id.
inline std::vector<std::string> replace_with_parts(RambleDocument& doc, std::string_view ramble_id,
                                                   const std::vector<std::string>& parts, const RakeParams& params = {}) {
    auto i = detail::require_index(doc, ramble_id);
    detail::require_not_respeaking(doc.rambles[i]);
    if (parts.size() < 2) fail(ErrorCode::BadRequest, "a split needs at least two parts", {std::string(ramble_id)});
    for (const auto& p : parts) {
        if (text::trim(p).empty()) fail(ErrorCode::BadRequest, "a split part is empty", {std::string(ramble_id)});
    }
    auto prior = doc.rambles[i].keywords;
    std::vector<Ramble> extra;
    for (std::size_t k = 1; k < parts.size(); ++k) {
        Ramble r;
        r.id = detail::next_ramble_id(doc);
        detail::apply_text(r, std::string(text::trim(parts[k])), prior, params);
        extra.push_back(std::move(r));
    }
    detail::apply_text(doc.rambles[i], std::string(text::trim(parts[0])), prior, params);
    std::vector<std::string> ids{doc.rambles[i].id};
    for (const auto& r : extra) ids.push_back(r.id);
    doc.rambles.insert(doc.rambles.begin() + static_cast<std::ptrdiff_t>(i + 1), std::make_move_iterator(extra.begin()),
                       std::make_move_iterator(extra.end()));
    detail::touch(doc);
    return ids;
}

/// Replaces the selected rambles with one holding `merged_text`, at the
/// position (and with the id) of the first selected ramble.
inline std::string replace_with_merged(RambleDocument& doc, const std::vector<std::string>& ramble_ids,
                                       std::string merged_text, const RakeParams& params = {}) {
    if (ramble_ids.size() < 2) fail(ErrorCode::BadRequest, "a merge needs at least two rambles");
    std::vector<std::string> sorted = ramble_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        fail(ErrorCode::BadRequest, "a ramble is selected twice");
    for (const auto& id : ramble_ids) detail::require_not_respeaking(doc.rambles[detail::require_index(doc, id)]);
    if (text::trim(merged_text).empty()) fail(ErrorCode::BadRequest, "merged text is empty");

    KeywordSet prior;
    for (auto it = ramble_ids.rbegin(); it != ramble_ids.rend(); ++it) {
        for (const auto& [w, e] : detail::manual_entries(doc.find(*it)->keywords)) prior[w] = e;
    }
    auto& keeper = doc.rambles[*doc.index_of(ramble_ids.front())];
    for (std::size_t k = 1; k < ramble_ids.size(); ++k) {
        for (const auto& cap : doc.find(ramble_ids[k])->raw_history) keeper.push_raw(cap.text, cap.at);
    }
    detail::apply_text(keeper, std::move(merged_text), prior, params);
    keeper.state = RambleState::Idle;
    std::erase_if(doc.rambles, [&](const Ramble& r) {
        return std::find(ramble_ids.begin() + 1, ramble_ids.end(), r.id) != ramble_ids.end();
    });
    detail::touch(doc);
    return ramble_ids.front();
}

/// Stores a generated summary iff it was computed for the ramble's current
/// text and keywords. Not a document mutation: revision is untouched.
inline bool store_summary(RambleDocument& doc, std::string_view ramble_id, SummaryEntry entry) {
    auto i = doc.index_of(ramble_id);
    if (!i) return false;
    auto& r = doc.rambles[*i];
    if (entry.content_hash != r.content_hash || entry.keyword_hash != r.keyword_hash()) return false;
    entry.stale = false;
    r.summaries.put(std::move(entry));
    return true;
}

/// Ramble texts (FULL) or fresh level summaries, joined by a blank line.
inline std::string export_text(const RambleDocument& doc, ZoomLevel level) {
    std::vector<std::string> parts;
    std::vector<std::string> missing;
    for (const auto& r : doc.rambles) {
        if (level == ZoomLevel::Full) {
            parts.push_back(r.text);
            continue;
        }
        auto entry = r.summaries.lookup(level, r.content_hash, r.keyword_hash());
        if (!entry) {
            missing.push_back(r.id);
        } else {
            parts.push_back(entry->text);
        }
    }
    if (!missing.empty())
        fail(ErrorCode::InvalidState,
             "no fresh " + std::string(to_string(level)) + " summary for: " + text::join(missing, ", "), missing);
    return text::join(parts, "\n\n");
}

}  // namespace rambler
