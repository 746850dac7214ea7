#pragma once

// Request-level orchestration over the store, the gist engine and the
// summary scheduler. Transport-agnostic: the HTTP layer and the CLI both
// drive this class.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rambler/document.hpp"
#include "rambler/gist_engine.hpp"
#include "rambler/persistence.hpp"
#include "rambler/store.hpp"
#include "rambler/summary_scheduler.hpp"

namespace rambler {

using Revision = std::optional<std::uint64_t>;
using nlohmann::json;

struct ServiceOptions {
    RakeParams rake;
    /// Block mutating calls until their summaries are generated (batch mode).
    bool wait_for_summaries = false;
};

inline json outcome_to_json(const SummaryOutcome& o) {
    json j{{"ok", o.ok}, {"from_cache", o.from_cache}};
    if (o.ok) {
        j["text"] = o.text;
        j["stored"] = o.stored;
    } else {
        j["error"] = {{"code", to_string(o.code)}, {"message", o.message}};
    }
    return j;
}

class Service : private SummaryHost {
public:
    Service(DocumentStore& store, std::shared_ptr<GistBackend> backend, ServiceOptions options = {},
            EngineOptions engine_options = {})
        : store_(store), options_(std::move(options)), engine_(std::move(backend), engine_options), scheduler_(engine_, *this) {}

    ~Service() override { scheduler_.wait_idle(); }

    GistEngine& engine() { return engine_; }
    SummaryScheduler& scheduler() { return scheduler_; }
    DocumentStore& store() { return store_; }

    /// Blocks until background summary generation has drained.
    void wait_idle() { scheduler_.wait_idle(); }

    /// Summary failures seen by pregeneration launched in wait mode.
    std::vector<std::string> summary_failures() const {
        std::lock_guard lock(mu_);
        return summary_failures_;
    }

    json create_document(std::string title = {}) {
        auto id = store_.create(std::move(title));
        return respond(id, {{"doc_id", id}});
    }

    json get_document(const std::string& doc_id) { return persistence::to_json(store_.snapshot(doc_id)); }

    json create_ramble(const std::string& doc_id, Revision rev, std::optional<std::size_t> insert_index) {
        auto rid = store_.mutate(doc_id, rev, [&](RambleDocument& d) { return rambler::create_ramble(d, insert_index); });
        return respond(doc_id, {{"ramble_id", rid}});
    }

    /// clean -> commit -> keywords, then summaries in the background.
    json finalize(const std::string& doc_id, const std::string& ramble_id, Revision rev, const std::string& raw_text) {
        if (text::trim(raw_text).empty()) fail(ErrorCode::BadRequest, "raw_text is empty", {ramble_id});
        store_.mutate(doc_id, rev, [&](RambleDocument& d) {
            require_idle(d, ramble_id);
            record_raw_capture(d, ramble_id, raw_text);
        });
        auto cleaned = engine_.clean_transcript(raw_text);
        store_.mutate(doc_id, std::nullopt, [&](RambleDocument& d) {
            require_idle(d, ramble_id);
            commit_text(d, ramble_id, cleaned, options_.rake);
        });
        auto extras = schedule(doc_id, {ramble_id});
        extras["ramble"] = ramble_json(doc_id, ramble_id);
        return respond(doc_id, extras);
    }

    json begin_editing(const std::string& doc_id, const std::string& ramble_id, Revision rev) {
        store_.mutate(doc_id, rev, [&](RambleDocument& d) { rambler::begin_editing(d, ramble_id); });
        return respond(doc_id, {{"ramble", ramble_json(doc_id, ramble_id)}});
    }

    json edit_text(const std::string& doc_id, const std::string& ramble_id, Revision rev, std::string new_text) {
        store_.mutate(doc_id, rev, [&](RambleDocument& d) { commit_text(d, ramble_id, std::move(new_text), options_.rake); });
        auto extras = schedule(doc_id, {ramble_id});
        extras["ramble"] = ramble_json(doc_id, ramble_id);
        return respond(doc_id, extras);
    }

    json respeak_begin(const std::string& doc_id, const std::string& ramble_id, Revision rev) {
        auto session = store_.mutate(doc_id, rev, [&](RambleDocument& d) { return rambler::respeak_begin(d, ramble_id); });
        return respond(doc_id, {{"session", {{"ramble_id", session.ramble_id}, {"original_text", session.original_text}}}});
    }

    json respeak_commit(const std::string& doc_id, const std::string& ramble_id, Revision rev, RespeakAction action,
                        const std::string& new_text) {
        Cleaner clean = [&](std::string_view t) { return engine_.clean_transcript(t); };
        auto result = store_.mutate(doc_id, rev, [&](RambleDocument& d) {
            // the final segment joins the buffer within this one mutation
            auto i = d.index_of(ramble_id);
            if (i && d.rambles[*i].respeak && action != RespeakAction::Discard)
                detail::append_segment(*d.rambles[*i].respeak, new_text);
            return rambler::respeak_commit(d, ramble_id, action, clean, options_.rake);
        });
        json extras{{"text", result}};
        if (action != RespeakAction::Discard) extras.update(schedule(doc_id, {ramble_id}));
        extras["ramble"] = ramble_json(doc_id, ramble_id);
        return respond(doc_id, extras);
    }

    json split_manual(const std::string& doc_id, const std::string& ramble_id, Revision rev, std::size_t boundary) {
        auto ids = store_.mutate(doc_id, rev, [&](RambleDocument& d) { return manual_split(d, ramble_id, boundary, options_.rake); });
        auto extras = schedule(doc_id, {ids.first, ids.second});
        extras["ramble_ids"] = {ids.first, ids.second};
        return respond(doc_id, extras);
    }

    /// Replaces one ramble with N parts at the same position.
    json split_semantic(const std::string& doc_id, const std::string& ramble_id, Revision rev) {
        auto before = checked_snapshot(doc_id, rev);
        const auto& r = require_ramble(before, ramble_id);
        if (text::trim(r.text).empty()) fail(ErrorCode::BadRequest, "ramble has no text to split", {ramble_id});
        auto plan = engine_.semantic_split(r.text);
        auto hash = r.content_hash;
        auto ids = store_.mutate(doc_id, rev, [&](RambleDocument& d) {
            require_unchanged(d, ramble_id, hash);
            return replace_with_parts(d, ramble_id, plan.parts, options_.rake);
        });
        auto extras = schedule(doc_id, ids);
        extras["ramble_ids"] = ids;
        return respond(doc_id, extras);
    }

    /// Manual: fold each following ramble onto the first. Semantic: merged
    /// text replaces the selection at the first selected position.
    json merge(const std::string& doc_id, const std::vector<std::string>& ramble_ids, Revision rev, bool semantic) {
        if (ramble_ids.size() < 2) fail(ErrorCode::BadRequest, "merge needs at least two ramble ids");
        if (!semantic) {
            auto merged = store_.mutate(doc_id, rev, [&](RambleDocument& d) {
                for (std::size_t i = 1; i < ramble_ids.size(); ++i) manual_merge(d, ramble_ids[0], ramble_ids[i], options_.rake);
                return ramble_ids[0];
            });
            auto extras = schedule(doc_id, {merged});
            extras["merged_id"] = merged;
            return respond(doc_id, extras);
        }
        auto before = checked_snapshot(doc_id, rev);
        std::vector<std::string> texts;
        std::vector<std::string> keywords;
        std::map<std::string, std::string> hashes;
        for (const auto& id : ramble_ids) {
            const auto& r = require_ramble(before, id);
            texts.push_back(r.text);
            hashes[id] = r.content_hash;
            for (auto& k : r.active_keywords()) {
                if (std::find(keywords.begin(), keywords.end(), k) == keywords.end()) keywords.push_back(std::move(k));
            }
        }
        auto merged_text = engine_.semantic_merge(texts, keywords);
        auto merged = store_.mutate(doc_id, rev, [&](RambleDocument& d) {
            for (const auto& [id, h] : hashes) require_unchanged(d, id, h);
            return replace_with_merged(d, ramble_ids, merged_text, options_.rake);
        });
        auto extras = schedule(doc_id, {merged});
        extras["merged_id"] = merged;
        return respond(doc_id, extras);
    }

    json reorder(const std::string& doc_id, const std::string& ramble_id, std::size_t new_index, Revision rev) {
        store_.mutate(doc_id, rev, [&](RambleDocument& d) { rambler::reorder(d, ramble_id, new_index); });
        return respond(doc_id, {});
    }

    json delete_ramble(const std::string& doc_id, const std::string& ramble_id, Revision rev) {
        store_.mutate(doc_id, rev, [&](RambleDocument& d) { rambler::delete_ramble(d, ramble_id); });
        return respond(doc_id, {});
    }

    json toggle_keyword(const std::string& doc_id, const std::string& ramble_id, Revision rev, const std::string& word) {
        store_.mutate(doc_id, rev, [&](RambleDocument& d) { rambler::toggle_keyword(d, ramble_id, word); });
        auto snap = store_.snapshot(doc_id);
        const auto& r = require_ramble(snap, ramble_id);
        return respond(doc_id, {{"active_keywords", r.active_keywords()}, {"ramble", persistence::ramble_to_json(r)}});
    }

    /// Summaries for the current keywords; cached levels cost nothing.
    json regenerate(const std::string& doc_id, const std::string& ramble_id, Revision rev) {
        auto snap = checked_snapshot(doc_id, rev);
        const auto& r = require_ramble(snap, ramble_id);
        if (text::trim(r.text).empty()) fail(ErrorCode::BadRequest, "ramble has no text to summarize", {ramble_id});
        auto outcomes = scheduler_.pregenerate({doc_id, ramble_id}).wait();
        json levels = json::object();
        for (const auto& [level, o] : outcomes) levels[std::string(to_string(level))] = outcome_to_json(o);
        return respond(doc_id, {{"levels", levels}});
    }

    json transform_propose(const std::string& doc_id, const std::string& ramble_id, Revision rev, const std::string& prompt,
                           bool include_keywords, bool auto_accept = false) {
        auto snap = checked_snapshot(doc_id, rev);
        const auto& r = require_ramble(snap, ramble_id);
        if (text::trim(r.text).empty()) fail(ErrorCode::BadRequest, "ramble has no text to transform", {ramble_id});
        auto candidate = engine_.custom_transform(r.text, prompt, include_keywords, r.active_keywords());
        auto proposal_id = "p-" + random_hex_id();
        {
            std::lock_guard lock(mu_);
            proposals_[proposal_id] = Proposal{doc_id, ramble_id, r.content_hash, candidate};
        }
        if (auto_accept) {
            auto accepted = transform_accept(doc_id, ramble_id, proposal_id, snap.revision);
            accepted["candidate_text"] = candidate;
            accepted["proposal_id"] = proposal_id;
            return accepted;
        }
        return respond(doc_id, {{"candidate_text", candidate}, {"proposal_id", proposal_id}});
    }

    json transform_accept(const std::string& doc_id, const std::string& ramble_id, const std::string& proposal_id, Revision rev) {
        Proposal p;
        {
            std::lock_guard lock(mu_);
            auto it = proposals_.find(proposal_id);
            if (it == proposals_.end() || it->second.doc_id != doc_id || it->second.ramble_id != ramble_id)
                fail(ErrorCode::NotFound, "no transform proposal " + proposal_id, {proposal_id});
            p = it->second;
        }
        store_.mutate(doc_id, rev, [&](RambleDocument& d) {
            require_unchanged(d, ramble_id, p.base_hash);
            commit_text(d, ramble_id, p.candidate, options_.rake);
        });
        {
            std::lock_guard lock(mu_);
            proposals_.erase(proposal_id);
        }
        auto extras = schedule(doc_id, {ramble_id});
        extras["ramble"] = ramble_json(doc_id, ramble_id);
        return respond(doc_id, extras);
    }

    std::string export_text(const std::string& doc_id, ZoomLevel level) {
        return rambler::export_text(store_.snapshot(doc_id), level);
    }

    /// Event sink for summary streams: (event name, payload) -> keep going?
    using StreamEmitter = std::function<bool(const std::string&, const json&)>;

    /// `done` alone when cached; otherwise `chunk` deltas then `done`, or
    /// a terminal `error`.
    void stream_summary(const std::string& doc_id, const std::string& ramble_id, ZoomLevel level, const StreamEmitter& emit) {
        if (level == ZoomLevel::Full) fail(ErrorCode::BadRequest, "the full level is not summarized");
        require_ramble(store_.snapshot(doc_id), ramble_id);
        auto flight = scheduler_.request({doc_id, ramble_id}, level);
        auto level_name = std::string(to_string(level));
        bool open = true;
        auto outcome = flight->follow([&](std::string_view delta) {
            if (open) open = emit("chunk", {{"level", level_name}, {"delta", std::string(delta)}});
        });
        if (!open) return;
        if (outcome.ok) {
            emit("done", {{"level", level_name}, {"text", outcome.text}});
        } else {
            emit("error", {{"code", to_string(outcome.code)}, {"message", outcome.message}});
        }
    }

private:
    struct Proposal {
        std::string doc_id;
        std::string ramble_id;
        std::string base_hash;
        std::string candidate;
    };

    std::optional<GistSnapshot> snapshot(const SummaryTarget& target, ZoomLevel level) override {
        try {
            auto doc = store_.snapshot(target.doc_id);
            const auto* r = doc.find(target.ramble_id);
            if (!r) return std::nullopt;
            GistSnapshot snap{r->text, r->content_hash, r->active_keywords(), r->keyword_hash(), std::nullopt};
            snap.fresh = r->summaries.lookup(level, snap.content_hash, snap.keyword_hash);
            return snap;
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    bool store(const SummaryTarget& target, const SummaryEntry& entry) override {
        return store_.write_summary(target.doc_id, target.ramble_id, entry);
    }

    json schedule(const std::string& doc_id, const std::vector<std::string>& ramble_ids) {
        std::vector<PregenerateHandle> handles;
        for (const auto& id : ramble_ids) handles.push_back(scheduler_.pregenerate({doc_id, id}));
        if (!options_.wait_for_summaries) return json::object();
        json summaries = json::object();
        for (std::size_t i = 0; i < handles.size(); ++i) {
            json levels = json::object();
            for (const auto& [level, o] : handles[i].wait()) {
                levels[std::string(to_string(level))] = outcome_to_json(o);
                if (!o.ok) {
                    std::lock_guard lock(mu_);
                    summary_failures_.push_back(ramble_ids[i] + "/" + std::string(to_string(level)) + ": " + o.message);
                }
            }
            summaries[ramble_ids[i]] = levels;
        }
        return {{"summaries", summaries}};
    }

    json respond(const std::string& doc_id, json extras) {
        auto doc = persistence::to_json(store_.snapshot(doc_id));
        extras["revision"] = doc["revision"];
        extras["document"] = std::move(doc);
        return extras;
    }

    json ramble_json(const std::string& doc_id, const std::string& ramble_id) {
        auto doc = store_.snapshot(doc_id);
        return persistence::ramble_to_json(require_ramble(doc, ramble_id));
    }

    RambleDocument checked_snapshot(const std::string& doc_id, Revision rev) {
        auto doc = store_.snapshot(doc_id);
        if (rev && *rev != doc.revision)
            fail(ErrorCode::Conflict, "revision mismatch: client has " + std::to_string(*rev) + ", document is at " +
                                          std::to_string(doc.revision),
                 {std::to_string(doc.revision)});
        return doc;
    }

    static const Ramble& require_ramble(const RambleDocument& doc, const std::string& ramble_id) {
        const auto* r = doc.find(ramble_id);
        if (!r) fail(ErrorCode::NotFound, "no ramble with id " + ramble_id, {ramble_id});
        return *r;
    }

    static void require_idle(const RambleDocument& doc, const std::string& ramble_id) {
        const auto& r = require_ramble(doc, ramble_id);
        if (r.state != RambleState::Idle)
            fail(ErrorCode::InvalidState, "ramble " + ramble_id + " is " + std::string(to_string(r.state)), {ramble_id});
    }

    static void require_unchanged(const RambleDocument& doc, const std::string& ramble_id, const std::string& hash) {
        if (require_ramble(doc, ramble_id).content_hash != hash)
            fail(ErrorCode::Conflict, "ramble " + ramble_id + " changed while its gist was generated", {ramble_id});
    }

    DocumentStore& store_;
    ServiceOptions options_;
    GistEngine engine_;
    SummaryScheduler scheduler_;
    mutable std::mutex mu_;
    std::map<std::string, Proposal> proposals_;
    std::vector<std::string> summary_failures_;
};

}  // namespace rambler
