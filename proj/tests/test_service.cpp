#include <gtest/gtest.h>

#include "support.hpp"

using namespace rambler;
using testsupport::CountingBackend;

namespace {

const std::string kRaw = "so um the weather was mild today. our orchard apples need water before the long summer. then we went home";

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::BadRequest;
}

struct Fixture {
    explicit Fixture(std::shared_ptr<GistBackend> b, ServiceOptions opts = {}) : backend(std::move(b)), svc(store, backend, opts) {
        doc = svc.create_document("Notes")["doc_id"];
    }

    std::uint64_t rev() { return store.snapshot(doc).revision; }

    std::string add(const std::string& raw) {
        std::string rid = svc.create_ramble(doc, rev(), std::nullopt)["ramble_id"];
        svc.finalize(doc, rid, rev(), raw);
        return rid;
    }

    const Ramble& ramble(const std::string& rid) {
        snap = store.snapshot(doc);
        return *snap.find(rid);
    }

    DocumentStore store;
    std::shared_ptr<GistBackend> backend;
    Service svc;
    std::string doc;
    RambleDocument snap;
};

}  // namespace

TEST(Service, FinalizeCleansOnceAndSummarizesEachLevelOnce) {
    auto counting = std::make_shared<CountingBackend>();
    Fixture f(counting);
    auto rid = f.add(kRaw);
    f.svc.wait_idle();
    EXPECT_EQ(counting->calls(PromptKind::Clean), 1);
    EXPECT_EQ(counting->calls(PromptKind::Summarize), 3);

    const auto& r = f.ramble(rid);
    EXPECT_EQ(r.text, offline::clean(kRaw));
    ASSERT_EQ(r.raw_history.size(), 1u);
    EXPECT_EQ(r.raw_history[0].text, kRaw);
    EXPECT_FALSE(r.active_keywords().empty());
    for (auto level : kSummaryLevels) {
        auto e = r.summaries.lookup(level, r.content_hash, r.keyword_hash());
        ASSERT_TRUE(e);
        EXPECT_EQ(e->text, offline::summarize(r.text, level, r.active_keywords()).text);
    }

    counting->reset();
    auto again = f.svc.regenerate(f.doc, rid, f.rev());
    for (const auto& [level, o] : again["levels"].items()) EXPECT_TRUE(o["from_cache"].get<bool>()) << level;
    EXPECT_EQ(counting->total(), 0);
}

TEST(Service, RevisionIsCheckedOnEveryMutation) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto rid = f.add(kRaw);
    auto stale = f.rev() - 1;
    EXPECT_EQ(code_of([&] { f.svc.create_ramble(f.doc, stale, std::nullopt); }), ErrorCode::Conflict);
    EXPECT_EQ(code_of([&] { f.svc.begin_editing(f.doc, rid, stale); }), ErrorCode::Conflict);
    EXPECT_EQ(code_of([&] { f.svc.split_semantic(f.doc, rid, stale); }), ErrorCode::Conflict);
    EXPECT_EQ(code_of([&] { f.svc.transform_propose(f.doc, rid, stale, "x", false); }), ErrorCode::Conflict);
    EXPECT_EQ(code_of([&] { f.svc.delete_ramble(f.doc, rid, stale); }), ErrorCode::Conflict);
    EXPECT_EQ(code_of([&] { f.svc.get_document("missing"); }), ErrorCode::NotFound);
}

TEST(Service, CleanFailureKeepsRawAndText) {
    auto scripted = std::make_shared<testsupport::ScriptedBackend>(std::vector<std::string>{"!fail", "!fail"});
    Fixture f(scripted);
    std::string rid = f.svc.create_ramble(f.doc, f.rev(), std::nullopt)["ramble_id"];
    try {
        f.svc.finalize(f.doc, rid, f.rev(), "raw words here");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BackendFailure);
        EXPECT_EQ(e.details(), std::vector<std::string>{"raw words here"});
    }
    const auto& r = f.ramble(rid);
    EXPECT_EQ(r.text, "");
    ASSERT_EQ(r.raw_history.size(), 1u);
    EXPECT_EQ(r.raw_history[0].text, "raw words here");
}

TEST(Service, EditingBlocksFinalizeUntilCommitted) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto rid = f.add(kRaw);
    f.svc.begin_editing(f.doc, rid, f.rev());
    EXPECT_EQ(code_of([&] { f.svc.finalize(f.doc, rid, f.rev(), "more words"); }), ErrorCode::InvalidState);
    f.svc.edit_text(f.doc, rid, f.rev(), "The orchard is fine now.");
    EXPECT_EQ(f.ramble(rid).state, RambleState::Idle);
    EXPECT_EQ(f.ramble(rid).text, "The orchard is fine now.");
}

TEST(Service, RespeakModes) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto rid = f.add("i like tea");
    f.svc.respeak_begin(f.doc, rid, f.rev());
    EXPECT_EQ(code_of([&] { f.svc.respeak_begin(f.doc, rid, f.rev()); }), ErrorCode::InvalidState);
    f.svc.respeak_commit(f.doc, rid, f.rev(), RespeakAction::Append, "it is hot");
    EXPECT_EQ(f.ramble(rid).text, "I like tea. It is hot.");

    f.svc.respeak_begin(f.doc, rid, f.rev());
    f.svc.respeak_commit(f.doc, rid, f.rev(), RespeakAction::Replace, "coffee instead");
    EXPECT_EQ(f.ramble(rid).text, "Coffee instead.");

    auto before = f.ramble(rid);
    f.svc.respeak_begin(f.doc, rid, f.rev());
    f.svc.respeak_commit(f.doc, rid, f.rev(), RespeakAction::Discard, "ignored words");
    const auto& after = f.ramble(rid);
    EXPECT_EQ(after.text, before.text);
    EXPECT_EQ(after.keywords, before.keywords);
    EXPECT_EQ(after.state, RambleState::Idle);
}

TEST(Service, SemanticSplitKeepsPosition) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto a = f.add("first ramble stays first.");
    auto b = f.add(kRaw);
    auto c = f.add("last ramble stays last.");
    auto out = f.svc.split_semantic(f.doc, b, f.rev());
    std::vector<std::string> parts = out["ramble_ids"];
    ASSERT_EQ(parts.size(), 2u);
    auto ids = f.store.snapshot(f.doc).ramble_ids();
    ASSERT_EQ(ids.size(), 4u);
    EXPECT_EQ(ids.front(), a);
    EXPECT_EQ(ids.back(), c);
    auto doc = f.store.snapshot(f.doc);
    EXPECT_EQ(doc.rambles[1].text + " " + doc.rambles[2].text, offline::clean(kRaw));
}

TEST(Service, MergeManualAndSemantic) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto a = f.add("i like tea");
    auto b = f.add("i like tea. it is hot");
    auto c = f.add("coffee is fine");
    auto semantic = f.svc.merge(f.doc, {a, b}, f.rev(), true);
    std::string merged = semantic["merged_id"];
    EXPECT_EQ(f.ramble(merged).text, "I like tea. It is hot.");
    auto manual = f.svc.merge(f.doc, {merged, c}, f.rev(), false);
    EXPECT_EQ(f.ramble(manual["merged_id"]).text, "I like tea. It is hot. Coffee is fine.");
    EXPECT_EQ(f.store.snapshot(f.doc).rambles.size(), 1u);
    EXPECT_EQ(code_of([&] { f.svc.merge(f.doc, {merged}, f.rev(), false); }), ErrorCode::BadRequest);
}

TEST(Service, TransformProposeThenAccept) {
    std::vector<std::string> prompts_seen;
    auto backend = std::make_shared<testsupport::OverrideBackend>(std::map<PromptKind, testsupport::OverrideBackend::Fn>{
        {PromptKind::CustomTransform, [&](const RenderedPrompt& p) {
             prompts_seen.push_back(p.request.user_prompt);
             return std::string("It is formal now.");
         }}});
    Fixture f(backend);
    auto rid = f.add("the orchard needs water");
    auto rev = f.rev();
    auto proposal = f.svc.transform_propose(f.doc, rid, rev, "make it more formal", true);
    EXPECT_EQ(proposal["candidate_text"], "It is formal now.");
    EXPECT_EQ(proposal["revision"], rev);
    EXPECT_EQ(prompts_seen, std::vector<std::string>{"make it more formal"});
    EXPECT_EQ(f.ramble(rid).text, "The orchard needs water.");
    auto accepted = f.svc.transform_accept(f.doc, rid, proposal["proposal_id"], rev);
    EXPECT_EQ(f.ramble(rid).text, "It is formal now.");
    EXPECT_EQ(accepted["revision"], rev + 1);
    EXPECT_EQ(code_of([&] { f.svc.transform_accept(f.doc, rid, proposal["proposal_id"], f.rev()); }), ErrorCode::NotFound);

    auto direct = f.svc.transform_propose(f.doc, rid, f.rev(), "again", false, true);
    EXPECT_EQ(direct["revision"], rev + 2);
    EXPECT_EQ(direct["proposal_id"].get<std::string>().rfind("p-", 0), 0u);
}

TEST(Service, TransformAcceptAfterEditConflicts) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto rid = f.add("i like tea");
    auto proposal = f.svc.transform_propose(f.doc, rid, f.rev(), "shorter", false);
    f.svc.edit_text(f.doc, rid, f.rev(), "Something else entirely.");
    EXPECT_EQ(code_of([&] { f.svc.transform_accept(f.doc, rid, proposal["proposal_id"], f.rev()); }), ErrorCode::Conflict);
}

TEST(Service, KeywordToggleNeedsExplicitRegenerate) {
    auto counting = std::make_shared<CountingBackend>();
    Fixture f(counting);
    auto rid = f.add(kRaw);
    f.svc.wait_idle();
    EXPECT_NO_THROW(f.svc.export_text(f.doc, ZoomLevel::Gist));
    counting->reset();
    auto before = f.rev();
    auto out = f.svc.toggle_keyword(f.doc, rid, before, "weather");
    EXPECT_EQ(out["revision"], before + 1);
    f.svc.wait_idle();
    EXPECT_EQ(counting->total(), 0);
    EXPECT_EQ(code_of([&] { f.svc.export_text(f.doc, ZoomLevel::Gist); }), ErrorCode::InvalidState);
    f.svc.regenerate(f.doc, rid, f.rev());
    EXPECT_EQ(counting->calls(PromptKind::Summarize), 3);
    EXPECT_NO_THROW(f.svc.export_text(f.doc, ZoomLevel::Gist));
    // toggling back restores the earlier keyword hash: served from the kept cache
    counting->reset();
    f.svc.toggle_keyword(f.doc, rid, f.rev(), "weather");
    f.svc.regenerate(f.doc, rid, f.rev());
    EXPECT_EQ(counting->total(), 0);
}

TEST(Service, StreamSummaryEvents) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto rid = f.add(kRaw);
    f.svc.wait_idle();
    std::vector<std::pair<std::string, json>> events;
    auto collect = [&](const std::string& name, const json& payload) {
        events.emplace_back(name, payload);
        return true;
    };
    f.svc.stream_summary(f.doc, rid, ZoomLevel::Gist, collect);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].first, "done");

    events.clear();
    f.svc.edit_text(f.doc, rid, f.rev(), "Fresh words about the summer festival budget. More words follow here.");
    f.svc.stream_summary(f.doc, rid, ZoomLevel::Half, collect);
    ASSERT_GE(events.size(), 1u);
    std::string acc;
    for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        EXPECT_EQ(events[i].first, "chunk");
        acc += events[i].second["delta"].get<std::string>();
    }
    EXPECT_EQ(events.back().first, "done");
    if (events.size() > 1) {
        EXPECT_EQ(acc, events.back().second["text"]);
    }
    EXPECT_EQ(code_of([&] { f.svc.stream_summary(f.doc, "r99", ZoomLevel::Half, collect); }), ErrorCode::NotFound);
    EXPECT_EQ(code_of([&] { f.svc.stream_summary(f.doc, rid, ZoomLevel::Full, collect); }), ErrorCode::BadRequest);
}

TEST(Service, StaleSummaryFromBeforeAnEditIsDropped) {
    auto gated = std::make_shared<testsupport::GatedBackend>();
    Fixture f(gated);
    auto rid = f.add(kRaw);
    gated->wait_for_waiters(3);
    f.svc.edit_text(f.doc, rid, f.rev(), "Completely new text about bridges. It has two sentences.");
    gated->release();
    f.svc.wait_idle();
    const auto& r = f.ramble(rid);
    for (auto level : kSummaryLevels) {
        auto latest = r.summaries.latest(level);
        ASSERT_TRUE(latest);
        EXPECT_EQ(latest->content_hash, r.content_hash);
        EXPECT_EQ(latest->text, offline::summarize(r.text, level, r.active_keywords()).text);
    }
    EXPECT_EQ(r.summaries.entries().size(), 3u);
}

TEST(Service, WaitModeReportsSummaries) {
    ServiceOptions opts;
    opts.wait_for_summaries = true;
    Fixture f(std::make_shared<OfflineBackend>(), opts);
    std::string rid = f.svc.create_ramble(f.doc, f.rev(), std::nullopt)["ramble_id"];
    auto out = f.svc.finalize(f.doc, rid, f.rev(), kRaw);
    EXPECT_EQ(out["summaries"][rid].size(), 3u);
    EXPECT_TRUE(out["summaries"][rid]["gist"]["ok"].get<bool>());
    EXPECT_TRUE(f.svc.summary_failures().empty());
    auto exported = f.svc.export_text(f.doc, ZoomLevel::Gist);
    EXPECT_LE(text::word_count(exported), word_budget(ZoomLevel::Gist, text::word_count(f.ramble(rid).text)));
}

TEST(Service, ReorderAndDelete) {
    Fixture f(std::make_shared<OfflineBackend>());
    auto a = f.add("one");
    auto b = f.add("two");
    auto c = f.add("three");
    f.svc.reorder(f.doc, c, 0, f.rev());
    EXPECT_EQ(f.store.snapshot(f.doc).ramble_ids(), (std::vector<std::string>{c, a, b}));
    f.svc.delete_ramble(f.doc, a, f.rev());
    EXPECT_EQ(f.store.snapshot(f.doc).ramble_ids(), (std::vector<std::string>{c, b}));
    EXPECT_EQ(f.svc.export_text(f.doc, ZoomLevel::Full), "Three.\n\nTwo.");
}
