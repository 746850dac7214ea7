#include <gtest/gtest.h>

#include "support.hpp"

using namespace rambler;
using testsupport::CountingBackend;
using testsupport::ScriptedBackend;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::BadRequest;
}

}  // namespace

TEST(ParseSplit, AcceptsArraysAndFences) {
    EXPECT_EQ(parse_split_response(R"(["a","b"])"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(parse_split_response("```json\n[\"x\", \" y \"]\n```"), (std::vector<std::string>{"x", "y"}));
    EXPECT_FALSE(parse_split_response(R"(["a"])"));
    EXPECT_FALSE(parse_split_response(R"(["a",""])"));
    EXPECT_FALSE(parse_split_response(R"(["a",3])"));
    EXPECT_FALSE(parse_split_response("Here are the paragraphs"));
    EXPECT_FALSE(parse_split_response(R"({"a":"b"})"));
}

TEST(Engine, RetriesOnceThenSucceeds) {
    auto b = std::make_shared<ScriptedBackend>(std::vector<std::string>{"!fail", "Fine."});
    GistEngine e(b);
    EXPECT_EQ(e.clean_transcript("fine"), "Fine.");
    EXPECT_EQ(b->prompts().size(), 2u);
}

TEST(Engine, CleanFailureCarriesRawText) {
    auto b = std::make_shared<ScriptedBackend>(std::vector<std::string>{"!fail", "!fail"});
    GistEngine e(b);
    try {
        e.clean_transcript("so um the raw words");
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::BackendFailure);
        ASSERT_EQ(err.details().size(), 1u);
        EXPECT_EQ(err.details()[0], "so um the raw words");
    }
    EXPECT_EQ(b->prompts().size(), 2u);
}

TEST(Engine, EmptyInputsAreBadRequests) {
    GistEngine e(std::make_shared<OfflineBackend>());
    EXPECT_EQ(code_of([&] { e.clean_transcript("   "); }), ErrorCode::BadRequest);
    EXPECT_EQ(code_of([&] { e.summarize("", ZoomLevel::Gist, {}); }), ErrorCode::BadRequest);
    EXPECT_EQ(code_of([&] { e.summarize("Text.", ZoomLevel::Full, {}); }), ErrorCode::BadRequest);
    EXPECT_EQ(code_of([&] { e.semantic_merge({"Only one."}, {}); }), ErrorCode::BadRequest);
    EXPECT_EQ(code_of([&] { e.semantic_merge({"One.", " "}, {}); }), ErrorCode::BadRequest);
}

TEST(Engine, CleanIsMemoizedByRawText) {
    auto b = std::make_shared<CountingBackend>();
    GistEngine e(b);
    EXPECT_EQ(e.clean_transcript("i like tea"), "I like tea.");
    EXPECT_EQ(e.clean_transcript("i like tea"), "I like tea.");
    EXPECT_EQ(b->calls(PromptKind::Clean), 1);
    e.clean_transcript("i like coffee");
    EXPECT_EQ(b->calls(PromptKind::Clean), 2);
}

TEST(Engine, SplitRepairsOnceWithFollowUp) {
    auto b = std::make_shared<ScriptedBackend>(std::vector<std::string>{R"(["a"])", R"(["First.","Second."])"});
    GistEngine e(b);
    auto plan = e.semantic_split("First. Second.");
    EXPECT_EQ(plan.parts, (std::vector<std::string>{"First.", "Second."}));
    auto prompts = b->prompts();
    ASSERT_EQ(prompts.size(), 2u);
    ASSERT_EQ(prompts[1].messages.size(), prompts[0].messages.size() + 2);
    EXPECT_EQ(prompts[1].messages[prompts[0].messages.size()].role, "assistant");
    EXPECT_EQ(prompts[1].messages[prompts[0].messages.size()].content, R"(["a"])");
    EXPECT_EQ(prompts[1].messages.back().role, "user");
    EXPECT_EQ(prompts[1].messages.back().content, std::string(kSplitRepairInstruction));
}

TEST(Engine, SplitFailsAfterSecondMalformedResponse) {
    auto b = std::make_shared<ScriptedBackend>(std::vector<std::string>{"Here are the paragraphs", "still prose"});
    GistEngine e(b);
    EXPECT_EQ(code_of([&] { e.semantic_split("First. Second."); }), ErrorCode::BackendFailure);
    EXPECT_EQ(b->prompts().size(), 2u);
}

TEST(Engine, NoRetryAfterChunksWereDelivered) {
    class HalfStream : public GistBackend {
    public:
        int calls = 0;
        std::string name() const override { return "half"; }
        std::string generate(const RenderedPrompt&, const ChunkSink& sink) override {
            ++calls;
            if (sink) sink("Partial ");
            fail(ErrorCode::BackendFailure, "stream dropped");
        }
    };
    auto b = std::make_shared<HalfStream>();
    GistEngine e(b);
    std::string seen;
    EXPECT_EQ(code_of([&] { e.summarize("Some text here.", ZoomLevel::Gist, {}, [&](std::string_view c) { seen += c; }); }),
              ErrorCode::BackendFailure);
    EXPECT_EQ(b->calls, 1);
    EXPECT_EQ(seen, "Partial ");
}

TEST(Engine, SummaryStreamConcatenatesToResult) {
    GistEngine e(std::make_shared<OfflineBackend>());
    std::string t = "The weather was mild today. Our orchard apples need water before the long summer. Then we went home.";
    std::string streamed;
    auto out = e.summarize(t, ZoomLevel::Gist, {"orchard", "apples"}, [&](std::string_view c) { streamed += c; });
    EXPECT_EQ(out, "Our orchard apples need water");
    EXPECT_EQ(streamed, out);
    EXPECT_TRUE(e.warnings().empty());
}

TEST(Engine, SoftValidationWarnsWithoutFailing) {
    auto long_answer = std::string("one two three four five six seven eight nine ten eleven twelve");
    auto b = std::make_shared<ScriptedBackend>(std::vector<std::string>{long_answer, "Merged without it."});
    GistEngine e(b);
    EXPECT_EQ(e.summarize("A short text of a few words.", ZoomLevel::Gist, {}), long_answer);
    EXPECT_EQ(e.semantic_merge({"Tea is good.", "Cups."}, {"tea"}), "Merged without it.");
    auto w = e.warnings();
    ASSERT_EQ(w.size(), 2u);
    EXPECT_NE(w[0].find("budget 5"), std::string::npos);
    EXPECT_NE(w[1].find("tea"), std::string::npos);
}

TEST(Engine, TransformReturnsCandidateOnly) {
    auto b = std::make_shared<ScriptedBackend>(std::vector<std::string>{"Formal text."});
    GistEngine e(b);
    EXPECT_EQ(e.custom_transform("casual text", "make it more formal", true, {"text"}), "Formal text.");
    auto p = b->prompts().at(0);
    EXPECT_EQ(p.request.kind, PromptKind::CustomTransform);
    EXPECT_EQ(p.request.user_prompt, "make it more formal");
}
