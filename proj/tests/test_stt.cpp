#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "support.hpp"

using namespace rambler;
using namespace rambler::stt;

TEST(ScriptedSource, PartialsThenFinals) {
    ScriptedSource src({"so um   hello there", "second one"});
    std::vector<std::string> partials;
    auto r = run_dictation(src, [&](std::string_view p) { partials.emplace_back(p); });
    EXPECT_FALSE(r.failed);
    EXPECT_EQ(r.raw_text, "so um hello there second one");
    EXPECT_EQ(partials, (std::vector<std::string>{"so", "so um", "so um hello", "second"}));
    EXPECT_EQ(src.next_event().kind, EventKind::EndOfStream);
}

TEST(ScriptedSource, PartialsNeverReachTheRawBuffer) {
    ScriptedSource src({"one two three"});
    auto r = run_dictation(src);
    EXPECT_EQ(r.raw_text, "one two three");
}

TEST(ScriptedSource, FailureKeepsGatheredText) {
    // "alpha beta" yields one partial and a final; failing after those two
    // events keeps the first utterance and loses the second.
    ScriptedSource src({"alpha beta", "gamma delta"}, 2);
    auto r = run_dictation(src);
    EXPECT_TRUE(r.failed);
    EXPECT_EQ(r.raw_text, "alpha beta");
    EXPECT_FALSE(r.error.empty());
}

TEST(VendorMessages, Parse) {
    auto p = parse_vendor_message(R"({"type":"partial","text":"hel"})");
    EXPECT_EQ(p.kind, EventKind::Partial);
    EXPECT_EQ(p.text, "hel");
    EXPECT_EQ(parse_vendor_message(R"({"type":"final","text":"hello"})").kind, EventKind::Final);
    EXPECT_EQ(parse_vendor_message(R"({"type":"end"})").kind, EventKind::EndOfStream);
    EXPECT_THROW(parse_vendor_message("not json"), SourceError);
    EXPECT_THROW(parse_vendor_message(R"({"text":"x"})"), SourceError);
}

TEST(QueueSource, FeedsDictationFromAnotherThread) {
    QueueSource q;
    std::thread adapter([&] {
        q.push_message(R"({"type":"partial","text":"i"})");
        q.push_message(R"({"type":"final","text":"i like tea"})");
        q.push_message(R"({"type":"final","text":"  it is   hot "})");
        q.push_message(R"({"type":"end"})");
    });
    auto r = run_dictation(q);
    adapter.join();
    EXPECT_FALSE(r.failed);
    EXPECT_EQ(r.raw_text, "i like tea it is hot");
}

TEST(QueueSource, BrokenStreamReportsFailure) {
    QueueSource q;
    q.push_message(R"({"type":"final","text":"kept"})");
    q.fail_stream("socket closed");
    auto r = run_dictation(q);
    EXPECT_TRUE(r.failed);
    EXPECT_EQ(r.error, "socket closed");
    EXPECT_EQ(r.raw_text, "kept");
}

TEST(LoadScript, SkipsBlankLines) {
    testsupport::TempDir dir;
    auto path = dir / "t.txt";
    std::ofstream(path) << "first line\r\n\n   \n  second line  \n";
    EXPECT_EQ(load_script(path.string()), (std::vector<std::string>{"first line", "second line"}));
    EXPECT_THROW(load_script((dir / "missing.txt").string()), Error);
}
