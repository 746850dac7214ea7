// rambler: batch pipeline, document operations and the HTTP service.
//
// Exit codes: 0 ok, 1 runtime or backend failure, 2 usage error (bad
// flags, unreadable input, unknown ids).

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "rambler/rambler.hpp"

namespace {

using namespace rambler;
using nlohmann::json;

struct Globals {
    std::string store;
    std::string doc;
    std::string backend = "offline";
    std::string fixtures;
    bool json_out = false;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadRequest:
        case ErrorCode::NotFound: return 2;
        default: return 1;
    }
}

/// Exclusive advisory lock held for the process lifetime.
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) fail(ErrorCode::BadRequest, "cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX) != 0) fail(ErrorCode::BackendFailure, "cannot lock " + path.string());
    }
    ~FileLock() {
        if (fd_ >= 0) ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

std::filesystem::path lock_path_for(const Globals& g, const std::filesystem::path& doc_file = {}) {
    if (!g.store.empty()) {
        std::filesystem::create_directories(g.store);
        return std::filesystem::path(g.store) / ".rambler.lock";
    }
    auto p = doc_file;
    p += ".lock";
    return p;
}

/// A store plus the id of the document a command operates on. With
/// --store, --doc is an id inside it; otherwise --doc is a file path.
struct Session {
    std::unique_ptr<FileLock> lock;
    std::unique_ptr<DocumentStore> store;
    std::unique_ptr<Service> service;
    std::string doc_id;
};

Session open_session(const Globals& g, bool wait_for_summaries = true) {
    if (g.doc.empty()) fail(ErrorCode::BadRequest, "--doc is required");
    Session s;
    ServiceOptions opts;
    opts.wait_for_summaries = wait_for_summaries;
    if (!g.store.empty()) {
        s.lock = std::make_unique<FileLock>(lock_path_for(g));
        s.store = std::make_unique<DocumentStore>(g.store);
        if (!s.store->contains(g.doc)) fail(ErrorCode::NotFound, "no document " + g.doc + " in " + g.store);
        s.doc_id = g.doc;
    } else {
        if (!std::filesystem::exists(g.doc)) fail(ErrorCode::NotFound, "no document file " + g.doc);
        s.lock = std::make_unique<FileLock>(lock_path_for(g, g.doc));
        s.store = std::make_unique<DocumentStore>();
        s.doc_id = s.store->open_file(g.doc);
    }
    s.service = std::make_unique<Service>(*s.store, make_backend(g.backend, g.fixtures), opts);
    return s;
}

std::uint64_t revision(Session& s) { return s.store->snapshot(s.doc_id).revision; }

void print(const Globals& g, const json& j, const std::string& human) {
    if (g.json_out) {
        std::cout << j.dump(2) << "\n";
    } else if (!human.empty()) {
        std::cout << human << (human.back() == '\n' ? "" : "\n");
    }
}

std::size_t fresh_summary_count(const RambleDocument& doc) {
    std::size_t n = 0;
    for (const auto& r : doc.rambles) {
        for (auto level : kSummaryLevels) {
            if (r.summaries.lookup(level, r.content_hash, r.keyword_hash())) ++n;
        }
    }
    return n;
}

std::string describe(const RambleDocument& doc) {
    std::string out;
    for (const auto& r : doc.rambles) {
        out += r.id + ": " + r.text + "\n";
    }
    return out.empty() ? "(empty document)\n" : out;
}

int cmd_process(const Globals& g, const std::string& transcript, std::string out_path) {
    if (!std::filesystem::is_regular_file(transcript)) fail(ErrorCode::BadRequest, "cannot read transcript file: " + transcript);
    auto contents = persistence::read_file(transcript);
    auto lines = stt::load_script(transcript);
    auto doc_id = "doc-" + text::sha256_hex(contents).substr(0, 16);

    std::filesystem::path file;
    std::unique_ptr<FileLock> lock;
    if (!out_path.empty()) {
        file = out_path;
        lock = std::make_unique<FileLock>(lock_path_for(g, file));
    } else if (!g.store.empty()) {
        lock = std::make_unique<FileLock>(lock_path_for(g));
        file = std::filesystem::path(g.store) / (doc_id + ".json");
    } else {
        file = std::filesystem::path(transcript).replace_extension(".rambler.json");
        lock = std::make_unique<FileLock>(lock_path_for(g, file));
    }
    // Built from scratch: a rerun replaces the earlier file.
    DocumentStore target;
    target.create(std::filesystem::path(transcript).stem().string(), doc_id, file);

    ServiceOptions opts;
    opts.wait_for_summaries = true;
    Service service(target, make_backend(g.backend, g.fixtures), opts);
    int rc = 0;
    json failures = json::array();
    for (const auto& line : lines) {
        stt::ScriptedSource source({line});
        auto dictated = stt::run_dictation(source);
        auto rev = target.snapshot(doc_id).revision;
        auto rid = service.create_ramble(doc_id, rev, std::nullopt)["ramble_id"].get<std::string>();
        try {
            service.finalize(doc_id, rid, target.snapshot(doc_id).revision, dictated.raw_text);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BackendFailure) throw;
            failures.push_back(rid + ": " + e.what());
            rc = 1;
        }
    }
    service.wait_idle();
    for (const auto& f : service.summary_failures()) {
        failures.push_back(f);
        rc = 1;
    }
    auto doc = target.snapshot(doc_id);
    auto path = target.path_of(doc_id).string();
    json out{{"doc_id", doc_id},
             {"path", path},
             {"rambles", doc.rambles.size()},
             {"fresh_summaries", fresh_summary_count(doc)},
             {"failures", failures}};
    std::string human = "wrote " + path + ": " + std::to_string(doc.rambles.size()) + " rambles, " +
                        std::to_string(fresh_summary_count(doc)) + " fresh summaries";
    for (const auto& f : failures) human += "\nfailed: " + f.get<std::string>();
    print(g, out, human);
    return rc;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!text::is_space(c)) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rambler: dictate, review and revise text in Rambles"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--store", g.store, "document store directory");
    app.add_option("--doc", g.doc, "document id (with --store) or document file path");
    app.add_option("--backend", g.backend, "gist backend")->check(CLI::IsMember({"offline", "replay", "remote"}));
    app.add_option("--fixtures", g.fixtures, "replay fixture directory")->check(CLI::ExistingDirectory);
    app.add_flag("--json", g.json_out, "machine-readable output");

    std::string transcript, out_path;
    auto* process = app.add_subcommand("process", "turn a transcript file (one utterance per line) into a document");
    process->add_option("transcript", transcript, "transcript file")->required();
    process->add_option("-o,--out", out_path, "document file to write");

    std::string level = "full";
    auto* exp = app.add_subcommand("export", "print the document at a zoom level");
    exp->add_option("--level", level)->check(CLI::IsMember({"full", "half", "quarter", "gist"}));

    std::string ramble, mode = "manual", rambles, word, prompt;
    std::size_t boundary = 0;
    auto* split = app.add_subcommand("split", "split a ramble");
    split->add_option("--ramble", ramble)->required();
    split->add_option("--mode", mode)->check(CLI::IsMember({"manual", "semantic"}));
    auto* boundary_opt = split->add_option("--boundary", boundary, "byte offset for a manual split");

    auto* merge = app.add_subcommand("merge", "merge rambles; the first keeps its place");
    merge->add_option("--rambles", rambles, "comma-separated ramble ids")->required();
    merge->add_option("--mode", mode)->check(CLI::IsMember({"manual", "semantic"}));

    std::size_t new_index = 0;
    auto* reorder = app.add_subcommand("reorder", "move a ramble to a new index");
    reorder->add_option("--ramble", ramble)->required();
    reorder->add_option("--index", new_index)->required();

    auto* keywords = app.add_subcommand("keywords", "show or toggle keywords");
    keywords->add_option("--ramble", ramble)->required();
    keywords->add_option("--toggle", word);

    bool include_keywords = false, accept = false;
    auto* transform = app.add_subcommand("transform", "apply a custom prompt to a ramble");
    transform->add_option("--ramble", ramble)->required();
    transform->add_option("--prompt", prompt)->required();
    transform->add_flag("--keywords", include_keywords, "give the active keywords as context");
    transform->add_flag("--accept", accept, "commit the result");

    auto* regenerate = app.add_subcommand("regenerate", "regenerate summaries for a ramble");
    regenerate->add_option("--ramble", ramble)->required();

    auto* show = app.add_subcommand("show", "print the document");

    int port = 8080;
    std::string host = "127.0.0.1";
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--port", port);
    serve->add_option("--host", host);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*process) return cmd_process(g, transcript, out_path);

        if (*serve) {
            if (g.store.empty()) fail(ErrorCode::BadRequest, "serve needs --store");
            FileLock lock(lock_path_for(g));
            DocumentStore store(g.store);
            Service service(store, make_backend(g.backend, g.fixtures));
            http::Server server(service);
            g_server = &server.raw();
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << g.store << " on http://" << host << ":" << port << " (" << g.backend << " backend)\n";
            server.run(host, port);
            g_server = nullptr;
            return 0;
        }

        auto s = open_session(g);
        auto& svc = *s.service;
        if (*exp) {
            auto text = svc.export_text(s.doc_id, require_zoom_level(level));
            print(g, {{"level", level}, {"text", text}}, text);
        } else if (*show) {
            auto doc = s.store->snapshot(s.doc_id);
            print(g, persistence::to_json(doc), describe(doc));
        } else if (*split) {
            json out;
            if (mode == "manual") {
                if (boundary_opt->count() == 0) fail(ErrorCode::BadRequest, "manual split needs --boundary");
                out = svc.split_manual(s.doc_id, ramble, revision(s), boundary);
            } else {
                out = svc.split_semantic(s.doc_id, ramble, revision(s));
            }
            std::string human;
            for (const auto& id : out["ramble_ids"]) human += id.get<std::string>() + "\n";
            print(g, out, human);
        } else if (*merge) {
            auto out = svc.merge(s.doc_id, split_list(rambles), revision(s), mode == "semantic");
            print(g, out, "merged into " + out["merged_id"].get<std::string>());
        } else if (*reorder) {
            auto out = svc.reorder(s.doc_id, ramble, new_index, revision(s));
            print(g, out, describe(s.store->snapshot(s.doc_id)));
        } else if (*keywords) {
            json out;
            if (!word.empty()) {
                out = svc.toggle_keyword(s.doc_id, ramble, revision(s), word);
            } else {
                auto doc = s.store->snapshot(s.doc_id);
                const auto* r = doc.find(ramble);
                if (!r) fail(ErrorCode::NotFound, "no ramble with id " + ramble, {ramble});
                out = {{"active_keywords", r->active_keywords()}, {"ramble", persistence::ramble_to_json(*r)}};
            }
            print(g, out, text::join(out["active_keywords"].get<std::vector<std::string>>(), "\n"));
        } else if (*transform) {
            auto out = svc.transform_propose(s.doc_id, ramble, revision(s), prompt, include_keywords, accept);
            print(g, out, out["candidate_text"].get<std::string>());
        } else if (*regenerate) {
            auto out = svc.regenerate(s.doc_id, ramble, revision(s));
            std::string human;
            int rc = 0;
            for (auto& [lv, o] : out["levels"].items()) {
                if (o["ok"].get<bool>()) {
                    human += lv + ": " + o["text"].get<std::string>() + "\n";
                } else {
                    human += lv + ": failed: " + o["error"]["message"].get<std::string>() + "\n";
                    rc = 1;
                }
            }
            print(g, out, human);
            return rc;
        }
        svc.wait_idle();
        return svc.summary_failures().empty() ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
