#pragma once

// Document file format: one UTF-8 JSON file per document.
//
// {schema_version: 1, doc_id, title, revision, created_at, updated_at,
//  next_ramble_seq,
//  rambles: [{ramble_id, text, content_hash, state,
//             raw_history: [{text, at}],
//             keywords: [{word, source, active, score, score_ratio: [num, den]}],
//             summaries: {level: {text, content_hash, keyword_hash, stale, created_at}},
//             summary_archive: [{level, text, content_hash, keyword_hash, stale, created_at}],
//             respeak?: {original_text, new_text}}]}
//
// `summaries` holds the newest entry per level; older entries live in
// `summary_archive`. Array order is document order.

#include <algorithm>
#include <cstdio>
#include <set>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include <json.hpp>

#include "rambler/document.hpp"

namespace rambler::persistence {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline json summary_to_json(const SummaryEntry& e, bool with_level) {
    json j{{"text", e.text},
           {"content_hash", e.content_hash},
           {"keyword_hash", e.keyword_hash},
           {"stale", e.stale},
           {"created_at", e.created_at}};
    if (with_level) j["level"] = to_string(e.level);
    return j;
}

inline SummaryEntry summary_from_json(const json& j, ZoomLevel level) {
    return {level,
            j.at("text").get<std::string>(),
            j.at("content_hash").get<std::string>(),
            j.at("keyword_hash").get<std::string>(),
            j.value("created_at", std::string{}),
            j.at("stale").get<bool>()};
}

}  // namespace detail

inline json ramble_to_json(const Ramble& r) {
    json raw = json::array();
    for (const auto& c : r.raw_history) raw.push_back({{"text", c.text}, {"at", c.at}});
    json kws = json::array();
    for (const auto& [word, e] : r.keywords) {
        kws.push_back({{"word", word},
                       {"source", to_string(e.source)},
                       {"active", e.active},
                       {"score", e.score.to_double()},
                       {"score_ratio", {e.score.num(), e.score.den()}}});
    }
    json summaries = json::object();
    json archive = json::array();
    for (auto level : kSummaryLevels) {
        if (auto latest = r.summaries.latest(level)) summaries[std::string(to_string(level))] = detail::summary_to_json(*latest, false);
    }
    // Everything except the newest entry of each level, oldest first.
    for (const auto& e : r.summaries.entries()) {
        if (!(r.summaries.latest(e.level) == e)) archive.push_back(detail::summary_to_json(e, true));
    }
    json j{{"ramble_id", r.id},
           {"text", r.text},
           {"content_hash", r.content_hash},
           {"state", to_string(r.state)},
           {"raw_history", raw},
           {"keywords", kws},
           {"summaries", summaries},
           {"summary_archive", archive}};
    if (r.respeak) j["respeak"] = {{"original_text", r.respeak->original_text}, {"new_text", r.respeak->new_text}};
    return j;
}

inline json to_json(const RambleDocument& doc) {
    json rambles = json::array();
    for (const auto& r : doc.rambles) rambles.push_back(ramble_to_json(r));
    return {{"schema_version", kSchemaVersion},
            {"doc_id", doc.doc_id},
            {"title", doc.title},
            {"revision", doc.revision},
            {"created_at", doc.created_at},
            {"updated_at", doc.updated_at},
            {"next_ramble_seq", doc.next_ramble_seq},
            {"rambles", rambles}};
}

inline Ramble ramble_from_json(const json& j) {
    Ramble r;
    r.id = j.at("ramble_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.content_hash = j.value("content_hash", content_hash_of(r.text));
    auto state = j.value("state", std::string("idle"));
    r.state = state == "respeaking" ? RambleState::Respeaking : state == "editing" ? RambleState::Editing : RambleState::Idle;
    for (const auto& c : j.at("raw_history")) r.raw_history.push_back({c.at("text").get<std::string>(), c.value("at", std::string{})});
    for (const auto& k : j.at("keywords")) {
        KeywordEntry e;
        e.source = k.at("source").get<std::string>() == "manual" ? KeywordSource::Manual : KeywordSource::Auto;
        e.active = k.at("active").get<bool>();
        if (k.contains("score_ratio")) {
            e.score = Rational(k["score_ratio"][0].get<std::int64_t>(), k["score_ratio"][1].get<std::int64_t>());
        }
        r.keywords[k.at("word").get<std::string>()] = e;
    }
    std::vector<SummaryEntry> entries;
    if (j.contains("summary_archive")) {
        for (const auto& s : j["summary_archive"]) entries.push_back(detail::summary_from_json(s, require_zoom_level(s.at("level").get<std::string>())));
    }
    for (const auto& [level, s] : j.at("summaries").items()) entries.push_back(detail::summary_from_json(s, require_zoom_level(level)));
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.created_at < b.created_at; });
    for (auto& e : entries) r.summaries.put(std::move(e));
    if (j.contains("respeak")) {
        r.respeak = RespeakSession{r.id, j["respeak"].at("original_text").get<std::string>(),
                                   j["respeak"].at("new_text").get<std::string>()};
    }
    return r;
}

inline RambleDocument from_json(const json& j) {
    if (j.value("schema_version", 0) != kSchemaVersion)
        fail(ErrorCode::BadRequest, "unsupported document schema_version");
    RambleDocument doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.title = j.value("title", std::string{});
    doc.revision = j.at("revision").get<std::uint64_t>();
    doc.created_at = j.value("created_at", std::string{});
    doc.updated_at = j.value("updated_at", std::string{});
    doc.next_ramble_seq = j.value("next_ramble_seq", std::uint64_t{1});
    for (const auto& r : j.at("rambles")) doc.rambles.push_back(ramble_from_json(r));
    return doc;
}

/// Structural check of a document file; returns human-readable violations.
inline std::vector<std::string> validate_document_json(const json& j) {
    std::vector<std::string> problems;
    auto need = [&](const json& obj, const char* key, auto pred, const std::string& where) {
        if (!obj.is_object() || !obj.contains(key) || !pred(obj[key])) {
            problems.push_back(where + "." + key + " missing or wrong type");
            return false;
        }
        return true;
    };
    auto is_str = [](const json& v) { return v.is_string(); };
    auto is_uint = [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); };
    auto is_bool = [](const json& v) { return v.is_boolean(); };
    auto is_arr = [](const json& v) { return v.is_array(); };
    auto is_obj = [](const json& v) { return v.is_object(); };

    if (!j.is_object()) return {"document is not a JSON object"};
    if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) problems.push_back("schema_version must be 1");
    need(j, "doc_id", is_str, "$");
    need(j, "title", is_str, "$");
    need(j, "revision", is_uint, "$");
    if (!need(j, "rambles", is_arr, "$")) return problems;

    std::set<std::string> ids;
    for (std::size_t i = 0; i < j["rambles"].size(); ++i) {
        const auto& r = j["rambles"][i];
        auto where = "$.rambles[" + std::to_string(i) + "]";
        if (need(r, "ramble_id", is_str, where) && !ids.insert(r["ramble_id"].get<std::string>()).second)
            problems.push_back(where + ".ramble_id duplicated");
        if (need(r, "text", is_str, where) && r.contains("content_hash") && r["content_hash"].is_string() &&
            r["content_hash"] != content_hash_of(r["text"].get<std::string>()))
            problems.push_back(where + ".content_hash does not match text");
        if (need(r, "raw_history", is_arr, where)) {
            for (const auto& c : r["raw_history"]) {
                need(c, "text", is_str, where + ".raw_history[]");
                need(c, "at", is_str, where + ".raw_history[]");
            }
        }
        if (need(r, "keywords", is_arr, where)) {
            for (const auto& k : r["keywords"]) {
                need(k, "word", is_str, where + ".keywords[]");
                if (need(k, "source", is_str, where + ".keywords[]") && k["source"] != "auto" && k["source"] != "manual")
                    problems.push_back(where + ".keywords[].source must be auto|manual");
                need(k, "active", is_bool, where + ".keywords[]");
                if (!k.contains("score") || !k["score"].is_number() || k["score"].get<double>() < 0)
                    problems.push_back(where + ".keywords[].score must be a non-negative number");
            }
        }
        if (need(r, "summaries", is_obj, where)) {
            for (const auto& [level, s] : r["summaries"].items()) {
                auto lv = parse_zoom_level(level);
                if (!lv || *lv == ZoomLevel::Full) problems.push_back(where + ".summaries has bad level '" + level + "'");
                auto sw = where + ".summaries." + level;
                need(s, "text", is_str, sw);
                need(s, "content_hash", is_str, sw);
                need(s, "keyword_hash", is_str, sw);
                need(s, "stale", is_bool, sw);
            }
        }
    }
    return problems;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::NotFound, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes via a temp file, fsync and rename: readers see the old or the new
/// file, never a torn one, and the data is on disk when this returns.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) fail(ErrorCode::BackendFailure, "cannot write " + tmp.string());
    std::size_t written = 0;
    while (written < contents.size()) {
        auto n = ::write(fd, contents.data() + written, contents.size() - written);
        if (n < 0) {
            ::close(fd);
            fail(ErrorCode::BackendFailure, "write failed for " + tmp.string());
        }
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
    std::filesystem::rename(tmp, path);
}

inline void save(const RambleDocument& doc, const std::filesystem::path& path) {
    atomic_write_file(path, to_json(doc).dump(2) + "\n");
}

inline RambleDocument load(const std::filesystem::path& path) {
    auto j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::BadRequest, "document file is not valid JSON: " + path.string());
    return from_json(j);
}

}  // namespace rambler::persistence
