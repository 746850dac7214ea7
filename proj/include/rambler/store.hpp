#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <type_traits>
#include <vector>

#include "rambler/document.hpp"
#include "rambler/persistence.hpp"

namespace rambler {

inline std::string random_hex_id(std::size_t bytes = 8) {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bytes; ++i) {
        auto b = static_cast<unsigned>(rng() & 0xff);
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xf]);
    }
    return out;
}

/// Documents on disk, one JSON file each, with per-document single-writer
/// serialization. Mutations run on a copy that replaces the stored document
/// only after it has been written durably; a throwing mutation changes
/// nothing. Readers get snapshots, never references.
class DocumentStore {
public:
    /// Loads every `*.json` document under `root` (created if missing).
    /// An empty root keeps new documents in memory unless given a file.
    explicit DocumentStore(std::filesystem::path root = {}) : root_(std::move(root)) {
        if (root_.empty()) return;
        std::filesystem::create_directories(root_);
        for (const auto& entry : std::filesystem::directory_iterator(root_)) {
            if (entry.path().extension() != ".json") continue;
            auto doc = persistence::load(entry.path());
            auto id = doc.doc_id;
            slots_.emplace(id, std::make_shared<Slot>(std::move(doc), entry.path()));
        }
    }

    const std::filesystem::path& root() const { return root_; }

    std::string create(std::string title, std::optional<std::string> doc_id = std::nullopt,
                       std::optional<std::filesystem::path> file = std::nullopt) {
        auto id = doc_id.value_or("doc-" + random_hex_id());
        auto path = file ? *file : (root_.empty() ? std::filesystem::path{} : root_ / (id + ".json"));
        auto slot = std::make_shared<Slot>(make_document(id, std::move(title)), path);
        {
            std::lock_guard lock(mu_);
            if (slots_.count(id)) fail(ErrorCode::Conflict, "document " + id + " already exists");
            slots_.emplace(id, slot);
        }
        std::unique_lock doc_lock(slot->mu);
        persist(*slot, slot->doc);
        return id;
    }

    /// Registers an existing document file.
    std::string open_file(const std::filesystem::path& path) {
        auto doc = persistence::load(path);
        auto id = doc.doc_id;
        std::lock_guard lock(mu_);
        slots_[id] = std::make_shared<Slot>(std::move(doc), path);
        return id;
    }

    bool contains(const std::string& doc_id) const {
        std::lock_guard lock(mu_);
        return slots_.count(doc_id) > 0;
    }

    std::vector<std::string> list() const {
        std::lock_guard lock(mu_);
        std::vector<std::string> ids;
        for (const auto& [id, _] : slots_) ids.push_back(id);
        return ids;
    }

    std::filesystem::path path_of(const std::string& doc_id) const { return slot(doc_id)->file; }

    RambleDocument snapshot(const std::string& doc_id) const {
        auto s = slot(doc_id);
        std::shared_lock lock(s->mu);
        return s->doc;
    }

    /// Runs `fn(RambleDocument&)` under the document's write lock. Fails
    /// with Conflict when `expected_revision` is set and stale.
    template <class Fn>
    auto mutate(const std::string& doc_id, std::optional<std::uint64_t> expected_revision, Fn&& fn)
        -> std::invoke_result_t<Fn, RambleDocument&> {
        auto s = slot(doc_id);
        std::unique_lock lock(s->mu);
        if (expected_revision && *expected_revision != s->doc.revision)
            fail(ErrorCode::Conflict, "revision mismatch: client has " + std::to_string(*expected_revision) +
                                          ", document is at " + std::to_string(s->doc.revision),
                 {std::to_string(s->doc.revision)});
        RambleDocument working = s->doc;
        if constexpr (std::is_void_v<std::invoke_result_t<Fn, RambleDocument&>>) {
            fn(working);
            persist(*s, working);
            s->doc = std::move(working);
        } else {
            auto result = fn(working);
            persist(*s, working);
            s->doc = std::move(working);
            return result;
        }
    }

    /// Stale-guarded summary write (no revision bump).
    bool write_summary(const std::string& doc_id, const std::string& ramble_id, const SummaryEntry& entry) {
        std::shared_ptr<Slot> s;
        try {
            s = slot(doc_id);
        } catch (const Error&) {
            return false;
        }
        std::unique_lock lock(s->mu);
        RambleDocument working = s->doc;
        if (!store_summary(working, ramble_id, entry)) return false;
        persist(*s, working);
        s->doc = std::move(working);
        return true;
    }

private:
    struct Slot {
        Slot(RambleDocument d, std::filesystem::path f) : doc(std::move(d)), file(std::move(f)) {}
        std::shared_mutex mu;
        RambleDocument doc;
        std::filesystem::path file;
    };

    std::shared_ptr<Slot> slot(const std::string& doc_id) const {
        std::lock_guard lock(mu_);
        auto it = slots_.find(doc_id);
        if (it == slots_.end()) fail(ErrorCode::NotFound, "no document " + doc_id, {doc_id});
        return it->second;
    }

    static void persist(const Slot& s, const RambleDocument& doc) {
        if (!s.file.empty()) persistence::save(doc, s.file);
    }

    std::filesystem::path root_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

}  // namespace rambler
