#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <tuple>
#include <optional>
#include <string>
#include <vector>

#include "rambler/zoom.hpp"

namespace rambler {

inline std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    auto secs = std::chrono::system_clock::to_time_t(now);
    auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(millis));
    return out;
}

struct SummaryEntry {
    ZoomLevel level = ZoomLevel::Half;
    std::string text;
    std::string content_hash;
    std::string keyword_hash;
    std::string created_at;
    bool stale = false;

    friend bool operator==(const SummaryEntry&, const SummaryEntry&) = default;
};

/// Summaries keyed by (content_hash, keyword_hash, level). Entries for
/// other keys are kept (a keyword toggle can be undone) but never served.
class SummaryCache {
public:
    static constexpr std::size_t kMaxEntriesPerLevel = 8;

    std::optional<SummaryEntry> lookup(ZoomLevel level, const std::string& content_hash,
                                       const std::string& keyword_hash) const {
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
            if (it->level == level && it->content_hash == content_hash && it->keyword_hash == keyword_hash)
                return it->stale ? std::nullopt : std::optional<SummaryEntry>(*it);
        }
        return std::nullopt;
    }

    void put(SummaryEntry entry) {
        std::erase_if(entries_, [&](const SummaryEntry& e) {
            return e.level == entry.level && e.content_hash == entry.content_hash && e.keyword_hash == entry.keyword_hash;
        });
        auto level = entry.level;
        entries_.push_back(std::move(entry));
        // Canonical order, so a reloaded cache compares equal.
        std::stable_sort(entries_.begin(), entries_.end(), [](const SummaryEntry& a, const SummaryEntry& b) {
            return std::tie(a.created_at, a.level, a.content_hash, a.keyword_hash) <
                   std::tie(b.created_at, b.level, b.content_hash, b.keyword_hash);
        });
        while (std::count_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.level == level; }) >
               static_cast<std::ptrdiff_t>(kMaxEntriesPerLevel)) {
            entries_.erase(std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.level == level; }));
        }
    }

    /// Marks every entry computed for other content stale.
    void mark_stale_except(const std::string& content_hash) {
        for (auto& e : entries_) {
            if (e.content_hash != content_hash) e.stale = true;
        }
    }

    std::optional<SummaryEntry> latest(ZoomLevel level) const {
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
            if (it->level == level) return *it;
        }
        return std::nullopt;
    }

    const std::vector<SummaryEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }

    friend bool operator==(const SummaryCache&, const SummaryCache&) = default;

private:
    std::vector<SummaryEntry> entries_;  // oldest first
};

}  // namespace rambler
