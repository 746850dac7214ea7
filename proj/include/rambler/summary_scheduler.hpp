#pragma once

// Background summary generation with single-flight deduplication.
//
// A flight is one generation for one (ramble, content hash, keyword hash,
// level) key. Every subscriber of a key shares the flight; late subscribers
// first receive everything streamed so far, then the live tail.

#include <atomic>
#include <condition_variable>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rambler/gist_engine.hpp"
#include "rambler/summary_cache.hpp"
#include "rambler/zoom.hpp"

namespace rambler {

struct SummaryTarget {
    std::string doc_id;
    std::string ramble_id;
};

/// What the scheduler needs to know about a ramble at request time.
struct GistSnapshot {
    std::string text;
    std::string content_hash;
    std::vector<std::string> keywords;  // active, first-occurrence order
    std::string keyword_hash;
    std::optional<SummaryEntry> fresh;  // cached entry for the requested level, if servable
};

/// Owner of the rambles: the scheduler reads snapshots and writes results
/// back through it. `store` must apply the stale guard (reject entries whose
/// hashes no longer match) and report whether the entry was kept.
class SummaryHost {
public:
    virtual ~SummaryHost() = default;
    virtual std::optional<GistSnapshot> snapshot(const SummaryTarget& target, ZoomLevel level) = 0;
    virtual bool store(const SummaryTarget& target, const SummaryEntry& entry) = 0;
};

struct SummaryOutcome {
    bool ok = false;
    std::string text;
    ErrorCode code = ErrorCode::BackendFailure;
    std::string message;
    bool from_cache = false;
    bool stored = false;  // false when the stale guard discarded the result
};

class SummaryFlight {
public:
    explicit SummaryFlight(ZoomLevel level) : level_(level) {}

    static std::shared_ptr<SummaryFlight> finished(ZoomLevel level, SummaryOutcome outcome) {
        auto f = std::make_shared<SummaryFlight>(level);
        f->finish(std::move(outcome));
        return f;
    }

    ZoomLevel level() const { return level_; }

    /// Delivers streamed text beyond what this caller has seen, blocking
    /// until the flight completes. Deltas concatenate to the final text.
    SummaryOutcome follow(const ChunkSink& on_delta) {
        std::size_t seen = 0;
        std::unique_lock lock(mu_);
        while (true) {
            cv_.wait(lock, [&] { return done_ || text_.size() > seen; });
            if (text_.size() > seen) {
                std::string delta = text_.substr(seen);
                seen = text_.size();
                if (on_delta) {
                    lock.unlock();
                    on_delta(delta);
                    lock.lock();
                }
                continue;
            }
            if (done_) return outcome_;
        }
    }

    SummaryOutcome wait() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return done_; });
        return outcome_;
    }

    bool done() const {
        std::lock_guard lock(mu_);
        return done_;
    }

    void append(std::string_view piece) {
        {
            std::lock_guard lock(mu_);
            text_.append(piece);
        }
        cv_.notify_all();
    }

    void finish(SummaryOutcome outcome) {
        {
            std::lock_guard lock(mu_);
            outcome_ = std::move(outcome);
            done_ = true;
        }
        cv_.notify_all();
    }

private:
    ZoomLevel level_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::string text_;
    bool done_ = false;
    SummaryOutcome outcome_;
};

class PregenerateHandle {
public:
    PregenerateHandle() = default;
    explicit PregenerateHandle(std::vector<std::shared_ptr<SummaryFlight>> flights) : flights_(std::move(flights)) {}

    /// Blocks until every level is cached or failed.
    std::map<ZoomLevel, SummaryOutcome> wait() const {
        std::map<ZoomLevel, SummaryOutcome> out;
        for (const auto& f : flights_) out[f->level()] = f->wait();
        return out;
    }

    const std::vector<std::shared_ptr<SummaryFlight>>& flights() const { return flights_; }

private:
    std::vector<std::shared_ptr<SummaryFlight>> flights_;
};

class SummaryScheduler {
public:
    SummaryScheduler(GistEngine& engine, SummaryHost& host) : engine_(engine), host_(host) {}

    SummaryScheduler(const SummaryScheduler&) = delete;
    SummaryScheduler& operator=(const SummaryScheduler&) = delete;

    ~SummaryScheduler() { wait_idle(); }

    /// Cached result, the live flight for this key, or a new flight.
    std::shared_ptr<SummaryFlight> request(const SummaryTarget& target, ZoomLevel level) {
        if (level == ZoomLevel::Full) {
            return SummaryFlight::finished(level, {false, {}, ErrorCode::BadRequest, "the full level is never summarized"});
        }
        auto snap = host_.snapshot(target, level);
        if (!snap) {
            return SummaryFlight::finished(level, {false, {}, ErrorCode::NotFound, "no ramble " + target.ramble_id});
        }
        if (snap->fresh) {
            return SummaryFlight::finished(level, {true, snap->fresh->text, {}, {}, true, true});
        }
        if (text::trim(snap->text).empty()) {
            return SummaryFlight::finished(level, {false, {}, ErrorCode::BadRequest, "ramble has no text yet"});
        }

        auto key = target.doc_id + "|" + target.ramble_id + "|" + snap->content_hash + "|" + snap->keyword_hash + "|" +
                   std::string(to_string(level));
        std::shared_ptr<SummaryFlight> flight;
        {
            std::lock_guard lock(mu_);
            if (auto it = inflight_.find(key); it != inflight_.end()) return it->second;
            flight = std::make_shared<SummaryFlight>(level);
            inflight_.emplace(key, flight);
            prune_locked();
            ++active_;
            workers_.emplace_back([this, key, target, level, flight, snap = std::move(*snap)] {
                run(key, target, level, flight, snap);
            });
        }
        return flight;
    }

    /// Launches HALF, QUARTER and GIST concurrently.
    PregenerateHandle pregenerate(const SummaryTarget& target) {
        std::vector<std::shared_ptr<SummaryFlight>> flights;
        for (auto level : kSummaryLevels) flights.push_back(request(target, level));
        return PregenerateHandle(std::move(flights));
    }

    /// Blocks until no generation is running.
    void wait_idle() {
        std::unique_lock lock(mu_);
        idle_cv_.wait(lock, [&] { return active_ == 0; });
        for (auto& w : workers_) {
            if (w.joinable()) w.join();
        }
        workers_.clear();
    }

    std::size_t inflight_count() const {
        std::lock_guard lock(mu_);
        return inflight_.size();
    }

private:
    void run(const std::string& key, const SummaryTarget& target, ZoomLevel level,
             const std::shared_ptr<SummaryFlight>& flight, const GistSnapshot& snap) {
        SummaryOutcome outcome;
        try {
            outcome.text = engine_.summarize(snap.text, level, snap.keywords,
                                             [&](std::string_view piece) { flight->append(piece); });
            outcome.ok = true;
            SummaryEntry entry{level, outcome.text, snap.content_hash, snap.keyword_hash, now_iso8601(), false};
            outcome.stored = host_.store(target, entry);
        } catch (const Error& e) {
            outcome.code = e.code();
            outcome.message = e.what();
        } catch (const std::exception& e) {
            outcome.code = ErrorCode::BackendFailure;
            outcome.message = e.what();
        }
        {
            std::lock_guard lock(mu_);
            inflight_.erase(key);
        }
        flight->finish(std::move(outcome));
        {
            std::lock_guard lock(mu_);
            --active_;
        }
        idle_cv_.notify_all();
    }

    // Joins threads whose work is over; caller holds mu_.
    void prune_locked() {
        for (auto it = workers_.begin(); it != workers_.end();) {
            if (active_ == 0 && it->joinable()) {
                it->join();
                it = workers_.erase(it);
            } else {
                ++it;
            }
        }
    }

    GistEngine& engine_;
    SummaryHost& host_;
    mutable std::mutex mu_;
    std::condition_variable idle_cv_;
    std::map<std::string, std::shared_ptr<SummaryFlight>> inflight_;
    std::list<std::thread> workers_;
    std::size_t active_ = 0;
};

}  // namespace rambler
