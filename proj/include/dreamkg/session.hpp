#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dreamkg/query_language.hpp"
#include "dreamkg/query_understanding.hpp"

namespace dreamkg {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// "2026-10-20T16:00:00.000Z"
std::string format_timestamp(Timestamp t);

/// One logged exchange. Serialized as a single JSON line; never holds client coordinates.
struct Turn {
    Timestamp timestamp;
    std::string session_id;
    std::string text;
    nlohmann::ordered_json cues;       // ExtractedCues, see to_json
    std::string compiled_query;        // client-location coordinates redacted
    std::optional<FallbackReason> fallback;
    std::string ir_digest;             // empty for fallbacks
    std::optional<std::string> spatial_resolution;
    std::vector<std::string> result_orgs;
    std::vector<std::string> notes;
    double latency_ms = 0.0;

    nlohmann::ordered_json to_json() const;
};

struct Session {
    std::string id;
    std::vector<Turn> turns;
    std::optional<QueryIR> last_ir;
    std::optional<ResultSet> last_results;
    Timestamp last_active{};
};

/// Applies the follow-up forms to a freshly normalized utterance:
/// a category switch reuses the previous place, time and limit; a selector narrows the
/// previous query to its single closest result.
std::variant<QueryIR, Fallback> resolve_followup(const Session& session, const ExtractedCues& cues,
                                                 std::variant<QueryIR, Fallback> fresh);

class UnknownSession : public std::runtime_error {
public:
    explicit UnknownSession(const std::string& id) : std::runtime_error("unknown session '" + id + "'") {}
};

/// Thread-safe session table. Work on one session is serialized; distinct sessions
/// proceed in parallel.
class SessionStore {
public:
    explicit SessionStore(std::chrono::milliseconds ttl = std::chrono::minutes{30}) : ttl_(ttl) {}

    /// Runs `fn` with exclusive access to the session, creating it if needed, and
    /// marks it active at `now`.
    template <typename Fn>
    auto with_session(const std::string& id, Timestamp now, Fn&& fn) {
        for (;;) {
            auto slot = acquire(id, now);
            std::lock_guard lock(slot->mutex);
            if (slot->evicted) continue;  // lost a race with touch_and_evict
            slot->session.last_active = now;
            return fn(slot->session);
        }
    }

    /// Read access to an existing session. Throws UnknownSession.
    template <typename Fn>
    auto inspect(const std::string& id, Fn&& fn) const {
        auto slot = find(id);
        if (!slot) throw UnknownSession(id);
        std::lock_guard lock(slot->mutex);
        return fn(static_cast<const Session&>(slot->session));
    }

    /// Removes sessions idle for longer than the TTL; returns their ids.
    std::vector<std::string> touch_and_evict(Timestamp now);

    bool contains(const std::string& id) const;
    std::size_t size() const;
    std::chrono::milliseconds ttl() const noexcept { return ttl_; }

private:
    struct Slot {
        std::mutex mutex;
        Session session;
        bool evicted = false;
    };

    std::shared_ptr<Slot> find(const std::string& id) const;
    std::shared_ptr<Slot> acquire(const std::string& id, Timestamp now);

    std::chrono::milliseconds ttl_;
    mutable std::shared_mutex table_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> table_;
};

}  // namespace dreamkg
