#include "dreamkg/session.hpp"

#include <cstdio>
#include <limits>

namespace dreamkg {

using nlohmann::ordered_json;

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const auto in_day = t - day_point;
    const auto h = duration_cast<hours>(in_day);
    const auto m = duration_cast<minutes>(in_day - h);
    const auto s = duration_cast<seconds>(in_day - h - m);
    const auto ms = in_day - h - m - s;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                  static_cast<int>(m.count()), static_cast<int>(s.count()), static_cast<int>(ms.count()));
    return buf;
}

ordered_json Turn::to_json() const {
    ordered_json j;
    j["timestamp"] = format_timestamp(timestamp);
    j["session_id"] = session_id;
    j["text"] = text;
    j["outcome"] = fallback ? "fallback" : "answered";
    j["fallback_reason"] = fallback ? ordered_json(to_token(*fallback)) : ordered_json(nullptr);
    j["cues"] = cues;
    j["compiled_query"] = compiled_query;
    j["ir_digest"] = ir_digest.empty() ? ordered_json(nullptr) : ordered_json(ir_digest);
    j["spatial_resolution"] = spatial_resolution ? ordered_json(*spatial_resolution) : ordered_json(nullptr);
    j["result_count"] = result_orgs.size();
    j["results"] = result_orgs;
    j["notes"] = notes;
    j["latency_ms"] = latency_ms;
    return j;
}

std::variant<QueryIR, Fallback> resolve_followup(const Session& session, const ExtractedCues& cues,
                                                 std::variant<QueryIR, Fallback> fresh) {
    switch (cues.followup) {
        case FollowupMarker::None:
            return fresh;

        case FollowupMarker::CategorySwitch: {
            if (!session.last_ir) return make_fallback(FallbackReason::NoCues);
            if (std::holds_alternative<Fallback>(fresh)) return fresh;
            const auto& now = std::get<QueryIR>(fresh);
            QueryIR ir = *session.last_ir;
            ir.requests = cues.service_cues;
            if (cues.spatial_cue && now.spatial) ir.spatial = now.spatial;
            if (cues.temporal_cue) ir.temporal = now.temporal;
            return ir;
        }

        case FollowupMarker::Selector: {
            if (!session.last_ir || !session.last_results || session.last_results->total() == 0)
                return make_fallback(FallbackReason::NoCues);
            const auto& per_request = session.last_results->per_request;
            std::optional<std::size_t> pick;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < per_request.size(); ++i) {
                if (per_request[i].empty()) continue;
                const double d = per_request[i].front().distance_m.value_or(std::numeric_limits<double>::infinity());
                if (!pick || d < best) {
                    pick = i;
                    best = d;
                }
            }
            QueryIR ir = *session.last_ir;
            ir.requests = {session.last_ir->requests.at(*pick)};
            ir.limit = 1;
            return ir;
        }
    }
    return fresh;
}

std::shared_ptr<SessionStore::Slot> SessionStore::find(const std::string& id) const {
    std::shared_lock read(table_mutex_);
    if (auto it = table_.find(id); it != table_.end()) return it->second;
    return nullptr;
}

std::shared_ptr<SessionStore::Slot> SessionStore::acquire(const std::string& id, Timestamp now) {
    if (auto slot = find(id)) return slot;
    std::unique_lock write(table_mutex_);
    auto& slot = table_[id];
    if (!slot) {
        slot = std::make_shared<Slot>();
        slot->session.id = id;
        // Stamped before it becomes visible so a concurrent sweep cannot see it as idle.
        slot->session.last_active = now;
    }
    return slot;
}

std::vector<std::string> SessionStore::touch_and_evict(Timestamp now) {
    std::vector<std::string> evicted;
    std::unique_lock write(table_mutex_);
    for (auto it = table_.begin(); it != table_.end();) {
        const auto slot = it->second;
        std::unique_lock lock(slot->mutex, std::try_to_lock);
        // A slot someone is holding is in use, not idle.
        if (lock.owns_lock() && now - slot->session.last_active > ttl_) {
            slot->evicted = true;
            evicted.push_back(it->first);
            it = table_.erase(it);
        } else {
            ++it;
        }
    }
    return evicted;
}

bool SessionStore::contains(const std::string& id) const {
    std::shared_lock read(table_mutex_);
    return table_.count(id) != 0;
}

std::size_t SessionStore::size() const {
    std::shared_lock read(table_mutex_);
    return table_.size();
}

}  // namespace dreamkg
