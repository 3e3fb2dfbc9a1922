#include "dreamkg/query_ir.hpp"

#include "dreamkg/digest.hpp"

namespace dreamkg {

using nlohmann::ordered_json;

bool is_valid(const QueryIR& ir) noexcept {
    if (ir.requests.empty() || ir.limit < 1) return false;
    for (const auto& r : ir.requests)
        for (const auto& f : r.features)
            if (!is_feature_tag(f)) return false;
    if (ir.spatial && (!is_valid(ir.spatial->anchor.point) || !(ir.spatial->radius_m > 0.0))) return false;
    return is_valid(ir.temporal);
}

bool structurally_equal(const QueryIR& a, const QueryIR& b) noexcept {
    if (a.requests != b.requests || a.temporal != b.temporal || a.limit != b.limit) return false;
    if (a.spatial.has_value() != b.spatial.has_value()) return false;
    if (!a.spatial) return true;
    return a.spatial->anchor.point == b.spatial->anchor.point && a.spatial->radius_m == b.spatial->radius_m;
}

ordered_json to_json(const TemporalConstraint& c) {
    return std::visit(
        [](const auto& v) -> ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AnyTime>) {
                return ordered_json{{"type", "any_time"}};
            } else if constexpr (std::is_same_v<T, OpenAt>) {
                return ordered_json{{"type", "open_at"}, {"day", to_token(v.day)}, {"minute", v.minute}};
            } else {
                auto days = ordered_json::array();
                for (auto d : v.days) days.push_back(to_token(d));
                return ordered_json{{"type", "open_during"},
                                    {"days", days},
                                    {"start_min", v.start_min},
                                    {"end_min", v.end_min}};
            }
        },
        c);
}

ordered_json to_json(const ServiceRequest& r) {
    ordered_json j;
    j["category"] = to_token(r.category);
    j["features"] = r.features;
    j["cost"] = r.cost ? ordered_json(to_token(*r.cost)) : ordered_json(nullptr);
    return j;
}

ordered_json to_json(const QueryIR& ir, bool redact_client) {
    ordered_json j;
    auto reqs = ordered_json::array();
    for (const auto& r : ir.requests) reqs.push_back(to_json(r));
    j["requests"] = reqs;
    if (ir.spatial) {
        const auto& a = ir.spatial->anchor;
        const bool hide = redact_client && a.resolution == AnchorResolution::ClientLocation;
        j["spatial"] = ordered_json{{"label", a.label},
                                    {"resolution", to_token(a.resolution)},
                                    {"lat", hide ? ordered_json(nullptr) : ordered_json(a.point.lat)},
                                    {"lon", hide ? ordered_json(nullptr) : ordered_json(a.point.lon)},
                                    {"radius_m", ir.spatial->radius_m}};
    } else {
        j["spatial"] = nullptr;
    }
    j["temporal"] = to_json(ir.temporal);
    j["limit"] = ir.limit;
    return j;
}

std::string digest(const QueryIR& ir) { return sha256_hex(to_json(ir).dump()); }

}  // namespace dreamkg
