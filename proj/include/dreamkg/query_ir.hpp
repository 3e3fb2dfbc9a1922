#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dreamkg/geo.hpp"
#include "dreamkg/ontology.hpp"
#include "dreamkg/temporal.hpp"

namespace dreamkg {

struct ServiceRequest {
    Category category = Category::Food;
    std::set<std::string> features;
    std::optional<Cost> cost;

    bool operator==(const ServiceRequest&) const = default;
};

inline constexpr double kDefaultRadiusMiles = 5.0;
inline constexpr int kDefaultLimit = 3;

struct SpatialFilter {
    SpatialAnchor anchor;
    double radius_m = miles_to_meters(kDefaultRadiusMiles);

    bool operator==(const SpatialFilter&) const = default;
};

/// One user intent: services x place x time. Results are always sorted by distance
/// ascending when a spatial filter is present.
struct QueryIR {
    std::vector<ServiceRequest> requests;
    std::optional<SpatialFilter> spatial;
    TemporalConstraint temporal = AnyTime{};
    int limit = kDefaultLimit;

    bool operator==(const QueryIR&) const = default;
};

bool is_valid(const QueryIR& ir) noexcept;

/// Equality over what the query means: requests, anchor point, radius, time and limit.
/// Anchor label and resolution kind are provenance and are not compared.
bool structurally_equal(const QueryIR& a, const QueryIR& b) noexcept;

nlohmann::ordered_json to_json(const TemporalConstraint& c);
nlohmann::ordered_json to_json(const ServiceRequest& r);
/// Canonical JSON. `redact_client` replaces client-location coordinates with null.
nlohmann::ordered_json to_json(const QueryIR& ir, bool redact_client = false);

/// Hex SHA-256 over the canonical JSON form.
std::string digest(const QueryIR& ir);

}  // namespace dreamkg
