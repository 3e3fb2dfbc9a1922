#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dreamkg/query_language.hpp"
#include "dreamkg/session.hpp"
#include "dreamkg/temporal.hpp"

namespace dreamkg {

struct CardDetails {
    std::string description;
    std::string eligibility;
    std::vector<std::string> weekly_hours;  // one line per day, Monday first
};

/// Everything shown for one organization. Every field comes from a graph node or a
/// computed distance.
struct ServiceCard {
    std::string org_name;
    std::optional<std::string> distance_mi;  // one decimal, e.g. "0.1"
    std::string phone;
    std::string address;
    std::string hours_line;  // "Tuesday, 11:00 AM - 7:00 PM"
    std::vector<std::string> services;  // "Wi-Fi (Free)"
    GeoPoint point;
    std::string directions_url;
    CardDetails details;

    nlohmann::ordered_json to_json() const;
};

struct Stop {
    int index = 1;
    std::string category_label;
    std::vector<ServiceCard> cards;
};

struct StopPlan {
    std::vector<Stop> stops;
    std::optional<std::string> message;  // set when some request found nothing

    std::size_t card_count() const noexcept;
    nlohmann::ordered_json to_json() const;
};

/// "Tuesday, 11:00 AM - 7:00 PM"; several windows on one day are comma-joined.
std::string format_hours_line(Day day, const std::vector<const HoursWindow*>& windows);

StopPlan format_cards(const ResultSet& results, const QueryIR& ir, const ClockContext& clock);

/// Re-runs each empty request with one constraint relaxed at a time (hours, distance,
/// feature/cost requirements) and says which relaxation would have produced results.
std::string explain_no_results(const QueryIR& ir, const ResultSet& results, const Graph& graph);

/// Delegates turn-by-turn directions to an external maps site:
/// https://www.google.com/maps/dir/?api=1&destination=LAT%2CLON[&origin=LAT%2CLON]
std::string directions_url(const std::optional<GeoPoint>& from, const GeoPoint& to);

/// One JSON object per turn, newline-terminated, oldest first.
std::string export_log(const Session& session);

/// Short one-paragraph answer summarizing the plan.
std::string summarize(const StopPlan& plan);

}  // namespace dreamkg
