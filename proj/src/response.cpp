#include "dreamkg/response.hpp"

#include <algorithm>
#include <cstdio>

namespace dreamkg {

using nlohmann::ordered_json;

namespace {

std::string coord_text(const GeoPoint& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f%%2C%.6f", p.lat, p.lon);
    return buf;
}

std::vector<const HoursWindow*> sorted_windows(std::vector<const HoursWindow*> w) {
    std::sort(w.begin(), w.end(), [](const HoursWindow* a, const HoursWindow* b) {
        return std::tie(a->day, a->open_min, a->id) < std::tie(b->day, b->open_min, b->id);
    });
    return w;
}

std::string service_text(const Service& s) {
    if (s.cost == Cost::Unknown) return s.label;
    return s.label + " (" + std::string(display_label(s.cost)) + ")";
}

std::string describe_request(const ServiceRequest& r) {
    std::string out(display_label(r.category));
    std::vector<std::string> extras;
    if (r.cost) extras.emplace_back(display_label(*r.cost));
    for (const auto& f : r.features) extras.push_back(f);
    if (!extras.empty()) {
        out += " (";
        for (std::size_t i = 0; i < extras.size(); ++i) out += (i ? ", " : "") + extras[i];
        out += ")";
    }
    return out;
}

std::string describe_time(const TemporalConstraint& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AnyTime>) {
                return {};
            } else if constexpr (std::is_same_v<T, OpenAt>) {
                return "open " + std::string(full_name(v.day)) + " at " + format_clock_12h(v.minute);
            } else {
                std::string days;
                for (auto d : v.days) days += (days.empty() ? "" : "/") + std::string(full_name(d));
                if (v.start_min == 0 && v.end_min == kMinutesPerDay) return "open on " + days;
                return "open on " + days + " between " + format_clock_12h(v.start_min) + " and " +
                       format_clock_12h(v.end_min);
            }
        },
        c);
}

std::string plural(std::size_t n, std::string_view word) {
    return std::to_string(n) + " " + std::string(word) + (n == 1 ? "" : "s");
}

ServiceCard make_card(const ResultRow& row, const QueryIR& ir, const ClockContext& clock) {
    ServiceCard card;
    card.org_name = row.org->name;
    if (auto mi = row.distance_miles()) card.distance_mi = format_miles(*mi);
    card.phone = row.org->phone;
    card.address = row.org->address.display();
    card.point = row.location->point;

    if (std::holds_alternative<AnyTime>(ir.temporal)) {
        std::vector<const HoursWindow*> today;
        for (const auto* w : row.all_hours)
            if (w->day == clock.now_day) today.push_back(w);
        card.hours_line = format_hours_line(clock.now_day, today);
    } else {
        const auto matched = sorted_windows(row.matched_hours);
        std::string line;
        for (auto d : kAllDays) {
            std::vector<const HoursWindow*> on_day;
            for (const auto* w : matched)
                if (w->day == d) on_day.push_back(w);
            if (on_day.empty()) continue;
            if (!line.empty()) line += "; ";
            line += format_hours_line(d, on_day);
        }
        card.hours_line = line;
    }

    for (const auto* s : row.services) card.services.push_back(service_text(*s));

    std::optional<GeoPoint> origin;
    if (ir.spatial) origin = ir.spatial->anchor.point;
    card.directions_url = directions_url(origin, card.point);

    card.details.description = row.org->description;
    std::vector<std::string> elig;
    for (const auto* s : row.services)
        if (!s->eligibility.empty() && std::find(elig.begin(), elig.end(), s->eligibility) == elig.end())
            elig.push_back(s->eligibility);
    for (std::size_t i = 0; i < elig.size(); ++i) card.details.eligibility += (i ? " " : "") + elig[i];
    for (auto d : kAllDays) {
        std::vector<const HoursWindow*> on_day;
        for (const auto* w : row.all_hours)
            if (w->day == d) on_day.push_back(w);
        card.details.weekly_hours.push_back(format_hours_line(d, on_day));
    }
    return card;
}

}  // namespace

std::string format_hours_line(Day day, const std::vector<const HoursWindow*>& windows) {
    std::string out = std::string(full_name(day)) + ", ";
    const auto sorted = sorted_windows(windows);
    if (sorted.empty()) return out + "Closed";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i) out += ", ";
        out += format_clock_12h(sorted[i]->open_min) + " - " + format_clock_12h(sorted[i]->close_min);
    }
    return out;
}

ordered_json ServiceCard::to_json() const {
    ordered_json j;
    j["org_name"] = org_name;
    j["distance_mi"] = distance_mi ? ordered_json(*distance_mi) : ordered_json(nullptr);
    j["phone"] = phone;
    j["address"] = address;
    j["hours_line"] = hours_line;
    j["services"] = services;
    j["lat"] = point.lat;
    j["lon"] = point.lon;
    j["directions_url"] = directions_url;
    j["details"] = ordered_json{{"description", details.description},
                                {"eligibility", details.eligibility},
                                {"weekly_hours", details.weekly_hours}};
    return j;
}

std::size_t StopPlan::card_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : stops) n += s.cards.size();
    return n;
}

ordered_json StopPlan::to_json() const {
    ordered_json j;
    auto arr = ordered_json::array();
    for (const auto& s : stops) {
        auto cards = ordered_json::array();
        for (const auto& c : s.cards) cards.push_back(c.to_json());
        arr.push_back(ordered_json{{"index", s.index},
                                   {"title", "Stop " + std::to_string(s.index) + ": " + s.category_label},
                                   {"category_label", s.category_label},
                                   {"cards", cards}});
    }
    j["stops"] = arr;
    j["message"] = message ? ordered_json(*message) : ordered_json(nullptr);
    return j;
}

StopPlan format_cards(const ResultSet& results, const QueryIR& ir, const ClockContext& clock) {
    StopPlan plan;
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < ir.requests.size(); ++i) {
        const auto& rows = i < results.per_request.size() ? results.per_request[i] : std::vector<ResultRow>{};
        if (rows.empty()) {
            missing.push_back(describe_request(ir.requests[i]));
            continue;
        }
        Stop stop;
        stop.index = static_cast<int>(plan.stops.size()) + 1;
        stop.category_label = std::string(display_label(ir.requests[i].category));
        for (const auto& row : rows) stop.cards.push_back(make_card(row, ir, clock));
        plan.stops.push_back(std::move(stop));
    }
    if (!missing.empty()) {
        std::string msg = "No results for ";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
        const auto when = describe_time(ir.temporal);
        if (!when.empty()) msg += ", " + when;
        if (ir.spatial)
            msg += ", within " + format_miles(meters_to_miles(ir.spatial->radius_m)) + " miles of " +
                   ir.spatial->anchor.label;
        msg += ".";
        plan.message = msg;
    }
    return plan;
}

std::string explain_no_results(const QueryIR& ir, const ResultSet& results, const Graph& graph) {
    std::string out;
    for (std::size_t i = 0; i < ir.requests.size(); ++i) {
        if (i < results.per_request.size() && !results.per_request[i].empty()) continue;
        QueryIR base = ir;
        base.requests = {ir.requests[i]};
        std::vector<std::string> fixes;
        auto probe = [&](QueryIR relaxed, const std::string& what) {
            const auto n = execute(relaxed, graph).total();
            if (n > 0) fixes.push_back("without the " + what + " there would be " + plural(n, "result"));
        };
        if (!std::holds_alternative<AnyTime>(ir.temporal)) {
            QueryIR r = base;
            r.temporal = AnyTime{};
            probe(r, "hours constraint");
        }
        if (ir.spatial) {
            QueryIR r = base;
            r.spatial.reset();
            probe(r, "distance limit");
        }
        if (!ir.requests[i].features.empty() || ir.requests[i].cost) {
            QueryIR r = base;
            r.requests[0].features.clear();
            r.requests[0].cost.reset();
            probe(r, "feature and cost requirements");
        }
        std::string sentence = describe_request(ir.requests[i]) + ": ";
        if (fixes.empty()) {
            const auto any = graph.match_candidates(ir.requests[i].category, {}, std::nullopt).size();
            sentence += any == 0 ? "no providers of this kind are in the dataset"
                                 : "no single constraint explains the miss; several apply together";
        } else {
            for (std::size_t k = 0; k < fixes.size(); ++k) sentence += (k ? "; " : "") + fixes[k];
        }
        if (!out.empty()) out += " ";
        out += sentence + ".";
    }
    return out;
}

std::string directions_url(const std::optional<GeoPoint>& from, const GeoPoint& to) {
    std::string url = "https://www.google.com/maps/dir/?api=1&destination=" + coord_text(to);
    if (from) url += "&origin=" + coord_text(*from);
    return url;
}

std::string export_log(const Session& session) {
    std::string out;
    for (const auto& t : session.turns) {
        out += t.to_json().dump();
        out += '\n';
    }
    return out;
}

std::string summarize(const StopPlan& plan) {
    if (plan.stops.empty()) return plan.message.value_or("No results.");
    std::string out;
    for (const auto& s : plan.stops) {
        const auto& top = s.cards.front();
        if (!out.empty()) out += " ";
        out += "Stop " + std::to_string(s.index) + ": " + s.category_label + " - " + top.org_name;
        if (top.distance_mi) out += ", " + *top.distance_mi + " miles away";
        out += ".";
    }
    if (plan.message) out += " " + *plan.message;
    return out;
}

}  // namespace dreamkg
