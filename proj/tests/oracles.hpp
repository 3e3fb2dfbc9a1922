#pragma once

// Reference implementations used only by tests. Each one takes a different route to
// the answer than the library code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dreamkg/kg_store.hpp"
#include "dreamkg/query_ir.hpp"
#include "dreamkg/temporal.hpp"

namespace oracle {

using namespace dreamkg;

// Great-circle distance through the chord between unit vectors.
inline double distance_m(const GeoPoint& a, const GeoPoint& b) {
    constexpr double pi = 3.14159265358979323846;
    auto vec = [&](const GeoPoint& p) {
        const double la = p.lat * pi / 180.0, lo = p.lon * pi / 180.0;
        return std::array<double, 3>{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
    };
    const auto u = vec(a), v = vec(b);
    const double dx = u[0] - v[0], dy = u[1] - v[1], dz = u[2] - v[2];
    const double chord = std::sqrt(dx * dx + dy * dy + dz * dz);
    return 2.0 * std::asin(std::min(1.0, chord / 2.0)) * 6371000.0;
}

inline bool open_at(const std::vector<const HoursWindow*>& windows, Day d, int minute) {
    for (const auto* w : windows)
        if (w->day == d && w->open_min <= minute && minute < w->close_min) return true;
    return false;
}

// Walks every minute of the week the constraint covers.
inline bool brute_satisfies(const std::vector<const HoursWindow*>& windows, const TemporalConstraint& c) {
    if (std::holds_alternative<AnyTime>(c)) return true;
    if (const auto* at = std::get_if<OpenAt>(&c)) return open_at(windows, at->day, at->minute);
    const auto& during = std::get<OpenDuring>(c);
    for (int week_min = 0; week_min < 7 * 1440; ++week_min) {
        const Day d = day_at(week_min / 1440);
        const int m = week_min % 1440;
        if (!during.days.count(d) || m < during.start_min || m >= during.end_min) continue;
        if (open_at(windows, d, m)) return true;
    }
    return false;
}

// Openness of an unsplit record at a minute of the week (Mon 00:00 = 0).
inline bool raw_open(const std::vector<RawHours>& raw, int week_min) {
    for (const auto& r : raw) {
        const int start = index_of(r.day) * 1440 + r.open_min;
        const int length = r.close_min > r.open_min ? r.close_min - r.open_min : r.close_min + 1440 - r.open_min;
        for (int k = 0; k < length; ++k)
            if ((start + k) % (7 * 1440) == week_min) return true;
    }
    return false;
}

struct Row {
    NodeId org;
    NodeId location;
    std::set<NodeId> services;
    std::set<NodeId> matched_hours;
    std::optional<double> meters;

    bool operator==(const Row&) const = default;
};

// Full scan over the edge list: filter, sort, truncate.
inline std::vector<std::vector<Row>> evaluate(const QueryIR& ir, const Graph& g) {
    std::map<NodeId, std::vector<NodeId>> offers, located, hours;
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::Offers) offers[e.from].push_back(e.to);
        if (e.kind == EdgeKind::LocatedAt) located[e.from].push_back(e.to);
        if (e.kind == EdgeKind::OpenDuring) hours[e.from].push_back(e.to);
    }
    std::vector<std::vector<Row>> out;
    for (const auto& req : ir.requests) {
        std::vector<Row> rows;
        for (std::uint32_t i = 0; i < g.node_count(); ++i) {
            const NodeId oid{i};
            if (!std::holds_alternative<Organization>(g.node(oid))) continue;
            std::set<NodeId> services;
            for (auto sid : offers[oid]) {
                const auto& s = g.service(sid);
                bool ok = s.category == req.category;
                for (const auto& f : req.features) ok = ok && s.features.count(f);
                if (req.cost) ok = ok && s.cost == *req.cost;
                if (ok) services.insert(sid);
            }
            if (services.empty()) continue;
            std::vector<const HoursWindow*> windows;
            for (auto hid : hours[oid]) windows.push_back(&g.hours(hid));
            if (!brute_satisfies(windows, ir.temporal)) continue;
            std::set<NodeId> matched;
            for (const auto* w : windows) {
                if (brute_satisfies({w}, ir.temporal)) matched.insert(w->id);
            }
            for (auto lid : located[oid]) {
                Row r{oid, lid, services, matched, std::nullopt};
                if (ir.spatial) {
                    r.meters = distance_m(ir.spatial->anchor.point, g.location(lid).point);
                    if (*r.meters > ir.spatial->radius_m) continue;
                }
                rows.push_back(r);
            }
        }
        std::sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
            const auto& na = g.organization(a.org).name;
            const auto& nb = g.organization(b.org).name;
            return std::tie(a.meters, na, a.org, a.location) < std::tie(b.meters, nb, b.org, b.location);
        });
        if (rows.size() > static_cast<std::size_t>(ir.limit)) rows.resize(static_cast<std::size_t>(ir.limit));
        out.push_back(std::move(rows));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random instances

inline const std::vector<std::string>& feature_pool() {
    static const std::vector<std::string> pool{"wifi", "printing", "walk_in", "showers"};
    return pool;
}

inline std::vector<HoursWindow> random_week(std::mt19937_64& rng) {
    std::vector<HoursWindow> out;
    std::uniform_int_distribution<int> count(0, 2);
    std::uniform_int_distribution<int> minute(0, 1440);
    for (auto d : kAllDays) {
        // Non-overlapping windows: sorted distinct cut points paired up.
        std::set<int> cuts;
        const int n = count(rng);
        while (static_cast<int>(cuts.size()) < 2 * n) cuts.insert(minute(rng));
        std::vector<int> v(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < v.size(); i += 2) out.push_back(HoursWindow{{}, d, v[i], v[i + 1]});
    }
    return out;
}

inline TemporalConstraint random_constraint(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 2), day(0, 6), minute(0, 1439);
    switch (pick(rng)) {
        case 0: return AnyTime{};
        case 1: return OpenAt{day_at(day(rng)), minute(rng)};
        default: {
            OpenDuring d;
            const int n = 1 + day(rng) % 3;
            while (static_cast<int>(d.days.size()) < n) d.days.insert(day_at(day(rng)));
            int a = minute(rng), b = minute(rng) + 1;
            if (a == b) ++b;
            d.start_min = std::min(a, b);
            d.end_min = std::max(a, b);
            return d;
        }
    }
}

inline GeoPoint random_philly_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lat(39.90, 40.10), lon(-75.30, -75.00);
    return GeoPoint{lat(rng), lon(rng)};
}

inline Graph random_graph(std::mt19937_64& rng, int max_orgs = 50) {
    static const std::vector<std::string> names{"Alpha Center", "Beacon House", "Beacon House", "Cedar Hall",
                                                "Delta Point", "Elm Street Hub", "Fairview", "Grace Place"};
    std::uniform_int_distribution<int> n_orgs(0, max_orgs), small(1, 3), coin(0, 1), cat(0, 4), cost(0, 4);
    std::uniform_int_distribution<std::size_t> name(0, names.size() - 1);
    GraphBuilder b;
    std::vector<GeoPoint> used;
    const int orgs = n_orgs(rng);
    for (int i = 0; i < orgs; ++i) {
        const auto oid = b.add(Organization{{}, names[name(rng)], {"1 Main St", "Philadelphia", "PA", "19104"},
                                            "(215) 555-0100", ""});
        const int locs = coin(rng) ? 1 : small(rng) % 2 + 1;
        for (int k = 0; k < locs; ++k) {
            GeoPoint p = (!used.empty() && coin(rng) && coin(rng)) ? used[rng() % used.size()] : random_philly_point(rng);
            used.push_back(p);
            b.connect(oid, b.add(Location{{}, p, "19104", "", ""}), EdgeKind::LocatedAt);
        }
        for (int k = small(rng); k > 0; --k) {
            Service s;
            s.category = kAllCategories[static_cast<std::size_t>(cat(rng))];
            s.label = "svc";
            const int c = cost(rng);
            s.cost = c < 4 ? kAllCosts[static_cast<std::size_t>(c)] : Cost::Free;
            for (const auto& f : feature_pool())
                if (coin(rng)) s.features.insert(f);
            b.connect(oid, b.add(s), EdgeKind::Offers);
        }
        for (auto w : random_week(rng)) b.connect(oid, b.add(w), EdgeKind::OpenDuring);
    }
    return std::move(b).build();
}

inline ServiceRequest random_request(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> cat(0, 4), coin(0, 3), cost(0, 3);
    ServiceRequest r;
    r.category = kAllCategories[static_cast<std::size_t>(cat(rng))];
    for (const auto& f : feature_pool())
        if (coin(rng) == 0) r.features.insert(f);
    if (coin(rng) == 0) r.cost = kAllCosts[static_cast<std::size_t>(cost(rng))];
    return r;
}

inline QueryIR random_ir(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n(1, 3), coin(0, 1), limit(1, 6);
    std::uniform_real_distribution<double> radius(200.0, 20000.0);
    QueryIR ir;
    for (int i = n(rng); i > 0; --i) ir.requests.push_back(random_request(rng));
    if (coin(rng))
        ir.spatial = SpatialFilter{SpatialAnchor{random_philly_point(rng), "anchor", AnchorResolution::Landmark},
                                   radius(rng)};
    ir.temporal = random_constraint(rng);
    ir.limit = limit(rng);
    return ir;
}

}  // namespace oracle
