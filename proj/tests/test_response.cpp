#include <doctest.h>

#include <random>
#include <regex>
#include <sstream>

#include "dreamkg/response.hpp"
#include "fixture.hpp"

using namespace dreamkg;
using nlohmann::json;

namespace {

const GeoPoint kWestLehigh{39.99282, -75.14637};
const GeoPoint kCityHall{39.9526, -75.1652};
const ClockContext kTueNoon{Day::Tue, 720};

const Graph& fixture_graph() {
    static const Graph g = load_dataset(fixture::path("dataset.json"));
    return g;
}

QueryIR fig2_ir() {
    QueryIR ir;
    ir.requests.push_back(ServiceRequest{Category::Library, {"wifi"}, Cost::Free});
    ir.spatial = SpatialFilter{SpatialAnchor{kWestLehigh, "west lehigh avenue", AnchorResolution::Street},
                               miles_to_meters(5.0)};
    ir.temporal = OpenDuring{{Day::Tue}, 0, 1440};
    return ir;
}

StopPlan plan_for(const QueryIR& ir) { return format_cards(execute(ir, fixture_graph()), ir, kTueNoon); }

std::pair<GeoPoint, std::optional<GeoPoint>> parse_url(const std::string& url) {
    static const std::regex dest(R"(destination=(-?[0-9.]+)%2C(-?[0-9.]+))");
    static const std::regex orig(R"(origin=(-?[0-9.]+)%2C(-?[0-9.]+))");
    std::smatch m;
    REQUIRE(std::regex_search(url, m, dest));
    const GeoPoint to{std::stod(m[1]), std::stod(m[2])};
    std::optional<GeoPoint> from;
    if (std::regex_search(url, m, orig)) from = GeoPoint{std::stod(m[1]), std::stod(m[2])};
    return {to, from};
}

}  // namespace

TEST_CASE("the Lillian Marrero Library card") {
    const auto plan = plan_for(fig2_ir());
    REQUIRE(plan.stops.size() == 1);
    CHECK(plan.stops[0].index == 1);
    CHECK(plan.stops[0].category_label == "Library");
    REQUIRE(plan.stops[0].cards.size() == 1);
    const auto& c = plan.stops[0].cards[0];
    CHECK(c.org_name == "Lillian Marrero Library");
    CHECK(c.distance_mi == std::optional<std::string>("0.1"));
    CHECK(c.phone == "(215) 685-9794");
    CHECK(c.address == "601 West Lehigh Avenue, Philadelphia, PA, 19133");
    CHECK(c.hours_line == "Tuesday, 11:00 AM - 7:00 PM");
    CHECK(c.services == std::vector<std::string>{"Wi-Fi (Free)"});
    CHECK_FALSE(plan.message);
    CHECK(summarize(plan).find("Stop 1: Library - Lillian Marrero Library, 0.1 miles away.") == 0);
}

TEST_CASE("expandable details carry the rest of the record") {
    auto ir = fig2_ir();
    ir.requests[0] = ServiceRequest{Category::Library, {}, std::nullopt};
    ir.spatial->radius_m = 500.0;
    const auto plan = plan_for(ir);
    REQUIRE(plan.card_count() == 1);
    const auto& c = plan.stops[0].cards[0];
    CHECK(c.services.size() == 3);
    CHECK(c.details.description.find("Neighborhood branch") == 0);
    CHECK(c.details.eligibility == "Philadelphia residents with a library card.");
    REQUIRE(c.details.weekly_hours.size() == 7);
    CHECK(c.details.weekly_hours[0] == "Monday, 10:00 AM - 6:00 PM");
    CHECK(c.details.weekly_hours[1] == "Tuesday, 11:00 AM - 7:00 PM");
    CHECK(c.details.weekly_hours[6].find("Sunday") == 0);
}

TEST_CASE("every card field traces back to the graph") {
    QueryIR ir;
    for (auto c : kAllCategories) ir.requests.push_back(ServiceRequest{c, {}, std::nullopt});
    ir.spatial = SpatialFilter{SpatialAnchor{kCityHall, "city hall", AnchorResolution::Landmark}, miles_to_meters(30.0)};
    ir.limit = 20;
    const auto& g = fixture_graph();
    const auto plan = plan_for(ir);
    CHECK(plan.card_count() > 10);
    for (const auto& stop : plan.stops) {
        for (const auto& card : stop.cards) {
            const Organization* org = nullptr;
            for (const auto& n : g.nodes())
                if (const auto* o = std::get_if<Organization>(&n); o && o->name == card.org_name) org = o;
            REQUIRE_MESSAGE(org, card.org_name);
            CHECK(card.phone == org->phone);
            CHECK(card.address == org->address.display());
            CHECK(card.details.description == org->description);
            REQUIRE(card.distance_mi);
            CHECK(*card.distance_mi == format_miles(meters_to_miles(haversine_m(kCityHall, card.point))));
        }
    }
}

TEST_CASE("an empty result says which constraints were applied") {
    QueryIR ir;
    ir.requests.push_back(ServiceRequest{Category::SocialSecurity, {}, std::nullopt});
    ir.spatial = SpatialFilter{SpatialAnchor{kCityHall, "city hall", AnchorResolution::Landmark}, miles_to_meters(5.0)};
    ir.temporal = OpenDuring{{Day::Sun}, 0, 1440};
    const auto results = execute(ir, fixture_graph());
    REQUIRE(results.total() == 0);
    const auto plan = format_cards(results, ir, kTueNoon);
    CHECK(plan.stops.empty());
    REQUIRE(plan.message);
    CHECK(plan.message->find("No results for") == 0);
    CHECK(plan.message->find("Sunday") != std::string::npos);
    CHECK(plan.message->find("within 5.0 miles of city hall") != std::string::npos);
    const auto why = explain_no_results(ir, results, fixture_graph());
    CHECK(why.find("without the hours constraint") != std::string::npos);
}

TEST_CASE("stops follow request order and skip empty requests") {
    QueryIR ir;
    ir.requests = {ServiceRequest{Category::Food, {}, std::nullopt}, ServiceRequest{Category::Library, {"printing"}, std::nullopt},
                   ServiceRequest{Category::Shelter, {}, std::nullopt}};
    ir.spatial = SpatialFilter{SpatialAnchor{kCityHall, "city hall", AnchorResolution::Landmark}, miles_to_meters(5.0)};
    auto plan = plan_for(ir);
    REQUIRE(plan.stops.size() == 3);
    CHECK(plan.stops[0].category_label == "Food");
    CHECK(plan.stops[1].category_label == "Library");
    CHECK(plan.stops[2].category_label == "Shelter");
    for (int i = 0; i < 3; ++i) CHECK(plan.stops[i].index == i + 1);

    ir.requests[1] = ServiceRequest{Category::Library, {"showers"}, std::nullopt};
    plan = plan_for(ir);
    REQUIRE(plan.stops.size() == 2);
    CHECK(plan.stops[1].index == 2);
    CHECK(plan.stops[1].category_label == "Shelter");
    CHECK(plan.message);
}

TEST_CASE("hours line under AnyTime shows today's hours") {
    auto ir = fig2_ir();
    ir.temporal = AnyTime{};
    const auto plan = format_cards(execute(ir, fixture_graph()), ir, ClockContext{Day::Mon, 600});
    REQUIRE(plan.card_count() == 1);
    CHECK(plan.stops[0].cards[0].hours_line == "Monday, 10:00 AM - 6:00 PM");
}

TEST_CASE("hours line formatting") {
    HoursWindow a{{}, Day::Sat, 540, 720}, b{{}, Day::Sat, 780, 1440};
    CHECK(format_hours_line(Day::Sat, {&a, &b}) == "Saturday, 9:00 AM - 12:00 PM, 1:00 PM - 12:00 AM");
    CHECK(format_hours_line(Day::Sun, {}) == "Sunday, Closed");
}

TEST_CASE("directions URLs") {
    const GeoPoint to{39.99238, -75.14402};
    const auto one = directions_url(std::nullopt, to);
    CHECK(one == "https://www.google.com/maps/dir/?api=1&destination=39.992380%2C-75.144020");
    const auto two = directions_url(kCityHall, to);
    CHECK(two.find("https://") == 0);
    CHECK(two.find("origin=39.952600%2C-75.165200") != std::string::npos);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-179.0, 179.0);
    for (int i = 0; i < 200; ++i) {
        const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
        const auto [dest, orig] = parse_url(directions_url(a, b));
        CHECK(std::abs(dest.lat - b.lat) <= 1e-6);
        CHECK(std::abs(dest.lon - b.lon) <= 1e-6);
        REQUIRE(orig);
        CHECK(std::abs(orig->lat - a.lat) <= 1e-6);
        CHECK(std::abs(orig->lon - a.lon) <= 1e-6);
    }
}

TEST_CASE("export_log of an empty session is empty") {
    CHECK(export_log(Session{}).empty());
}

TEST_CASE("export_log has one JSON line per turn, oldest first, stable across exports") {
    auto e = fixture::engine();
    const auto r1 = e->query(QueryRequest{"log", fixture::kFig2Query, std::nullopt});
    e->query(QueryRequest{"log", "best pasta recipe", std::nullopt});
    const auto text = e->export_session_log("log");
    CHECK(text == e->export_session_log("log"));
    CHECK(text.back() == '\n');
    std::istringstream in(text);
    std::vector<json> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(json::parse(line));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0]["text"] == fixture::kFig2Query);
    CHECK(lines[0]["outcome"] == "answered");
    REQUIRE(r1.compiled_query);
    CHECK(lines[0]["compiled_query"] == *r1.compiled_query);
    CHECK(lines[0]["results"] == json::array({"Lillian Marrero Library"}));
    CHECK(lines[0]["spatial_resolution"] == "street");
    CHECK(lines[1]["outcome"] == "fallback");
    CHECK(lines[1]["fallback_reason"] == "out_of_scope");
    for (const auto& l : lines)
        for (const char* key : {"timestamp", "session_id", "text", "outcome", "fallback_reason", "cues", "compiled_query",
                                "ir_digest", "spatial_resolution", "result_count", "results", "notes", "latency_ms"})
            CHECK_MESSAGE(l.contains(key), key);
}

TEST_CASE("logs never contain client coordinates") {
    auto e = fixture::engine();
    const GeoPoint client{39.987654, -75.123456};
    for (const char* text : {"food near me", "food", "library with wifi nearby", "shelter within walking distance tonight",
                             "show me the closest one", "What about counseling?", "food near City Hall"})
        e->query(QueryRequest{"priv", text, client});
    const auto log = e->export_session_log("priv");
    static const std::regex coords(R"(39\.98765|-?75\.12345)");
    CHECK_FALSE(std::regex_search(log, coords));
    CHECK(log.find("client_location") != std::string::npos);
    CHECK(log.find("dist(l, <client>, <client>)") != std::string::npos);
}

TEST_CASE("formatting is deterministic") {
    const auto a = plan_for(fig2_ir()).to_json().dump();
    const auto b = plan_for(fig2_ir()).to_json().dump();
    CHECK(a == b);
}
