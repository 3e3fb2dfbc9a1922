#include <doctest.h>

#include <random>

#include "dreamkg/query_understanding.hpp"
#include "fixture.hpp"

using namespace dreamkg;

namespace {

struct Setup {
    Gazetteer gaz = Gazetteer::load(fixture::path("gazetteer.json"));
    RuleBasedExtractor ex{Lexicon::load(fixture::path("lexicon.json")), gaz};
};

const Setup& setup() {
    static const Setup s;
    return s;
}

RawQuery raw(std::string text, std::optional<GeoPoint> client = std::nullopt) {
    return RawQuery{std::move(text), "s", client, ClockContext{Day::Tue, 720}};
}

Normalized run(const std::string& text, std::optional<GeoPoint> client = std::nullopt) {
    const auto& s = setup();
    return normalize(s.ex.extract(text), raw(text, client), s.gaz);
}

ServiceRequest req(Category c, std::set<std::string> f = {}, std::optional<Cost> cost = std::nullopt) {
    return ServiceRequest{c, std::move(f), cost};
}

}  // namespace

TEST_CASE("several services in one utterance") {
    const auto cues =
        setup().ex.extract("Help me find some food, a library where I can print a document, and a place to stay.");
    REQUIRE(cues.service_cues.size() == 3);
    CHECK(cues.service_cues[0] == req(Category::Food));
    CHECK(cues.service_cues[1] == req(Category::Library, {"printing"}));
    CHECK(cues.service_cues[2] == req(Category::Shelter));
    CHECK_FALSE(cues.spatial_cue);
    CHECK_FALSE(cues.temporal_cue);
}

TEST_CASE("library on West Lehigh Avenue with free Wi-Fi on Tuesdays") {
    const auto cues = setup().ex.extract(fixture::kFig2Query);
    REQUIRE(cues.service_cues.size() == 1);
    CHECK(cues.service_cues[0] == req(Category::Library, {"wifi"}, Cost::Free));
    REQUIRE(cues.spatial_cue);
    CHECK(cues.spatial_cue->text == "West Lehigh Avenue");
    REQUIRE(cues.temporal_cue);
    CHECK(*cues.temporal_cue == "on Tuesdays");

    const auto n = normalize(cues, raw(fixture::kFig2Query), setup().gaz);
    const auto* ir = std::get_if<QueryIR>(&n.outcome);
    REQUIRE(ir);
    REQUIRE(ir->spatial);
    CHECK(ir->spatial->anchor.resolution == AnchorResolution::Street);
    CHECK(ir->spatial->radius_m == doctest::Approx(8046.72));
    CHECK(ir->temporal == TemporalConstraint{OpenDuring{{Day::Tue}, 0, 1440}});
    CHECK(ir->limit == kDefaultLimit);
    CHECK(is_valid(*ir));
}

TEST_CASE("off-domain requests produce no service cues") {
    const auto cues = setup().ex.extract("How do I fix my laptop screen?");
    CHECK(cues.service_cues.empty());
    CHECK(classify_relevance(cues, "How do I fix my laptop screen?") == Relevance::OutOfScope);
    for (const char* text : {"best pasta recipe", "", "How do I fix my laptop screen?"}) {
        const auto n = run(text);
        const auto* fb = std::get_if<Fallback>(&n.outcome);
        REQUIRE_MESSAGE(fb, text);
        CHECK(fb->reason == FallbackReason::OutOfScope);
        CHECK(fb->user_message.find(kSupportedDomains) != std::string::npos);
    }
}

TEST_CASE("an unknown place is a fallback, not a silent unanchored search") {
    const auto n = run("shelters near Nowhereville 99999");
    const auto* fb = std::get_if<Fallback>(&n.outcome);
    REQUIRE(fb);
    CHECK(fb->reason == FallbackReason::UnresolvedLocation);
}

TEST_CASE("an unreadable time is a fallback") {
    ExtractedCues cues;
    cues.service_cues.push_back(req(Category::Food));
    cues.temporal_cue = "whenever the moon is full";
    const auto n = normalize(cues, raw("food whenever the moon is full"), setup().gaz);
    const auto* fb = std::get_if<Fallback>(&n.outcome);
    REQUIRE(fb);
    CHECK(fb->reason == FallbackReason::UnrecognizedTemporal);
}

TEST_CASE("proximity without a client location is dropped with a note") {
    const auto n = run("food near me");
    const auto* ir = std::get_if<QueryIR>(&n.outcome);
    REQUIRE(ir);
    CHECK_FALSE(ir->spatial);
    REQUIRE(n.notes.size() == 1);
    CHECK(n.notes[0].find("no client location") != std::string::npos);
}

TEST_CASE("proximity and no cue both anchor at the client") {
    const GeoPoint client{39.96, -75.19};
    for (const char* text : {"food near me", "food"}) {
        const auto n = run(text, client);
        const auto* ir = std::get_if<QueryIR>(&n.outcome);
        REQUIRE(ir);
        REQUIRE(ir->spatial);
        CHECK(ir->spatial->anchor.point == client);
        CHECK(ir->spatial->anchor.resolution == AnchorResolution::ClientLocation);
    }
}

TEST_CASE("an explicit place wins over the client location") {
    const auto n = run("food near City Hall", GeoPoint{39.96, -75.19});
    const auto* ir = std::get_if<QueryIR>(&n.outcome);
    REQUIRE(ir);
    REQUIRE(ir->spatial);
    CHECK(ir->spatial->anchor.resolution == AnchorResolution::Landmark);
}

TEST_CASE("spatial cue kinds") {
    const auto& ex = setup().ex;
    const auto zip = ex.extract("food bank in 19104");
    REQUIRE(zip.spatial_cue);
    CHECK(zip.spatial_cue->kind == CueKind::Zip);
    CHECK(zip.spatial_cue->text == "19104");

    const auto addr = ex.extract("library near 601 W Lehigh Ave");
    REQUIRE(addr.spatial_cue);
    CHECK(addr.spatial_cue->kind == CueKind::StreetAddress);

    const auto hood = ex.extract("shelter in Kensington");
    REQUIRE(hood.spatial_cue);
    CHECK(hood.spatial_cue->kind == CueKind::Place);

    const auto near = ex.extract("counseling near me");
    REQUIRE(near.spatial_cue);
    CHECK(near.spatial_cue->kind == CueKind::Proximity);

    CHECK_FALSE(ex.extract("food in Philadelphia").spatial_cue);
}

TEST_CASE("followup markers") {
    const auto& ex = setup().ex;
    CHECK(ex.extract("what about shelters?").followup == FollowupMarker::CategorySwitch);
    CHECK(ex.extract("show me the closest").followup == FollowupMarker::Selector);
    CHECK(ex.extract("food near City Hall").followup == FollowupMarker::None);
}

TEST_CASE("matched spans point at the text they claim and never partly overlap") {
    const std::vector<std::string> corpus{
        fixture::kFig2Query,
        "Help me find some food, a library where I can print a document, and a place to stay.",
        "Where can I refer someone to a food bank in 19104 earlier today?",
        "I need a walk-in counseling center near 30th Street Station after 6pm",
        "what about shelters with showers for families this weekend",
        "SOCIAL SECURITY OFFICE IN CENTER CITY",
        "free hot meals near Temple tonight"};
    for (const auto& text : corpus) {
        const auto cues = setup().ex.extract(text);
        CHECK_FALSE(cues.matched_spans.empty());
        std::vector<std::pair<std::size_t, std::size_t>> ranges;
        for (const auto& sp : cues.matched_spans) {
            REQUIRE(sp.begin < sp.end);
            REQUIRE(sp.end <= text.size());
            ranges.emplace_back(sp.begin, sp.end);
        }
        // A phrase read as both category and feature yields two spans over one range.
        std::sort(ranges.begin(), ranges.end());
        ranges.erase(std::unique(ranges.begin(), ranges.end()), ranges.end());
        for (std::size_t i = 1; i < ranges.size(); ++i)
            CHECK_MESSAGE(ranges[i - 1].second <= ranges[i].first, text);
        if (cues.spatial_cue) {
            bool found = false;
            for (const auto& sp : cues.matched_spans)
                found = found || (sp.kind == SpanKind::Spatial &&
                                  text.substr(sp.begin, sp.end - sp.begin).find(cues.spatial_cue->text) !=
                                      std::string::npos);
            CHECK_MESSAGE(found, text);
        }
        if (cues.temporal_cue) {
            bool found = false;
            for (const auto& sp : cues.matched_spans)
                found = found || (sp.kind == SpanKind::Temporal &&
                                  text.substr(sp.begin, sp.end - sp.begin) == *cues.temporal_cue);
            CHECK_MESSAGE(found, text);
        }
    }
}

TEST_CASE("extraction is deterministic and case-insensitive") {
    const auto& ex = setup().ex;
    const std::string text = "Is there a food pantry near City Hall open now?";
    const auto a = ex.extract(text);
    CHECK(a == ex.extract(text));
    std::string upper = text;
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const auto b = ex.extract(upper);
    CHECK(a.service_cues == b.service_cues);
    REQUIRE(b.temporal_cue);
    CHECK(resolve_now(*a.temporal_cue, {Day::Tue, 720}) == resolve_now(*b.temporal_cue, {Day::Tue, 720}));
}

TEST_CASE("normalize never yields an invalid IR") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> parts{"food",      "library",        "with wifi",    "free",       "near City Hall",
                                         "in 19104",  "in Kensington",  "after 6pm",    "on weekends", "near me",
                                         "shelter",   "counseling",     "open now",     "tonight",    "printing",
                                         "what about", "the closest one", "in Nowhere", "blah",       "SSI office"};
    std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1), len(1, 5);
    std::bernoulli_distribution has_client(0.5);
    for (int i = 0; i < 300; ++i) {
        std::string text;
        for (auto k = len(rng); k > 0; --k) text += parts[pick(rng)] + " ";
        const auto client = has_client(rng) ? std::optional<GeoPoint>(GeoPoint{39.95, -75.16}) : std::nullopt;
        const auto n = run(text, client);
        if (const auto* ir = std::get_if<QueryIR>(&n.outcome)) CHECK_MESSAGE(is_valid(*ir), text);
    }
}

TEST_CASE("lexicon rejects unknown categories and malformed files") {
    CHECK_THROWS_AS(Lexicon::from_json_text("[]"), LexiconError);
    CHECK_THROWS_AS(Lexicon::from_json_text(R"({"categories":{"bakery":["bread"]}})"), LexiconError);
    CHECK_THROWS_AS(Lexicon::from_json_text("{"), LexiconError);
}
