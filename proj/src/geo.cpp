#include "dreamkg/geo.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace dreamkg {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool is_zip_text(std::string_view s) {
    return s.size() == 5 &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string strip_prefix_words(std::string text) {
    static const std::vector<std::string> prefixes{"near ", "around ", "close to ", "by ",
                                                   "in ",   "on ",     "at ",       "the "};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : prefixes) {
            if (text.size() > p.size() && text.compare(0, p.size(), p) == 0) {
                text.erase(0, p.size());
                changed = true;
            }
        }
    }
    return text;
}

std::string expand_street_suffix(const std::string& text) {
    static const std::vector<std::pair<std::string, std::string>> suffixes{
        {"ave", "avenue"}, {"av", "avenue"}, {"st", "street"}, {"blvd", "boulevard"},
        {"rd", "road"},    {"dr", "drive"},  {"pkwy", "parkway"}};
    auto space = text.rfind(' ');
    if (space == std::string::npos) return text;
    const auto last = text.substr(space + 1);
    for (const auto& [abbr, full] : suffixes)
        if (last == abbr) return text.substr(0, space + 1) + full;
    return text;
}

std::string expand_direction(const std::string& text) {
    static const std::vector<std::pair<std::string, std::string>> dirs{
        {"n ", "north "}, {"s ", "south "}, {"e ", "east "}, {"w ", "west "}};
    for (const auto& [abbr, full] : dirs)
        if (text.rfind(abbr, 0) == 0) return full + text.substr(abbr.size());
    return text;
}

std::string strip_house_number(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == 0 || i >= text.size() || text[i] != ' ') return text;
    return text.substr(i + 1);
}

AnchorResolution resolution_for(PlaceKind k) {
    switch (k) {
        case PlaceKind::Zip: return AnchorResolution::Zip;
        case PlaceKind::Neighborhood: return AnchorResolution::Neighborhood;
        case PlaceKind::Street: return AnchorResolution::Street;
        case PlaceKind::Landmark: return AnchorResolution::Landmark;
    }
    return AnchorResolution::Landmark;
}

SpatialAnchor anchor_from(const GazetteerEntry& e) {
    return SpatialAnchor{e.point, e.key, resolution_for(e.kind)};
}

}  // namespace

bool is_valid(const GeoPoint& p) noexcept {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

std::string_view to_token(PlaceKind k) noexcept {
    switch (k) {
        case PlaceKind::Zip: return "zip";
        case PlaceKind::Neighborhood: return "neighborhood";
        case PlaceKind::Street: return "street";
        case PlaceKind::Landmark: return "landmark";
    }
    return "landmark";
}

std::optional<PlaceKind> place_kind_from_token(std::string_view token) noexcept {
    for (auto k : {PlaceKind::Zip, PlaceKind::Neighborhood, PlaceKind::Street, PlaceKind::Landmark})
        if (to_token(k) == token) return k;
    return std::nullopt;
}

std::string_view to_token(AnchorResolution r) noexcept {
    switch (r) {
        case AnchorResolution::Zip: return "zip";
        case AnchorResolution::Neighborhood: return "neighborhood";
        case AnchorResolution::Street: return "street";
        case AnchorResolution::Landmark: return "landmark";
        case AnchorResolution::ClientLocation: return "client_location";
    }
    return "landmark";
}

std::optional<AnchorResolution> anchor_resolution_from_token(std::string_view token) noexcept {
    for (auto r : {AnchorResolution::Zip, AnchorResolution::Neighborhood, AnchorResolution::Street,
                   AnchorResolution::Landmark, AnchorResolution::ClientLocation})
        if (to_token(r) == token) return r;
    return std::nullopt;
}

std::string_view to_token(CueKind k) noexcept {
    switch (k) {
        case CueKind::Zip: return "zip";
        case CueKind::Proximity: return "proximity";
        case CueKind::Street: return "street";
        case CueKind::StreetAddress: return "street_address";
        case CueKind::Place: return "place";
    }
    return "place";
}

std::string_view to_token(UnresolvedReason r) noexcept {
    return r == UnresolvedReason::NoClientLocation ? "no_client_location" : "unknown_place";
}

std::string normalize_place_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char ch : text) {
        if (std::isalnum(ch)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(ch)));
        } else if (ch == '\'') {
            // "Children's" and "childrens" name the same place
        } else {
            pending_space = true;
        }
    }
    return out;
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto& e = entries_[i];
        e.key = normalize_place_text(e.key);
        if (e.key.empty()) throw GazetteerError("gazetteer entry " + std::to_string(i) + ": empty key");
        if (!is_valid(e.point))
            throw GazetteerError("gazetteer entry '" + e.key + "': coordinates out of range");
        auto seen = [&](const std::string& name) {
            return by_key_.count(name) != 0 || by_alias_.count(name) != 0;
        };
        if (seen(e.key)) throw GazetteerError("gazetteer: duplicate name '" + e.key + "'");
        by_key_.emplace(e.key, i);
        for (auto& alias : e.aliases) {
            alias = normalize_place_text(alias);
            if (alias.empty() || seen(alias))
                throw GazetteerError("gazetteer: duplicate or empty alias '" + alias + "'");
            by_alias_.emplace(alias, i);
        }
    }
}

Gazetteer Gazetteer::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw GazetteerError(std::string("gazetteer: invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw GazetteerError("gazetteer: top level must be an array");
    std::vector<GazetteerEntry> entries;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        const auto where = "gazetteer entry " + std::to_string(i) + ": ";
        if (!rec.is_object()) throw GazetteerError(where + "not an object");
        for (const auto& [k, v] : rec.items()) {
            if (k != "key" && k != "kind" && k != "lat" && k != "lon" && k != "aliases")
                throw GazetteerError(where + "unknown field '" + k + "'");
        }
        try {
            GazetteerEntry e;
            e.key = rec.at("key").get<std::string>();
            auto kind = place_kind_from_token(rec.at("kind").get<std::string>());
            if (!kind) throw GazetteerError(where + "unknown kind");
            e.kind = *kind;
            e.point = GeoPoint{rec.at("lat").get<double>(), rec.at("lon").get<double>()};
            if (rec.contains("aliases")) e.aliases = rec.at("aliases").get<std::vector<std::string>>();
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw GazetteerError(where + ex.what());
        }
    }
    return Gazetteer(std::move(entries));
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GazetteerError("cannot open gazetteer file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

const GazetteerEntry* Gazetteer::find(std::string_view text) const {
    const auto key = normalize_place_text(text);
    if (auto it = by_key_.find(key); it != by_key_.end()) return &entries_[it->second];
    if (auto it = by_alias_.find(key); it != by_alias_.end()) return &entries_[it->second];
    return nullptr;
}

std::vector<std::pair<std::string, const GazetteerEntry*>> Gazetteer::names() const {
    std::vector<std::pair<std::string, const GazetteerEntry*>> out;
    for (const auto& e : entries_) {
        out.emplace_back(e.key, &e);
        for (const auto& a : e.aliases) out.emplace_back(a, &e);
    }
    return out;
}

bool is_proximity_phrase(std::string_view text) {
    static const std::vector<std::string> phrases{
        "me",          "near me",          "nearby",     "near by",
        "close by",    "close to me",      "around me",  "around here",
        "near here",   "walking distance", "within walking distance",
        "closest to me", "nearest"};
    const auto norm = normalize_place_text(text);
    return std::find(phrases.begin(), phrases.end(), norm) != phrases.end();
}

std::variant<SpatialAnchor, Unresolved> resolve_anchor(const SpatialCue& cue,
                                                       const std::optional<GeoPoint>& client,
                                                       const Gazetteer& gaz) {
    const auto normalized = normalize_place_text(cue.text);
    if (cue.kind == CueKind::Proximity || is_proximity_phrase(normalized)) {
        if (!client || !is_valid(*client))
            return Unresolved{UnresolvedReason::NoClientLocation, normalized};
        return SpatialAnchor{*client, "your location", AnchorResolution::ClientLocation};
    }

    const auto text = strip_prefix_words(normalized);
    if (cue.kind == CueKind::Zip || is_zip_text(text)) {
        const auto* e = gaz.find(text);
        if (e && e->kind == PlaceKind::Zip) return anchor_from(*e);
        return Unresolved{UnresolvedReason::UnknownPlace, text};
    }

    std::vector<std::string> attempts{normalized, text, expand_street_suffix(text)};
    const auto street_only = strip_house_number(text);
    if (street_only != text) {
        attempts.push_back(street_only);
        attempts.push_back(expand_street_suffix(street_only));
        attempts.push_back(expand_street_suffix(expand_direction(street_only)));
    }
    for (const auto& attempt : attempts) {
        if (const auto* e = gaz.find(attempt)) return anchor_from(*e);
    }
    return Unresolved{UnresolvedReason::UnknownPlace, text};
}

std::string format_miles(double miles) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", miles);
    return buf;
}

}  // namespace dreamkg
