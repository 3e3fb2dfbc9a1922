#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace dreamkg {

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool operator==(const GeoPoint&) const = default;
};

bool is_valid(const GeoPoint& p) noexcept;

inline constexpr double kEarthRadiusMeters = 6'371'000.0;
inline constexpr double kMetersPerMile = 1609.344;

/// Great-circle distance on a sphere of mean Earth radius.
double haversine_m(const GeoPoint& a, const GeoPoint& b) noexcept;

constexpr double meters_to_miles(double meters) noexcept { return meters / kMetersPerMile; }
constexpr double miles_to_meters(double miles) noexcept { return miles * kMetersPerMile; }

enum class PlaceKind { Zip, Neighborhood, Street, Landmark };

std::string_view to_token(PlaceKind k) noexcept;
std::optional<PlaceKind> place_kind_from_token(std::string_view token) noexcept;

struct GazetteerEntry {
    std::string key;  // normalized
    PlaceKind kind = PlaceKind::Landmark;
    GeoPoint point;
    std::vector<std::string> aliases;  // normalized
};

class GazetteerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lowercases, folds punctuation to spaces and collapses runs of whitespace.
std::string normalize_place_text(std::string_view text);

/// Offline place lookup. Immutable after construction.
class Gazetteer {
public:
    Gazetteer() = default;
    /// Throws GazetteerError on invalid points, unknown kinds or key/alias collisions.
    explicit Gazetteer(std::vector<GazetteerEntry> entries);

    static Gazetteer load(const std::filesystem::path& path);
    static Gazetteer from_json_text(std::string_view text);

    /// Exact key match first, then alias match. Input is normalized first.
    const GazetteerEntry* find(std::string_view text) const;

    /// Every key and alias with the entry it names; used for phrase spotting.
    std::vector<std::pair<std::string, const GazetteerEntry*>> names() const;

    const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::vector<GazetteerEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_key_;
    std::unordered_map<std::string, std::size_t> by_alias_;
};

enum class AnchorResolution { Zip, Neighborhood, Street, Landmark, ClientLocation };

std::string_view to_token(AnchorResolution r) noexcept;
std::optional<AnchorResolution> anchor_resolution_from_token(std::string_view token) noexcept;

struct SpatialAnchor {
    GeoPoint point;
    std::string label;
    AnchorResolution resolution = AnchorResolution::Landmark;

    bool operator==(const SpatialAnchor&) const = default;
};

/// What the extractor believes a spatial cue is. Resolution still checks the text.
enum class CueKind { Zip, Proximity, Street, StreetAddress, Place };

std::string_view to_token(CueKind k) noexcept;

struct SpatialCue {
    std::string text;
    CueKind kind = CueKind::Place;

    bool operator==(const SpatialCue&) const = default;
};

enum class UnresolvedReason { NoClientLocation, UnknownPlace };

std::string_view to_token(UnresolvedReason r) noexcept;

struct Unresolved {
    UnresolvedReason reason;
    std::string detail;
};

/// True for "near me", "nearby", "within walking distance" and similar.
bool is_proximity_phrase(std::string_view text);

std::variant<SpatialAnchor, Unresolved> resolve_anchor(const SpatialCue& cue,
                                                       const std::optional<GeoPoint>& client,
                                                       const Gazetteer& gaz);

/// A candidate annotated with its distance from the anchor.
template <typename T>
struct Ranked {
    T item;
    double meters = 0.0;
    double miles() const noexcept { return meters_to_miles(meters); }
};

/// Keys a candidate exposes for ranking.
struct RankKey {
    GeoPoint point;
    std::string_view name;
    std::uint64_t id = 0;
};

/// Sorts by exact distance, then name, then id. Output is a permutation of the input.
template <typename T, typename KeyFn>
std::vector<Ranked<T>> rank_by_distance(const SpatialAnchor& anchor, std::vector<T> candidates,
                                        KeyFn key_of);

/// Display rounding: one decimal mile, e.g. "0.1".
std::string format_miles(double miles);

}  // namespace dreamkg

#include "dreamkg/detail/rank_impl.hpp"
