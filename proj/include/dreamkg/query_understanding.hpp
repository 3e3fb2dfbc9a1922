#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dreamkg/geo.hpp"
#include "dreamkg/query_ir.hpp"
#include "dreamkg/temporal.hpp"

namespace dreamkg {

inline constexpr std::size_t kMaxQueryChars = 2000;

struct RawQuery {
    std::string text;
    std::string session_id;
    std::optional<GeoPoint> client_location;
    ClockContext clock;
};

enum class FollowupMarker { None, CategorySwitch, Selector };

std::string_view to_token(FollowupMarker m) noexcept;

enum class SpanKind { Category, Feature, Cost, Spatial, Temporal, Followup };

std::string_view to_token(SpanKind k) noexcept;

struct MatchedSpan {
    std::size_t begin = 0;  // byte offsets into the utterance
    std::size_t end = 0;
    SpanKind kind = SpanKind::Category;
    std::string value;  // what the span was read as, e.g. "library" or "wifi"

    bool operator==(const MatchedSpan&) const = default;
};

struct ExtractedCues {
    std::vector<ServiceRequest> service_cues;
    std::optional<SpatialCue> spatial_cue;
    std::optional<std::string> temporal_cue;
    FollowupMarker followup = FollowupMarker::None;
    std::vector<MatchedSpan> matched_spans;

    bool operator==(const ExtractedCues&) const = default;
};

nlohmann::ordered_json to_json(const ExtractedCues& cues);

class LexiconError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vocabulary data. Every phrase is stored lowercased.
struct Lexicon {
    std::map<Category, std::vector<std::string>> categories;
    std::map<std::string, std::vector<std::string>> features;
    std::map<Cost, std::vector<std::string>> costs;
    std::vector<std::string> category_switch;
    std::vector<std::string> selector;
    /// Place names that never act as a spatial cue on their own ("philadelphia").
    std::vector<std::string> ignored_places;

    static Lexicon load(const std::filesystem::path& path);
    static Lexicon from_json_text(std::string_view text);
};

/// Stage-one cue extraction. Implementations must be deterministic.
class CueExtractor {
public:
    virtual ~CueExtractor() = default;
    virtual ExtractedCues extract(std::string_view text) const = 0;
};

/// Case-insensitive lexicon and pattern matching.
class RuleBasedExtractor final : public CueExtractor {
public:
    RuleBasedExtractor(Lexicon lexicon, const Gazetteer& gazetteer);

    ExtractedCues extract(std::string_view text) const override;

    const Lexicon& lexicon() const noexcept { return lexicon_; }

private:
    struct Phrase {
        std::string text;
        std::optional<Category> category;
        std::optional<std::string> feature;
        std::optional<Cost> cost;
    };

    Lexicon lexicon_;
    std::vector<Phrase> phrases_;  // longest first
    std::vector<std::pair<std::string, PlaceKind>> place_names_;  // longest first
};

enum class Relevance { InScope, OutOfScope };

Relevance classify_relevance(const ExtractedCues& cues, std::string_view text);

enum class FallbackReason { OutOfScope, UnresolvedLocation, NoCues, UnrecognizedTemporal };

std::string_view to_token(FallbackReason r) noexcept;

struct Fallback {
    FallbackReason reason = FallbackReason::OutOfScope;
    std::string user_message;

    bool operator==(const Fallback&) const = default;
};

/// The five supported domains as listed on the welcome screen.
inline constexpr std::string_view kSupportedDomains =
    "Food Banks, Mental Health Services, Shelters, Public Libraries, and Social Security offices";

Fallback make_fallback(FallbackReason reason, std::string_view detail = {});

struct NormalizeOptions {
    double radius_m = miles_to_meters(kDefaultRadiusMiles);
    int limit = kDefaultLimit;
    DayParts day_parts;
};

struct Normalized {
    std::variant<QueryIR, Fallback> outcome;
    std::vector<std::string> notes;  // decisions worth logging, e.g. a dropped proximity cue
};

Normalized normalize(const ExtractedCues& cues, const RawQuery& raw, const Gazetteer& gaz,
                     const NormalizeOptions& options = {});

}  // namespace dreamkg
