#include "dreamkg/query_understanding.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

namespace dreamkg {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_token(FollowupMarker m) noexcept {
    switch (m) {
        case FollowupMarker::None: return "none";
        case FollowupMarker::CategorySwitch: return "category_switch";
        case FollowupMarker::Selector: return "selector";
    }
    return "none";
}

std::string_view to_token(SpanKind k) noexcept {
    switch (k) {
        case SpanKind::Category: return "category";
        case SpanKind::Feature: return "feature";
        case SpanKind::Cost: return "cost";
        case SpanKind::Spatial: return "spatial";
        case SpanKind::Temporal: return "temporal";
        case SpanKind::Followup: return "followup";
    }
    return "category";
}

std::string_view to_token(FallbackReason r) noexcept {
    switch (r) {
        case FallbackReason::OutOfScope: return "out_of_scope";
        case FallbackReason::UnresolvedLocation: return "unresolved_location";
        case FallbackReason::NoCues: return "no_cues";
        case FallbackReason::UnrecognizedTemporal: return "unrecognized_temporal";
    }
    return "out_of_scope";
}

ordered_json to_json(const ExtractedCues& cues) {
    ordered_json j;
    auto services = ordered_json::array();
    for (const auto& r : cues.service_cues) services.push_back(to_json(r));
    j["service_cues"] = services;
    if (cues.spatial_cue)
        j["spatial_cue"] = ordered_json{{"text", cues.spatial_cue->text}, {"kind", to_token(cues.spatial_cue->kind)}};
    else
        j["spatial_cue"] = nullptr;
    j["temporal_cue"] = cues.temporal_cue ? ordered_json(*cues.temporal_cue) : ordered_json(nullptr);
    j["followup"] = to_token(cues.followup);
    auto spans = ordered_json::array();
    for (const auto& s : cues.matched_spans)
        spans.push_back(ordered_json{{"begin", s.begin}, {"end", s.end}, {"kind", to_token(s.kind)}, {"value", s.value}});
    j["matched_spans"] = spans;
    return j;
}

// ---------------------------------------------------------------------------
// Lexicon

namespace {

std::vector<std::string> phrase_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw LexiconError("lexicon: '" + where + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) throw LexiconError("lexicon: '" + where + "' must be an array of strings");
        auto p = ascii_lower(s.get<std::string>());
        if (p.empty()) throw LexiconError("lexicon: empty phrase in '" + where + "'");
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

Lexicon Lexicon::from_json_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw LexiconError(std::string("lexicon: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw LexiconError("lexicon: top level must be an object");
    Lexicon lex;
    for (const auto& [key, value] : doc.items()) {
        if (key == "categories") {
            for (const auto& [name, list] : value.items()) {
                auto cat = category_from_token(name);
                if (!cat) throw LexiconError("lexicon: unknown category '" + name + "'");
                lex.categories[*cat] = phrase_list(list, "categories." + name);
            }
        } else if (key == "features") {
            for (const auto& [tag, list] : value.items()) {
                if (!is_feature_tag(tag)) throw LexiconError("lexicon: feature tag '" + tag + "' is not snake_case");
                lex.features[tag] = phrase_list(list, "features." + tag);
            }
        } else if (key == "costs") {
            for (const auto& [name, list] : value.items()) {
                auto cost = cost_from_token(name);
                if (!cost) throw LexiconError("lexicon: unknown cost '" + name + "'");
                lex.costs[*cost] = phrase_list(list, "costs." + name);
            }
        } else if (key == "followups") {
            for (const auto& [name, list] : value.items()) {
                if (name == "category_switch")
                    lex.category_switch = phrase_list(list, "followups.category_switch");
                else if (name == "selector")
                    lex.selector = phrase_list(list, "followups.selector");
                else
                    throw LexiconError("lexicon: unknown follow-up kind '" + name + "'");
            }
        } else if (key == "ignored_places") {
            lex.ignored_places = phrase_list(value, "ignored_places");
            for (auto& p : lex.ignored_places) p = normalize_place_text(p);
        } else {
            throw LexiconError("lexicon: unknown field '" + key + "'");
        }
    }
    return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LexiconError("cannot open lexicon file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// All word-bounded occurrences of `needle` in `hay` (both lowercase).
std::vector<std::size_t> find_all(const std::string& hay, const std::string& needle) {
    std::vector<std::size_t> out;
    if (needle.empty()) return out;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
        const bool left = pos == 0 || !is_word_char(hay[pos - 1]) || !is_word_char(needle.front());
        const auto end = pos + needle.size();
        const bool right = end >= hay.size() || !is_word_char(hay[end]) || !is_word_char(needle.back());
        if (left && right) out.push_back(pos);
    }
    return out;
}

struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool overlaps(const Range& o) const { return begin < o.end && o.begin < end; }
};

bool overlaps_any(const Range& r, const std::vector<Range>& taken) {
    return std::any_of(taken.begin(), taken.end(), [&](const Range& t) { return r.overlaps(t); });
}

const std::vector<std::string>& proximity_phrases() {
    static const std::vector<std::string> list{
        "within walking distance", "walking distance", "closest to me", "close to me", "near me",
        "around me", "near here", "around here", "close by", "nearby"};
    return list;
}

struct SpatialCandidate {
    Range range;
    SpatialCue cue;
    int rank = 0;  // lower is more specific
};

std::string_view street_suffixes() {
    return "avenue|ave|street|st|boulevard|blvd|road|rd|drive|dr|lane|ln|parkway|pkwy|pike";
}

}  // namespace

RuleBasedExtractor::RuleBasedExtractor(Lexicon lexicon, const Gazetteer& gazetteer)
    : lexicon_(std::move(lexicon)) {
    std::map<std::string, Phrase> merged;
    for (const auto& [cat, list] : lexicon_.categories)
        for (const auto& p : list) {
            auto& ph = merged[p];
            ph.text = p;
            if (ph.category && *ph.category != cat)
                throw LexiconError("lexicon: phrase '" + p + "' maps to two categories");
            ph.category = cat;
        }
    for (const auto& [tag, list] : lexicon_.features)
        for (const auto& p : list) {
            auto& ph = merged[p];
            ph.text = p;
            if (ph.feature && *ph.feature != tag)
                throw LexiconError("lexicon: phrase '" + p + "' maps to two features");
            ph.feature = tag;
        }
    for (const auto& [cost, list] : lexicon_.costs)
        for (const auto& p : list) {
            auto& ph = merged[p];
            ph.text = p;
            ph.cost = cost;
        }
    for (auto& [text, ph] : merged) phrases_.push_back(std::move(ph));
    std::stable_sort(phrases_.begin(), phrases_.end(),
                     [](const Phrase& a, const Phrase& b) { return a.text.size() > b.text.size(); });

    for (const auto& [name, entry] : gazetteer.names()) {
        if (entry->kind == PlaceKind::Zip) continue;
        place_names_.emplace_back(name, entry->kind);
    }
    std::stable_sort(place_names_.begin(), place_names_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
}

ExtractedCues RuleBasedExtractor::extract(std::string_view text) const {
    ExtractedCues cues;
    const std::string original(text);
    const std::string lower = ascii_lower(text);
    auto slice = [&](const Range& r) { return original.substr(r.begin, r.end - r.begin); };
    auto is_ignored = [&](const std::string& place) {
        const auto norm = normalize_place_text(place);
        return std::find(lexicon_.ignored_places.begin(), lexicon_.ignored_places.end(), norm) !=
               lexicon_.ignored_places.end();
    };

    // Temporal fragments first; nothing else may claim their bytes.
    std::vector<Range> temporal_ranges;
    std::string temporal_text;
    for (const auto& f : scan_temporal(original)) {
        Range r{f.begin, f.end};
        temporal_ranges.push_back(r);
        if (!temporal_text.empty()) temporal_text += ' ';
        temporal_text += slice(r);
        cues.matched_spans.push_back(MatchedSpan{r.begin, r.end, SpanKind::Temporal, ascii_lower(slice(r))});
    }
    if (!temporal_text.empty()) cues.temporal_cue = temporal_text;

    // Gazetteer place names.
    std::vector<SpatialCandidate> spatial;
    std::vector<Range> place_ranges;
    for (const auto& [name, kind] : place_names_) {
        if (is_ignored(name)) continue;
        for (auto pos : find_all(lower, name)) {
            Range r{pos, pos + name.size()};
            if (overlaps_any(r, place_ranges) || overlaps_any(r, temporal_ranges)) continue;
            place_ranges.push_back(r);
            const auto cue_kind = kind == PlaceKind::Street ? CueKind::Street : CueKind::Place;
            spatial.push_back({r, SpatialCue{slice(r), cue_kind}, 2});
        }
    }

    // Lexicon phrases, longest first, never inside a place name.
    struct Hit {
        Range range;
        const Phrase* phrase;
    };
    std::vector<Hit> hits;
    std::vector<Range> lexicon_ranges;
    for (const auto& ph : phrases_) {
        for (auto pos : find_all(lower, ph.text)) {
            Range r{pos, pos + ph.text.size()};
            if (overlaps_any(r, lexicon_ranges) || overlaps_any(r, place_ranges) ||
                overlaps_any(r, temporal_ranges))
                continue;
            lexicon_ranges.push_back(r);
            hits.push_back({r, &ph});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.range.begin < b.range.begin; });

    // Assemble service requests: a feature or cost attaches to the request in focus.
    std::vector<ServiceRequest>& requests = cues.service_cues;
    std::optional<std::size_t> current;
    std::set<std::string> pending_features;
    std::optional<Cost> pending_cost;
    auto focus = [&](Category cat) {
        auto it = std::find_if(requests.begin(), requests.end(),
                               [&](const ServiceRequest& r) { return r.category == cat; });
        if (it == requests.end()) {
            requests.push_back(ServiceRequest{cat, {}, std::nullopt});
            it = std::prev(requests.end());
        }
        current = static_cast<std::size_t>(it - requests.begin());
        auto& req = requests[*current];
        req.features.insert(pending_features.begin(), pending_features.end());
        pending_features.clear();
        if (pending_cost && !req.cost) req.cost = pending_cost;
        pending_cost.reset();
    };
    for (const auto& hit : hits) {
        const auto& ph = *hit.phrase;
        if (ph.category && !ph.feature) {
            focus(*ph.category);
        } else if (ph.category && ph.feature) {
            if (!current || requests[*current].category != *ph.category) focus(*ph.category);
            requests[*current].features.insert(*ph.feature);
        } else if (ph.feature) {
            if (current)
                requests[*current].features.insert(*ph.feature);
            else
                pending_features.insert(*ph.feature);
        }
        if (ph.cost) {
            if (current) {
                if (!requests[*current].cost) requests[*current].cost = ph.cost;
            } else if (!pending_cost) {
                pending_cost = ph.cost;
            }
        }
        if (ph.category)
            cues.matched_spans.push_back(MatchedSpan{hit.range.begin, hit.range.end, SpanKind::Category,
                                                     std::string(to_token(*ph.category))});
        if (ph.feature)
            cues.matched_spans.push_back(
                MatchedSpan{hit.range.begin, hit.range.end, SpanKind::Feature, *ph.feature});
        if (ph.cost)
            cues.matched_spans.push_back(MatchedSpan{hit.range.begin, hit.range.end, SpanKind::Cost,
                                                     std::string(to_token(*ph.cost))});
    }
    if (!requests.empty()) {
        auto& last = requests.back();
        last.features.insert(pending_features.begin(), pending_features.end());
        if (pending_cost && !last.cost) last.cost = pending_cost;
    }

    // Pattern-based spatial cues.
    std::vector<Range> blocked = temporal_ranges;
    blocked.insert(blocked.end(), lexicon_ranges.begin(), lexicon_ranges.end());
    blocked.insert(blocked.end(), place_ranges.begin(), place_ranges.end());
    auto add_pattern = [&](const std::regex& re, const std::string& subject, int group, CueKind kind, int rank) {
        for (auto it = std::sregex_iterator(subject.begin(), subject.end(), re); it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            Range r{static_cast<std::size_t>(m.position(group)),
                    static_cast<std::size_t>(m.position(group) + m.length(group))};
            if (overlaps_any(r, blocked)) continue;
            if (kind == CueKind::Place && is_ignored(slice(r))) continue;
            spatial.push_back({r, SpatialCue{slice(r), kind}, rank});
            blocked.push_back(r);
        }
    };
    const std::string suffix(street_suffixes());
    static const std::regex zip_re(R"(\b(\d{5})\b)");
    static const std::regex address_re(R"(\b(\d{1,4} (?:[a-z0-9]+ ){1,4}(?:)" + suffix + R"())\b)");
    static const std::regex street_re(R"(\b(?:on|along|off) ((?:[a-z]+ ){1,3}(?:)" + suffix + R"())\b)");
    static const std::regex place_re(
        R"(\b(?:near|around|close to|in|at|by) ((?:[A-Z][A-Za-z'.-]*)(?: [A-Z][A-Za-z'.-]*){0,3}))");
    add_pattern(address_re, lower, 1, CueKind::StreetAddress, 0);
    add_pattern(zip_re, lower, 1, CueKind::Zip, 1);
    add_pattern(street_re, lower, 1, CueKind::Street, 3);
    add_pattern(place_re, original, 1, CueKind::Place, 4);
    for (const auto& p : proximity_phrases()) {
        for (auto pos : find_all(lower, p)) {
            Range r{pos, pos + p.size()};
            if (overlaps_any(r, blocked)) continue;
            blocked.push_back(r);
            spatial.push_back({r, SpatialCue{slice(r), CueKind::Proximity}, 5});
        }
    }
    if (!spatial.empty()) {
        const auto best = std::min_element(spatial.begin(), spatial.end(), [](const auto& a, const auto& b) {
            return std::tie(a.rank, a.range.begin) < std::tie(b.rank, b.range.begin);
        });
        cues.spatial_cue = best->cue;
        cues.matched_spans.push_back(MatchedSpan{best->range.begin, best->range.end, SpanKind::Spatial,
                                                 std::string(to_token(best->cue.kind))});
    }

    // Follow-up markers.
    auto first_match = [&](const std::vector<std::string>& list) -> std::optional<Range> {
        std::optional<Range> best;
        for (const auto& p : list)
            for (auto pos : find_all(lower, p))
                if (!best || pos < best->begin) best = Range{pos, pos + p.size()};
        return best;
    };
    const auto switch_hit = first_match(lexicon_.category_switch);
    const auto selector_hit = first_match(lexicon_.selector);
    if (switch_hit && !requests.empty()) {
        cues.followup = FollowupMarker::CategorySwitch;
        cues.matched_spans.push_back(MatchedSpan{switch_hit->begin, switch_hit->end, SpanKind::Followup,
                                                 std::string(to_token(cues.followup))});
    } else if (selector_hit) {
        cues.followup = FollowupMarker::Selector;
        cues.matched_spans.push_back(MatchedSpan{selector_hit->begin, selector_hit->end, SpanKind::Followup,
                                                 std::string(to_token(cues.followup))});
    }

    std::stable_sort(cues.matched_spans.begin(), cues.matched_spans.end(),
                     [](const MatchedSpan& a, const MatchedSpan& b) { return a.begin < b.begin; });
    return cues;
}

Relevance classify_relevance(const ExtractedCues& cues, std::string_view /*text*/) {
    return cues.service_cues.empty() ? Relevance::OutOfScope : Relevance::InScope;
}

Fallback make_fallback(FallbackReason reason, std::string_view detail) {
    std::string msg;
    switch (reason) {
        case FallbackReason::OutOfScope:
            msg = "I can help you find " + std::string(kSupportedDomains) +
                  " in Philadelphia. What are you looking for, where, and when?";
            break;
        case FallbackReason::UnresolvedLocation:
            msg = "I couldn't find the place \"" + std::string(detail) +
                  "\". Try a ZIP code, a street name, a neighborhood, or a landmark such as City Hall.";
            break;
        case FallbackReason::UnrecognizedTemporal:
            msg = "I couldn't understand the time \"" + std::string(detail) +
                  "\". Try phrases like \"open now\", \"after 6pm\", or \"on Tuesdays\".";
            break;
        case FallbackReason::NoCues:
            msg = "I don't have an earlier answer to build on. Please ask a full question, for example "
                  "\"Where can I get food near City Hall?\"";
            break;
    }
    return Fallback{reason, std::move(msg)};
}

Normalized normalize(const ExtractedCues& cues, const RawQuery& raw, const Gazetteer& gaz,
                     const NormalizeOptions& options) {
    Normalized out{Fallback{}, {}};
    if (classify_relevance(cues, raw.text) == Relevance::OutOfScope) {
        out.outcome = make_fallback(FallbackReason::OutOfScope);
        return out;
    }

    QueryIR ir;
    ir.requests = cues.service_cues;
    ir.limit = options.limit;

    if (cues.temporal_cue) {
        try {
            ir.temporal = resolve_now(*cues.temporal_cue, raw.clock, options.day_parts);
        } catch (const UnrecognizedTemporalCue&) {
            out.outcome = make_fallback(FallbackReason::UnrecognizedTemporal, *cues.temporal_cue);
            return out;
        }
    }

    if (cues.spatial_cue) {
        auto resolved = resolve_anchor(*cues.spatial_cue, raw.client_location, gaz);
        if (auto* anchor = std::get_if<SpatialAnchor>(&resolved)) {
            ir.spatial = SpatialFilter{*anchor, options.radius_m};
        } else {
            const auto& why = std::get<Unresolved>(resolved);
            if (why.reason == UnresolvedReason::UnknownPlace) {
                out.outcome = make_fallback(FallbackReason::UnresolvedLocation, cues.spatial_cue->text);
                return out;
            }
            out.notes.push_back("proximity cue '" + cues.spatial_cue->text +
                                "' ignored: no client location; results are not ranked by distance");
        }
    } else if (raw.client_location && is_valid(*raw.client_location)) {
        ir.spatial = SpatialFilter{SpatialAnchor{*raw.client_location, "your location", AnchorResolution::ClientLocation},
                                   options.radius_m};
    }
    out.outcome = std::move(ir);
    return out;
}

}  // namespace dreamkg
