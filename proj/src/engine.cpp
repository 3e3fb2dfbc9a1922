#include "dreamkg/engine.hpp"

#include <chrono>
#include <fstream>
#include <regex>
#include <sstream>

#include "dreamkg/digest.hpp"
#include "dreamkg/query_language.hpp"

namespace dreamkg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Client coordinates never reach the log: the dist() point of a client-anchored
/// query is replaced by a placeholder.
std::string redact_for_log(const std::string& compiled, const QueryIR& ir) {
    if (!ir.spatial || ir.spatial->anchor.resolution != AnchorResolution::ClientLocation) return compiled;
    static const std::regex dist_re(R"(dist\(l, [^,]+, [^)]+\))");
    return std::regex_replace(compiled, dist_re, "dist(l, <client>, <client>)");
}

}  // namespace

Timestamp SystemClock::now() const {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

ClockContext SystemClock::context() const { return clock_from_utc(std::chrono::system_clock::now()); }

std::optional<std::chrono::sys_seconds> instant_from_iso8601(std::string_view text) {
    using namespace std::chrono;
    static const std::regex re(
        R"(^(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?$)");
    std::string s(text);
    std::smatch m;
    if (!std::regex_match(s, m, re) || !clock_from_iso8601(text)) return std::nullopt;
    const year_month_day ymd{year{std::stoi(m[1].str())}, month{static_cast<unsigned>(std::stoi(m[2].str()))},
                             day{static_cast<unsigned>(std::stoi(m[3].str()))}};
    sys_seconds stamp = sys_days{ymd} + hours{std::stoi(m[4].str())} + minutes{std::stoi(m[5].str())} +
                        seconds{m[6].matched ? std::stoi(m[6].str()) : 0};
    if (m[7].matched) {
        const auto zone = m[7].str();
        if (zone == "Z") return stamp;
        const int sign = zone[0] == '-' ? -1 : 1;
        std::string digits;
        for (char c : zone.substr(1))
            if (c != ':') digits.push_back(c);
        const int off = std::stoi(digits.substr(0, 2)) * 60 + std::stoi(digits.substr(2, 2));
        return stamp - minutes{sign * off};
    }
    // Local New York time: pick the UTC offset that maps back onto the same wall time.
    for (int off : {4, 5}) {
        const auto utc = stamp + hours{off};
        if (new_york_local(utc) == stamp) return utc;
    }
    return stamp + hours{5};
}

std::unique_ptr<FixedClock> FixedClock::from_iso8601(std::string_view text) {
    auto ctx = clock_from_iso8601(text);
    auto instant = instant_from_iso8601(text);
    if (!ctx || !instant) return nullptr;
    return std::make_unique<FixedClock>(*ctx, std::chrono::time_point_cast<std::chrono::milliseconds>(*instant));
}

QueryRequest QueryRequest::from_json(const json& body) {
    if (!body.is_object()) throw InvalidRequest("request body must be a JSON object");
    QueryRequest req;
    const auto text = body.find("text");
    if (text == body.end() || !text->is_string()) throw InvalidRequest("'text' is required and must be a string");
    req.text = text->get<std::string>();
    if (req.text.size() > kMaxQueryChars)
        throw InvalidRequest("'text' exceeds " + std::to_string(kMaxQueryChars) + " characters");
    const auto sid = body.find("session_id");
    if (sid == body.end() || !sid->is_string() || sid->get<std::string>().empty())
        throw InvalidRequest("'session_id' is required and must be a nonempty string");
    req.session_id = sid->get<std::string>();
    if (auto loc = body.find("client_location"); loc != body.end() && !loc->is_null()) {
        if (!loc->is_object() || !loc->contains("lat") || !loc->contains("lon") || !(*loc)["lat"].is_number() ||
            !(*loc)["lon"].is_number())
            throw InvalidRequest("'client_location' must be {lat, lon}");
        GeoPoint p{(*loc)["lat"].get<double>(), (*loc)["lon"].get<double>()};
        if (!is_valid(p)) throw InvalidRequest("'client_location' is out of range");
        req.client_location = p;
    }
    return req;
}

ordered_json QueryResponse::to_json() const {
    ordered_json j;
    j["kind"] = kind == Kind::Answer ? "answer" : "fallback";
    j["session_id"] = session_id;
    j["stop_plan"] = stop_plan ? stop_plan->to_json() : ordered_json(nullptr);
    j["fallback"] = fallback ? ordered_json{{"reason", to_token(fallback->reason)},
                                            {"user_message", fallback->user_message}}
                             : ordered_json(nullptr);
    j["compiled_query"] = compiled_query ? ordered_json(*compiled_query) : ordered_json(nullptr);
    auto markers = ordered_json::array();
    for (const auto& m : map_markers)
        markers.push_back(ordered_json{{"label", m.label},
                                       {"lat", m.point.lat},
                                       {"lon", m.point.lon},
                                       {"distance_mi", m.distance_mi ? ordered_json(*m.distance_mi) : ordered_json(nullptr)},
                                       {"stop_index", m.stop_index}});
    j["map_markers"] = markers;
    j["summary"] = summary;
    j["notes"] = notes;
    j["latency_ms"] = latency_ms;
    return j;
}

Engine::Engine(Graph graph, Gazetteer gazetteer, Lexicon lexicon, DataDigests digests, EngineOptions options,
               std::shared_ptr<const ClockSource> clock)
    : graph_(std::move(graph)),
      gazetteer_(std::move(gazetteer)),
      digests_(std::move(digests)),
      options_(options),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      sessions_(options.session_ttl) {
    extractor_ = std::make_unique<RuleBasedExtractor>(std::move(lexicon), gazetteer_);
}

std::unique_ptr<Engine> Engine::from_files(const EnginePaths& paths, EngineOptions options,
                                           std::shared_ptr<const ClockSource> clock) {
    const auto dataset_text = read_file(paths.dataset);
    const auto gazetteer_text = read_file(paths.gazetteer);
    const auto lexicon_text = read_file(paths.lexicon);
    DataDigests digests{sha256_hex(dataset_text), sha256_hex(gazetteer_text), sha256_hex(lexicon_text)};
    return std::make_unique<Engine>(load_dataset_json(dataset_text), Gazetteer::from_json_text(gazetteer_text),
                                    Lexicon::from_json_text(lexicon_text), std::move(digests), options,
                                    std::move(clock));
}

NormalizeOptions Engine::normalize_options() const {
    return NormalizeOptions{miles_to_meters(options_.radius_miles), options_.limit, options_.day_parts};
}

QueryResponse Engine::query(const QueryRequest& request) {
    const auto started = std::chrono::steady_clock::now();
    const auto now = clock_->now();
    const auto ctx = clock_->context();
    sessions_.touch_and_evict(now);

    const auto cues = extractor_->extract(request.text);
    const RawQuery raw{request.text, request.session_id, request.client_location, ctx};

    QueryResponse response;
    response.session_id = request.session_id;

    sessions_.with_session(request.session_id, now, [&](Session& session) {
        auto normalized = normalize(cues, raw, gazetteer_, normalize_options());
        response.notes = normalized.notes;
        auto outcome = resolve_followup(session, cues, std::move(normalized.outcome));

        Turn turn;
        turn.timestamp = now;
        turn.session_id = request.session_id;
        turn.text = request.text;
        turn.cues = to_json(cues);
        turn.notes = normalized.notes;

        if (auto* ir = std::get_if<QueryIR>(&outcome)) {
            const auto compiled = compile(*ir);
            const auto results = execute_compiled(compiled, graph_);
            auto plan = format_cards(results, *ir, ctx);
            if (plan.message) {
                const auto why = explain_no_results(*ir, results, graph_);
                if (!why.empty()) plan.message = *plan.message + " " + why;
            }
            for (const auto& stop : plan.stops)
                for (const auto& card : stop.cards)
                    response.map_markers.push_back(MapMarker{card.org_name, card.point, card.distance_mi, stop.index});
            response.kind = QueryResponse::Kind::Answer;
            response.compiled_query = compiled.text;
            response.summary = summarize(plan);
            response.stop_plan = std::move(plan);

            turn.compiled_query = redact_for_log(compiled.text, *ir);
            turn.ir_digest = compiled.source_ir_digest;
            if (ir->spatial) turn.spatial_resolution = std::string(to_token(ir->spatial->anchor.resolution));
            for (const auto& rows : results.per_request)
                for (const auto& row : rows) turn.result_orgs.push_back(row.org->name);

            session.last_ir = *ir;
            session.last_results = results;
        } else {
            const auto& fb = std::get<Fallback>(outcome);
            response.kind = QueryResponse::Kind::Fallback;
            response.fallback = fb;
            response.summary = fb.user_message;
            turn.fallback = fb.reason;
        }

        response.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        turn.latency_ms = response.latency_ms;
        session.turns.push_back(std::move(turn));
    });

    ++queries_;
    if (response.kind == QueryResponse::Kind::Answer) {
        ++answered_;
    } else {
        std::lock_guard lock(fallback_mutex_);
        ++fallbacks_[std::string(to_token(response.fallback->reason))];
    }
    return response;
}

std::string Engine::export_session_log(const std::string& session_id) const {
    return sessions_.inspect(session_id, [](const Session& s) { return export_log(s); });
}

ordered_json Engine::health() const {
    return ordered_json{{"status", "ok"},
                        {"build", kBuildVersion},
                        {"timezone", kTimezone},
                        {"dataset_digest", digests_.dataset},
                        {"gazetteer_digest", digests_.gazetteer},
                        {"lexicon_digest", digests_.lexicon}};
}

ordered_json Engine::stats() const {
    ordered_json nodes;
    for (auto k : {NodeKind::Organization, NodeKind::Location, NodeKind::Service, NodeKind::Hours})
        nodes[std::string(to_token(k))] = graph_.count(k);
    ordered_json fallbacks = ordered_json::object();
    {
        std::lock_guard lock(fallback_mutex_);
        for (const auto& [reason, n] : fallbacks_) fallbacks[reason] = n;
    }
    return ordered_json{{"nodes", nodes},
                        {"edges", graph_.edge_count()},
                        {"gazetteer_entries", gazetteer_.size()},
                        {"sessions", sessions_.size()},
                        {"queries", ordered_json{{"total", queries_.load()},
                                                 {"answered", answered_.load()},
                                                 {"fallback", fallbacks}}}};
}

}  // namespace dreamkg
