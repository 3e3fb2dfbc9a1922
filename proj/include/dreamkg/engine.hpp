#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dreamkg/geo.hpp"
#include "dreamkg/kg_store.hpp"
#include "dreamkg/query_understanding.hpp"
#include "dreamkg/response.hpp"
#include "dreamkg/session.hpp"

namespace dreamkg {

inline constexpr std::string_view kBuildVersion = "dreamkg-engine 0.1.0";

/// Source of "now". Production reads the system clock; tests and benchmark runs pin it.
class ClockSource {
public:
    virtual ~ClockSource() = default;
    virtual Timestamp now() const = 0;
    virtual ClockContext context() const = 0;
};

class SystemClock final : public ClockSource {
public:
    Timestamp now() const override;
    ClockContext context() const override;
};

class FixedClock final : public ClockSource {
public:
    FixedClock(ClockContext context, Timestamp instant) : context_(context), instant_(instant) {}

    /// Accepts the same forms as clock_from_iso8601. Returns nullptr on bad input.
    static std::unique_ptr<FixedClock> from_iso8601(std::string_view text);

    Timestamp now() const override { return instant_; }
    ClockContext context() const override { return context_; }

private:
    ClockContext context_;
    Timestamp instant_;
};

/// ISO 8601 to a UTC instant; strings without an offset are New York wall time.
std::optional<std::chrono::sys_seconds> instant_from_iso8601(std::string_view text);

struct EngineOptions {
    double radius_miles = kDefaultRadiusMiles;
    int limit = kDefaultLimit;
    std::chrono::milliseconds session_ttl = std::chrono::minutes{30};
    DayParts day_parts;
};

struct QueryRequest {
    std::string session_id;
    std::string text;
    std::optional<GeoPoint> client_location;

    /// Throws InvalidRequest on missing/mistyped fields or violated limits.
    static QueryRequest from_json(const nlohmann::json& body);
};

class InvalidRequest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MapMarker {
    std::string label;
    GeoPoint point;
    std::optional<std::string> distance_mi;
    int stop_index = 1;
};

struct QueryResponse {
    enum class Kind { Answer, Fallback };

    Kind kind = Kind::Fallback;
    std::string session_id;
    std::optional<StopPlan> stop_plan;
    std::optional<Fallback> fallback;
    std::optional<std::string> compiled_query;
    std::vector<MapMarker> map_markers;
    std::string summary;
    std::vector<std::string> notes;
    double latency_ms = 0.0;

    nlohmann::ordered_json to_json() const;
};

struct DataDigests {
    std::string dataset;
    std::string gazetteer;
    std::string lexicon;
};

struct EnginePaths {
    std::filesystem::path dataset;
    std::filesystem::path gazetteer;
    std::filesystem::path lexicon;
};

/// The full pipeline: extract, gate, normalize, follow-up resolution, compile, execute,
/// format, log. Safe for concurrent use.
class Engine {
public:
    Engine(Graph graph, Gazetteer gazetteer, Lexicon lexicon, DataDigests digests, EngineOptions options,
           std::shared_ptr<const ClockSource> clock);

    static std::unique_ptr<Engine> from_files(const EnginePaths& paths, EngineOptions options,
                                              std::shared_ptr<const ClockSource> clock);

    QueryResponse query(const QueryRequest& request);

    /// Throws UnknownSession.
    std::string export_session_log(const std::string& session_id) const;

    nlohmann::ordered_json health() const;
    nlohmann::ordered_json stats() const;

    const Graph& graph() const noexcept { return graph_; }
    const Gazetteer& gazetteer() const noexcept { return gazetteer_; }
    const CueExtractor& extractor() const noexcept { return *extractor_; }
    const EngineOptions& options() const noexcept { return options_; }
    const ClockSource& clock() const noexcept { return *clock_; }
    SessionStore& sessions() noexcept { return sessions_; }

    NormalizeOptions normalize_options() const;

private:
    Graph graph_;
    Gazetteer gazetteer_;
    std::unique_ptr<CueExtractor> extractor_;
    DataDigests digests_;
    EngineOptions options_;
    std::shared_ptr<const ClockSource> clock_;
    SessionStore sessions_;

    std::atomic<std::uint64_t> queries_{0};
    std::atomic<std::uint64_t> answered_{0};
    mutable std::mutex fallback_mutex_;
    std::map<std::string, std::uint64_t> fallbacks_;
};

}  // namespace dreamkg
