#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dreamkg/engine.hpp"
#include "dreamkg/ontology.hpp"

namespace dreamkg::eval {

enum class TemporalStyle { Implicit, ExplicitClock };
enum class LocationSpec { Zip, Neighborhood, StreetAddress, AmbiguousCue };
enum class LangStyle { Interrogative, Declarative, SearchStyle, CausalReflective, CommunityOriented };

inline constexpr std::array<TemporalStyle, 2> kAllTemporalStyles{TemporalStyle::Implicit,
                                                                 TemporalStyle::ExplicitClock};
inline constexpr std::array<LocationSpec, 4> kAllLocationSpecs{LocationSpec::Zip, LocationSpec::Neighborhood,
                                                               LocationSpec::StreetAddress,
                                                               LocationSpec::AmbiguousCue};
inline constexpr std::array<LangStyle, 5> kAllLangStyles{LangStyle::Interrogative, LangStyle::Declarative,
                                                         LangStyle::SearchStyle, LangStyle::CausalReflective,
                                                         LangStyle::CommunityOriented};

std::string_view to_token(TemporalStyle s) noexcept;
std::string_view to_token(LocationSpec s) noexcept;
std::string_view to_token(LangStyle s) noexcept;

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FactorCell {
    Category category = Category::Food;
    TemporalStyle temporal = TemporalStyle::Implicit;
    LocationSpec location = LocationSpec::Zip;
    LangStyle lang = LangStyle::Interrogative;

    bool operator==(const FactorCell&) const = default;
    auto operator<=>(const FactorCell&) const = default;
};

struct BenchmarkQuery {
    std::string id;
    bool relevant = true;
    std::optional<FactorCell> cell;  // set iff relevant
    std::string topic;               // irrelevant queries only: cooking, device_support, travel
    std::string text;

    nlohmann::ordered_json to_json() const;
    static BenchmarkQuery from_json(const nlohmann::json& j);
};

inline constexpr std::size_t kRelevantCount = 200;
inline constexpr std::size_t kIrrelevantCount = 100;

/// One query per cell of the 5x2x4x5 grid followed by the out-of-scope set.
/// Slot fillers (places, times, topics) are drawn from the seeded generator.
std::vector<BenchmarkQuery> generate_benchmark(std::uint64_t seed);

/// Renders the utterance for one grid cell with explicit slot values.
std::string render_relevant(const FactorCell& cell, std::string_view place, std::string_view time);

struct TranscriptEntry {
    BenchmarkQuery query;
    std::string system;
    std::optional<nlohmann::ordered_json> response;  // QueryResponse JSON
    std::optional<std::string> error;                // transport failure

    nlohmann::ordered_json to_json() const;
    static TranscriptEntry from_json(const nlohmann::json& j);
};

/// Sends one request and returns the QueryResponse JSON. May throw on transport errors.
using QueryFn = std::function<nlohmann::ordered_json(const QueryRequest&)>;

QueryFn in_process(Engine& engine);
/// `base_url` like "http://127.0.0.1:8080".
QueryFn http_endpoint(const std::string& base_url);

/// Each query gets a fresh session. Failures are recorded per entry; the run continues.
std::vector<TranscriptEntry> run_system(const std::vector<BenchmarkQuery>& corpus, const QueryFn& send,
                                        const std::string& system_name);

/// The offline stand-in baseline: the same answers with address, phone and hours removed.
std::vector<TranscriptEntry> degrade(const std::vector<TranscriptEntry>& transcript,
                                     const std::string& system_name = "baseline");

enum class Winner { A, B, Tie };

std::string_view to_token(Winner w) noexcept;

/// What a judge may see: the utterance and two anonymized responses.
struct JudgeInput {
    std::string query_text;
    nlohmann::ordered_json response_a;
    nlohmann::ordered_json response_b;
};

/// Strips session ids, timings and anything else that could identify the producer.
nlohmann::ordered_json blind_view(const std::optional<nlohmann::ordered_json>& response);

struct CriterionScore {
    int criterion = 1;  // 1..7, highest priority first
    int a = 0;
    int b = 0;
};

struct JudgeDecision {
    Winner winner = Winner::Tie;
    std::vector<CriterionScore> trace;
};

class Judge {
public:
    virtual ~Judge() = default;
    virtual JudgeDecision judge(const JudgeInput& input) const = 0;
};

/// Deterministic lexicographic scorer over the seven criteria:
/// (1) location specificity, (2) service relevance, (3) operational detail,
/// (4) structural clarity, (5) actionability, (6) focus and conciseness,
/// (7) accuracy and plausibility. The first criterion that differs decides.
class RubricJudge final : public Judge {
public:
    JudgeDecision judge(const JudgeInput& input) const override;

    /// Scores of one response on the seven criteria.
    static std::array<int, 7> score(const nlohmann::ordered_json& blind_response);
};

/// Posts {"prompt": ...} to `url` and expects {"winner": "A"|"B"|"tie"} back.
class ExternalJudge final : public Judge {
public:
    explicit ExternalJudge(std::string url) : url_(std::move(url)) {}
    JudgeDecision judge(const JudgeInput& input) const override;

    static std::string prompt(const JudgeInput& input);

private:
    std::string url_;
};

struct Verdict {
    std::string query_id;
    bool relevant = true;
    std::optional<FactorCell> cell;
    Winner winner = Winner::Tie;
    std::vector<CriterionScore> trace;
    std::string system_a;  // unblinding, recorded after the judge ran
    std::string system_b;
    std::map<std::string, std::string> kind;        // system -> answer | fallback | error
    std::map<std::string, std::string> fallback;    // system -> reason, fallbacks only
    std::map<std::string, std::size_t> cards;       // system -> card count

    /// Name of the winning system, or empty for a tie.
    std::string winning_system() const;

    nlohmann::ordered_json to_json() const;
    static Verdict from_json(const nlohmann::json& j);
};

class MismatchedCorpora : public EvalError {
public:
    using EvalError::EvalError;
};

/// Blind pairwise comparison. Which transcript is shown as A is drawn per query from
/// `seed`. Throws MismatchedCorpora when the transcripts cover different query ids.
std::vector<Verdict> judge_pairwise(const std::vector<TranscriptEntry>& first,
                                    const std::vector<TranscriptEntry>& second, const Judge& judge,
                                    std::uint64_t seed);

struct Tally {
    std::size_t wins = 0;
    std::size_t ties = 0;
    std::size_t losses = 0;

    std::size_t total() const noexcept { return wins + ties + losses; }
    double win_rate() const noexcept { return total() ? static_cast<double>(wins) / total() : 0.0; }
};

struct Rejection {
    std::size_t out_of_scope = 0;  // fallback with reason out_of_scope
    std::size_t any_fallback = 0;
    std::size_t total = 0;
};

struct ScoreReport {
    std::vector<std::string> systems;
    std::map<std::string, Tally> relevant;           // per system, over relevant queries
    std::map<std::string, Tally> relevant_answered;  // restricted to queries it answered with >=1 card
    std::map<std::string, Rejection> rejection;      // per system, over irrelevant queries
    /// factor -> level -> system -> tally
    std::map<std::string, std::map<std::string, std::map<std::string, Tally>>> by_factor;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

ScoreReport score(const std::vector<Verdict>& verdicts);

/// JSON-lines helpers: one object per line, blank lines ignored.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::ordered_json>& rows);

}  // namespace dreamkg::eval
