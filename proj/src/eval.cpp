#include "dreamkg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <httplib.h>

namespace dreamkg::eval {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_token(TemporalStyle s) noexcept {
    return s == TemporalStyle::Implicit ? "implicit" : "explicit_clock";
}

std::string_view to_token(LocationSpec s) noexcept {
    switch (s) {
        case LocationSpec::Zip: return "zip";
        case LocationSpec::Neighborhood: return "neighborhood";
        case LocationSpec::StreetAddress: return "street_address";
        case LocationSpec::AmbiguousCue: return "ambiguous_cue";
    }
    return "zip";
}

std::string_view to_token(LangStyle s) noexcept {
    switch (s) {
        case LangStyle::Interrogative: return "interrogative";
        case LangStyle::Declarative: return "declarative";
        case LangStyle::SearchStyle: return "search_style";
        case LangStyle::CausalReflective: return "causal_reflective";
        case LangStyle::CommunityOriented: return "community_oriented";
    }
    return "interrogative";
}

std::string_view to_token(Winner w) noexcept {
    switch (w) {
        case Winner::A: return "A";
        case Winner::B: return "B";
        case Winner::Tie: return "tie";
    }
    return "tie";
}

namespace {

template <typename E, std::size_t N>
E enum_from(const std::array<E, N>& all, std::string_view token, const char* what) {
    for (auto e : all)
        if (to_token(e) == token) return e;
    throw EvalError(std::string("unknown ") + what + " '" + std::string(token) + "'");
}

Winner winner_from(std::string_view token) {
    if (token == "A") return Winner::A;
    if (token == "B") return Winner::B;
    if (token == "tie") return Winner::Tie;
    throw EvalError("unknown winner '" + std::string(token) + "'");
}

std::string_view category_phrase(Category c) {
    switch (c) {
        case Category::Food: return "food bank";
        case Category::MentalHealth: return "mental health clinic";
        case Category::Shelter: return "shelter";
        case Category::Library: return "public library";
        case Category::SocialSecurity: return "Social Security office";
    }
    return "food bank";
}

const std::vector<std::string>& place_fillers(LocationSpec spec) {
    static const std::vector<std::string> zip{"in 19104", "in 19133", "in 19124", "in 19122", "in 19102"};
    static const std::vector<std::string> hood{"in Kensington", "in University City", "in Fairhill",
                                               "in Frankford", "in Center City"};
    static const std::vector<std::string> address{"near 601 West Lehigh Avenue", "near 3535 Market Street",
                                                  "near 1300 North Broad Street", "near 4240 Frankford Avenue",
                                                  "near 3000 Kensington Avenue"};
    static const std::vector<std::string> vague{"near the train station", "downtown", "near Temple",
                                                "over in north philly"};
    switch (spec) {
        case LocationSpec::Zip: return zip;
        case LocationSpec::Neighborhood: return hood;
        case LocationSpec::StreetAddress: return address;
        case LocationSpec::AmbiguousCue: return vague;
    }
    return zip;
}

const std::vector<std::string>& time_fillers(TemporalStyle style) {
    static const std::vector<std::string> implicit{"earlier today", "tonight", "this weekend", "tomorrow",
                                                   "later today"};
    static const std::vector<std::string> clock{"at 3pm", "after 8pm", "before 10am on Tuesday",
                                                "at 9:30am on Saturday", "between 1pm and 4pm"};
    return style == TemporalStyle::Implicit ? implicit : clock;
}

struct TopicTemplates {
    std::string topic;
    std::vector<std::string> templates;  // "{}" marks the filler
    std::vector<std::string> fillers;
};

const std::vector<TopicTemplates>& irrelevant_topics() {
    static const std::vector<TopicTemplates> topics{
        {"cooking",
         {"What is the best recipe for {}?", "How long should I bake {}?", "How do I make {} from scratch?",
          "Can you suggest a spice blend for {}?", "What wine goes well with {}?"},
         {"lasagna", "banana bread", "chicken curry", "vegetable soup", "pancakes", "chili", "risotto",
          "dumplings"}},
        {"device_support",
         {"My {} will not turn on, what should I do?", "How do I reset the password on my {}?",
          "Why is my {} battery draining so fast?", "How can I update the software on my {}?",
          "Is it worth repairing a cracked {} screen?"},
         {"phone", "laptop", "tablet", "smart watch", "game console", "e-reader", "smart speaker", "camera"}},
        {"travel",
         {"What are cheap flights to {}?", "What should I pack for a week in {}?",
          "Which museums should I visit in {}?", "Do I need a visa to visit {}?",
          "What is the best time of year to go to {}?"},
         {"Lisbon", "Tokyo", "Chicago", "Montreal", "Mexico City", "Rome", "Denver", "Seoul"}},
    };
    return topics;
}

std::string fill(std::string_view pattern, std::string_view value) {
    std::string out(pattern);
    if (auto pos = out.find("{}"); pos != std::string::npos) out.replace(pos, 2, value);
    return out;
}

std::string make_id(char prefix, std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%03zu", prefix, n);
    return buf;
}

std::vector<const ordered_json*> cards_of(const ordered_json& response) {
    std::vector<const ordered_json*> out;
    if (!response.is_object()) return out;
    const auto plan = response.find("stop_plan");
    if (plan == response.end() || !plan->is_object()) return out;
    const auto stops = plan->find("stops");
    if (stops == plan->end() || !stops->is_array()) return out;
    for (const auto& stop : *stops) {
        const auto cards = stop.find("cards");
        if (cards == stop.end() || !cards->is_array()) continue;
        for (const auto& card : *cards) out.push_back(&card);
    }
    return out;
}

bool nonempty_string(const ordered_json& obj, const char* key) {
    const auto it = obj.find(key);
    return it != obj.end() && it->is_string() && !it->get<std::string>().empty();
}

std::string kind_of(const TranscriptEntry& e) {
    if (!e.response) return "error";
    return e.response->value("kind", "error");
}

}  // namespace

// ---------------------------------------------------------------------------
// Corpus

ordered_json BenchmarkQuery::to_json() const {
    ordered_json j;
    j["id"] = id;
    j["relevant"] = relevant;
    if (cell) {
        j["category"] = dreamkg::to_token(cell->category);
        j["temporal_style"] = to_token(cell->temporal);
        j["location_spec"] = to_token(cell->location);
        j["lang_style"] = to_token(cell->lang);
    } else {
        j["category"] = nullptr;
        j["temporal_style"] = nullptr;
        j["location_spec"] = nullptr;
        j["lang_style"] = nullptr;
        j["topic"] = topic;
    }
    j["text"] = text;
    return j;
}

BenchmarkQuery BenchmarkQuery::from_json(const json& j) {
    BenchmarkQuery q;
    q.id = j.at("id").get<std::string>();
    q.relevant = j.at("relevant").get<bool>();
    q.text = j.at("text").get<std::string>();
    if (q.relevant) {
        FactorCell c;
        auto cat = category_from_token(j.at("category").get<std::string>());
        if (!cat) throw EvalError("query " + q.id + ": unknown category");
        c.category = *cat;
        c.temporal = enum_from(kAllTemporalStyles, j.at("temporal_style").get<std::string>(), "temporal_style");
        c.location = enum_from(kAllLocationSpecs, j.at("location_spec").get<std::string>(), "location_spec");
        c.lang = enum_from(kAllLangStyles, j.at("lang_style").get<std::string>(), "lang_style");
        q.cell = c;
    } else {
        q.topic = j.value("topic", "");
    }
    return q;
}

std::string render_relevant(const FactorCell& cell, std::string_view place, std::string_view time) {
    const std::string what(category_phrase(cell.category));
    const std::string tail = what + " " + std::string(place) + " " + std::string(time);
    switch (cell.lang) {
        case LangStyle::Interrogative: return "Where can I refer someone to a " + tail + "?";
        case LangStyle::Declarative: return "I need to find a " + tail + ".";
        case LangStyle::SearchStyle: return tail;
        case LangStyle::CausalReflective:
            return "Since my neighbor has been struggling lately, I am trying to find a " + tail + ".";
        case LangStyle::CommunityOriented: return "Our outreach group wants to connect people with a " + tail + ".";
    }
    return tail;
}

std::vector<BenchmarkQuery> generate_benchmark(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    };

    std::vector<BenchmarkQuery> out;
    out.reserve(kRelevantCount + kIrrelevantCount);
    for (auto cat : kAllCategories)
        for (auto ts : kAllTemporalStyles)
            for (auto ls : kAllLocationSpecs)
                for (auto lang : kAllLangStyles) {
                    FactorCell cell{cat, ts, ls, lang};
                    const auto& place = pick(place_fillers(ls));
                    const auto& time = pick(time_fillers(ts));
                    out.push_back(BenchmarkQuery{make_id('r', out.size() + 1), true, cell, {},
                                                 render_relevant(cell, place, time)});
                }

    const auto& topics = irrelevant_topics();
    std::vector<std::vector<std::string>> pools;
    for (const auto& t : topics) {
        std::vector<std::string> pool;
        for (const auto& tpl : t.templates)
            for (const auto& f : t.fillers) pool.push_back(fill(tpl, f));
        std::shuffle(pool.begin(), pool.end(), rng);
        pools.push_back(std::move(pool));
    }
    for (std::size_t i = 0; i < kIrrelevantCount; ++i) {
        const auto t = i % topics.size();
        const auto& text = pools[t][i / topics.size()];
        out.push_back(BenchmarkQuery{make_id('x', i + 1), false, std::nullopt, topics[t].topic, text});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Running

ordered_json TranscriptEntry::to_json() const {
    ordered_json j;
    j["query"] = query.to_json();
    j["system"] = system;
    j["response"] = response ? *response : ordered_json(nullptr);
    j["error"] = error ? ordered_json(*error) : ordered_json(nullptr);
    return j;
}

TranscriptEntry TranscriptEntry::from_json(const json& j) {
    TranscriptEntry e;
    e.query = BenchmarkQuery::from_json(j.at("query"));
    e.system = j.at("system").get<std::string>();
    if (j.contains("response") && !j.at("response").is_null()) e.response = ordered_json(j.at("response"));
    if (j.contains("error") && !j.at("error").is_null()) e.error = j.at("error").get<std::string>();
    return e;
}

QueryFn in_process(Engine& engine) {
    return [&engine](const QueryRequest& req) { return engine.query(req).to_json(); };
}

QueryFn http_endpoint(const std::string& base_url) {
    return [base_url](const QueryRequest& req) {
        httplib::Client client(base_url);
        client.set_read_timeout(30, 0);
        const ordered_json body{{"session_id", req.session_id}, {"text", req.text}};
        auto res = client.Post("/api/query", body.dump(), "application/json");
        if (!res) throw EvalError("transport error: " + httplib::to_string(res.error()));
        if (res->status != 200) throw EvalError("HTTP " + std::to_string(res->status) + ": " + res->body);
        return ordered_json::parse(res->body);
    };
}

std::vector<TranscriptEntry> run_system(const std::vector<BenchmarkQuery>& corpus, const QueryFn& send,
                                        const std::string& system_name) {
    static std::atomic<std::uint64_t> run_counter{0};
    const auto run = ++run_counter;
    std::vector<TranscriptEntry> out;
    out.reserve(corpus.size());
    for (const auto& q : corpus) {
        TranscriptEntry e{q, system_name, std::nullopt, std::nullopt};
        QueryRequest req;
        req.session_id = "bench-" + std::to_string(run) + "-" + q.id;
        req.text = q.text;
        try {
            e.response = send(req);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<TranscriptEntry> degrade(const std::vector<TranscriptEntry>& transcript, const std::string& system_name) {
    std::vector<TranscriptEntry> out = transcript;
    for (auto& e : out) {
        e.system = system_name;
        if (!e.response) continue;
        auto& plan = (*e.response)["stop_plan"];
        if (!plan.is_object()) continue;
        for (auto& stop : plan["stops"])
            for (auto& card : stop["cards"]) {
                card["phone"] = "";
                card["address"] = "";
                card["hours_line"] = "";
                card["details"] = ordered_json{{"description", card["details"].value("description", "")},
                                               {"eligibility", ""},
                                               {"weekly_hours", ordered_json::array()}};
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Judging

ordered_json blind_view(const std::optional<ordered_json>& response) {
    if (!response) return ordered_json(nullptr);
    ordered_json v = *response;
    v.erase("session_id");
    v.erase("latency_ms");
    return v;
}

std::array<int, 7> RubricJudge::score(const ordered_json& r) {
    std::array<int, 7> s{};
    if (!r.is_object()) return s;
    const auto cards = cards_of(r);
    const bool any_distance = std::any_of(cards.begin(), cards.end(), [](const ordered_json* c) {
        return c->contains("distance_mi") && !(*c)["distance_mi"].is_null();
    });
    s[0] = cards.empty() ? 0 : (any_distance ? 2 : 1);
    if (r.contains("stop_plan") && r["stop_plan"].is_object())
        s[1] = static_cast<int>(r["stop_plan"].value("stops", ordered_json::array()).size());
    for (const auto* c : cards) {
        if (nonempty_string(*c, "address") && nonempty_string(*c, "phone") && nonempty_string(*c, "hours_line"))
            ++s[2];
        if (nonempty_string(*c, "directions_url")) ++s[4];
    }
    if (!cards.empty()) {
        bool titled = true;
        for (const auto& stop : r["stop_plan"]["stops"]) titled = titled && stop.contains("title");
        s[3] = (titled ? 1 : 0) + (nonempty_string(r, "summary") ? 1 : 0);
    }
    const auto summary_len = r.value("summary", std::string{}).size();
    s[5] = -static_cast<int>(summary_len / 200);
    const auto kind = r.value("kind", std::string{});
    if (kind == "answer" && nonempty_string(r, "compiled_query")) s[6] = 1;
    if (kind == "fallback" && r.contains("fallback") && r["fallback"].is_object() &&
        nonempty_string(r["fallback"], "user_message"))
        s[6] = 1;
    return s;
}

JudgeDecision RubricJudge::judge(const JudgeInput& input) const {
    const auto a = score(input.response_a);
    const auto b = score(input.response_b);
    JudgeDecision d;
    for (int i = 0; i < 7; ++i) {
        d.trace.push_back(CriterionScore{i + 1, a[i], b[i]});
        if (d.winner == Winner::Tie && a[i] != b[i]) d.winner = a[i] > b[i] ? Winner::A : Winner::B;
    }
    return d;
}

std::string ExternalJudge::prompt(const JudgeInput& input) {
    std::ostringstream p;
    p << "You are comparing two anonymized answers to a request for social services in Philadelphia.\n"
      << "Rank them by these criteria in priority order: (1) location specificity, (2) service relevance, "
      << "(3) operational detail such as address, phone and hours, (4) structural clarity, (5) actionability, "
      << "(6) focus and conciseness, (7) accuracy and plausibility.\n"
      << "Reply with JSON {\"winner\": \"A\" | \"B\" | \"tie\"}.\n\n"
      << "Query: " << input.query_text << "\n\n"
      << "Response A: " << input.response_a.dump() << "\n\n"
      << "Response B: " << input.response_b.dump() << "\n";
    return p.str();
}

JudgeDecision ExternalJudge::judge(const JudgeInput& input) const {
    const auto scheme_end = url_.find("://");
    const auto path_start = url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const auto host = url_.substr(0, path_start);
    const auto path = path_start == std::string::npos ? std::string("/") : url_.substr(path_start);
    httplib::Client client(host);
    client.set_read_timeout(120, 0);
    auto res = client.Post(path, ordered_json{{"prompt", prompt(input)}}.dump(), "application/json");
    if (!res) throw EvalError("judge transport error: " + httplib::to_string(res.error()));
    if (res->status != 200) throw EvalError("judge returned HTTP " + std::to_string(res->status));
    return JudgeDecision{winner_from(json::parse(res->body).at("winner").get<std::string>()), {}};
}

std::string Verdict::winning_system() const {
    switch (winner) {
        case Winner::A: return system_a;
        case Winner::B: return system_b;
        case Winner::Tie: return {};
    }
    return {};
}

ordered_json Verdict::to_json() const {
    ordered_json j;
    j["query_id"] = query_id;
    j["relevant"] = relevant;
    if (cell) {
        j["category"] = dreamkg::to_token(cell->category);
        j["temporal_style"] = to_token(cell->temporal);
        j["location_spec"] = to_token(cell->location);
        j["lang_style"] = to_token(cell->lang);
    }
    j["winner"] = to_token(winner);
    auto trace_json = ordered_json::array();
    for (const auto& c : trace) trace_json.push_back(ordered_json::array({c.criterion, c.a, c.b}));
    j["criterion_trace"] = trace_json;
    j["blinding"] = ordered_json{{"A", system_a}, {"B", system_b}};
    j["kind"] = kind;
    j["fallback"] = fallback;
    j["cards"] = cards;
    return j;
}

Verdict Verdict::from_json(const json& j) {
    Verdict v;
    v.query_id = j.at("query_id").get<std::string>();
    v.relevant = j.at("relevant").get<bool>();
    if (v.relevant && j.contains("category")) {
        FactorCell c;
        c.category = category_from_token(j.at("category").get<std::string>()).value_or(Category::Food);
        c.temporal = enum_from(kAllTemporalStyles, j.at("temporal_style").get<std::string>(), "temporal_style");
        c.location = enum_from(kAllLocationSpecs, j.at("location_spec").get<std::string>(), "location_spec");
        c.lang = enum_from(kAllLangStyles, j.at("lang_style").get<std::string>(), "lang_style");
        v.cell = c;
    }
    v.winner = winner_from(j.at("winner").get<std::string>());
    for (const auto& t : j.at("criterion_trace"))
        v.trace.push_back(CriterionScore{t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    v.system_a = j.at("blinding").at("A").get<std::string>();
    v.system_b = j.at("blinding").at("B").get<std::string>();
    v.kind = j.value("kind", std::map<std::string, std::string>{});
    v.fallback = j.value("fallback", std::map<std::string, std::string>{});
    v.cards = j.value("cards", std::map<std::string, std::size_t>{});
    return v;
}

std::vector<Verdict> judge_pairwise(const std::vector<TranscriptEntry>& first,
                                    const std::vector<TranscriptEntry>& second, const Judge& judge,
                                    std::uint64_t seed) {
    if (first.size() != second.size())
        throw MismatchedCorpora("transcripts have " + std::to_string(first.size()) + " and " +
                                std::to_string(second.size()) + " entries");
    std::map<std::string, const TranscriptEntry*> by_id;
    for (const auto& e : second) by_id[e.query.id] = &e;
    if (by_id.size() != second.size()) throw MismatchedCorpora("duplicate query id in the second transcript");
    if (!first.empty() && first.front().system == second.front().system)
        throw MismatchedCorpora("both transcripts come from system '" + first.front().system + "'");

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<Verdict> out;
    out.reserve(first.size());
    for (const auto& x : first) {
        const auto it = by_id.find(x.query.id);
        if (it == by_id.end()) throw MismatchedCorpora("query '" + x.query.id + "' missing from the second transcript");
        const auto& y = *it->second;
        if (y.query.text != x.query.text) throw MismatchedCorpora("query '" + x.query.id + "' text differs");

        const bool swap = coin(rng);
        const auto& a = swap ? y : x;
        const auto& b = swap ? x : y;
        const auto decision = judge.judge(JudgeInput{x.query.text, blind_view(a.response), blind_view(b.response)});

        Verdict v;
        v.query_id = x.query.id;
        v.relevant = x.query.relevant;
        v.cell = x.query.cell;
        v.winner = decision.winner;
        v.trace = decision.trace;
        v.system_a = a.system;
        v.system_b = b.system;
        for (const auto* e : {&x, &y}) {
            v.kind[e->system] = kind_of(*e);
            if (e->response) {
                const auto fb = e->response->find("fallback");
                if (fb != e->response->end() && fb->is_object()) v.fallback[e->system] = fb->value("reason", "");
            }
            v.cards[e->system] = e->response ? cards_of(*e->response).size() : 0;
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

ScoreReport score(const std::vector<Verdict>& verdicts) {
    ScoreReport r;
    auto note_system = [&](const std::string& s) {
        if (std::find(r.systems.begin(), r.systems.end(), s) == r.systems.end()) r.systems.push_back(s);
    };
    for (const auto& v : verdicts) {
        note_system(v.system_a);
        note_system(v.system_b);
    }
    std::sort(r.systems.begin(), r.systems.end());

    auto add = [](Tally& t, const std::string& system, const std::string& winner) {
        if (winner.empty())
            ++t.ties;
        else if (winner == system)
            ++t.wins;
        else
            ++t.losses;
    };
    for (const auto& v : verdicts) {
        const auto winner = v.winning_system();
        for (const auto& s : {v.system_a, v.system_b}) {
            if (v.relevant) {
                add(r.relevant[s], s, winner);
                if (auto it = v.cards.find(s); it != v.cards.end() && it->second > 0)
                    add(r.relevant_answered[s], s, winner);
                if (v.cell) {
                    add(r.by_factor["category"][std::string(dreamkg::to_token(v.cell->category))][s], s, winner);
                    add(r.by_factor["temporal_style"][std::string(to_token(v.cell->temporal))][s], s, winner);
                    add(r.by_factor["location_spec"][std::string(to_token(v.cell->location))][s], s, winner);
                    add(r.by_factor["lang_style"][std::string(to_token(v.cell->lang))][s], s, winner);
                }
            } else {
                auto& rej = r.rejection[s];
                ++rej.total;
                if (auto it = v.kind.find(s); it != v.kind.end() && it->second == "fallback") {
                    ++rej.any_fallback;
                    if (auto f = v.fallback.find(s); f != v.fallback.end() && f->second == "out_of_scope")
                        ++rej.out_of_scope;
                }
            }
        }
    }
    return r;
}

namespace {

ordered_json tally_json(const Tally& t) {
    return ordered_json{{"wins", t.wins}, {"ties", t.ties}, {"losses", t.losses}, {"win_rate", t.win_rate()}};
}

std::string percent(std::size_t num, std::size_t den) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0);
    return buf;
}

std::string tally_text(const Tally& t) {
    return "wins " + std::to_string(t.wins) + ", ties " + std::to_string(t.ties) + ", losses " +
           std::to_string(t.losses) + " (" + percent(t.wins, t.total()) + " wins of " + std::to_string(t.total()) +
           ")";
}

}  // namespace

ordered_json ScoreReport::to_json() const {
    ordered_json j;
    j["systems"] = systems;
    ordered_json rel, ans, rej, fac;
    for (const auto& s : systems) {
        rel[s] = tally_json(relevant.count(s) ? relevant.at(s) : Tally{});
        ans[s] = tally_json(relevant_answered.count(s) ? relevant_answered.at(s) : Tally{});
        const auto rj = rejection.count(s) ? rejection.at(s) : Rejection{};
        rej[s] = ordered_json{{"out_of_scope", rj.out_of_scope},
                              {"any_fallback", rj.any_fallback},
                              {"total", rj.total},
                              {"rate", rj.total ? static_cast<double>(rj.out_of_scope) / rj.total : 0.0}};
    }
    for (const auto& [factor, levels] : by_factor)
        for (const auto& [level, per_system] : levels)
            for (const auto& [s, t] : per_system) fac[factor][level][s] = tally_json(t);
    j["relevant"] = rel;
    j["relevant_answered"] = ans;
    j["rejection"] = rej;
    j["by_factor"] = fac;
    return j;
}

std::string ScoreReport::to_text() const {
    std::ostringstream out;
    for (const auto& s : systems) {
        const auto rel = relevant.count(s) ? relevant.at(s) : Tally{};
        const auto ans = relevant_answered.count(s) ? relevant_answered.at(s) : Tally{};
        const auto rj = rejection.count(s) ? rejection.at(s) : Rejection{};
        out << s << "\n";
        out << "  relevant: " << tally_text(rel) << "\n";
        out << "  relevant, answered with at least one card: " << tally_text(ans) << "\n";
        out << "  rejection (out_of_scope): " << rj.out_of_scope << "/" << rj.total << " = "
            << percent(rj.out_of_scope, rj.total) << "; any fallback " << rj.any_fallback << "/" << rj.total << "\n";
    }
    for (const auto& [factor, levels] : by_factor) {
        out << "by " << factor << "\n";
        for (const auto& [level, per_system] : levels) {
            out << "  " << level << ":";
            for (const auto& [s, t] : per_system) out << " " << s << " " << t.wins << "/" << t.ties << "/" << t.losses;
            out << "\n";
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Files

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot open " + path);
    std::vector<json> rows;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw EvalError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return rows;
}

void write_jsonl(const std::string& path, const std::vector<ordered_json>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw EvalError("cannot write " + path);
    for (const auto& r : rows) out << r.dump() << '\n';
}

}  // namespace dreamkg::eval
