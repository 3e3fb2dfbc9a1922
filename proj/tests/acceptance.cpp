// Prints one PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "corpora.hpp"
#include "dreamkg/engine.hpp"
#include "dreamkg/eval.hpp"
#include "dreamkg/geo.hpp"
#include "dreamkg/query_language.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace dreamkg;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

// Runs one criterion; an escaping exception counts as a failure.
void criterion(const char* name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(name, ok, detail);
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const std::vector<eval::BenchmarkQuery>& benchmark() {
    static const auto b = eval::generate_benchmark(7);
    return b;
}

const std::vector<eval::TranscriptEntry>& transcript() {
    static const auto t = [] {
        auto e = fixture::engine();
        return eval::run_system(benchmark(), eval::in_process(*e), "dreamkg");
    }();
    return t;
}

std::vector<oracle::Row> as_rows(const std::vector<ResultRow>& rows) {
    std::vector<oracle::Row> out;
    for (const auto& r : rows) {
        oracle::Row o{r.org->id, r.location->id, {}, {}, r.distance_m};
        for (const auto* s : r.services) o.services.insert(s->id);
        for (const auto* h : r.matched_hours) o.matched_hours.insert(h->id);
        out.push_back(std::move(o));
    }
    return out;
}

bool same_rows(const std::vector<oracle::Row>& got, const std::vector<oracle::Row>& want) {
    if (got.size() != want.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const auto& a = got[i];
        const auto& b = want[i];
        if (a.org != b.org || a.location != b.location || a.services != b.services ||
            a.matched_hours != b.matched_hours || a.meters.has_value() != b.meters.has_value())
            return false;
        if (a.meters && std::abs(*a.meters - *b.meters) > 1e-6 * std::max(1.0, *b.meters)) return false;
    }
    return true;
}

std::vector<nlohmann::json> log_lines(const Engine& e, const std::string& session) {
    std::vector<nlohmann::json> out;
    std::istringstream in(e.export_session_log(session));
    for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
    return out;
}

std::optional<QueryIR> ir_of(const QueryResponse& r) {
    if (r.kind != QueryResponse::Kind::Answer || !r.compiled_query) return std::nullopt;
    return parse(*r.compiled_query);
}

}  // namespace

int main() {
    criterion("library golden card", [] {
        auto e = fixture::engine();
        const auto t0 = Clock::now();
        const auto r = e->query(QueryRequest{"golden", fixture::kFig2Query, std::nullopt});
        const double secs = seconds_since(t0);
        if (!r.stop_plan || r.stop_plan->card_count() != 1) return std::pair{false, std::string("expected one card")};
        const auto& c = r.stop_plan->stops.at(0).cards.at(0);
        const double miles = c.distance_mi ? std::stod(*c.distance_mi) : -1.0;
        const bool ok = c.org_name == "Lillian Marrero Library" && c.phone == "(215) 685-9794" &&
                        c.address == "601 West Lehigh Avenue, Philadelphia, PA, 19133" &&
                        c.hours_line == "Tuesday, 11:00 AM - 7:00 PM" &&
                        c.services == std::vector<std::string>{"Wi-Fi (Free)"} && std::abs(miles - 0.1) <= 0.1 + 1e-9 &&
                        secs < 1.0;
        return std::pair{ok, fmt("%s, %.1f mi, %.3f s", c.org_name.c_str(), miles, secs)};
    });

    criterion("factorial cardinality", [] {
        std::set<eval::FactorCell> cells;
        std::size_t relevant = 0, irrelevant = 0;
        for (const auto& q : benchmark()) {
            if (q.relevant && q.cell) {
                ++relevant;
                cells.insert(*q.cell);
            } else if (!q.relevant) {
                ++irrelevant;
            }
        }
        const bool ok = relevant == 200 && irrelevant == 100 && cells.size() == 200;
        return std::pair{ok, fmt("%zu relevant over %zu cells, %zu irrelevant", relevant, cells.size(), irrelevant)};
    });

    criterion("out-of-scope rejection", [] {
        std::size_t rejected = 0, total = 0;
        for (const auto& t : transcript()) {
            if (t.query.relevant) continue;
            ++total;
            rejected += t.response && (*t.response)["kind"] == "fallback" &&
                        (*t.response)["fallback"]["reason"] == "out_of_scope";
        }
        const double rate = total ? static_cast<double>(rejected) / total : 0.0;
        return std::pair{total == 100 && rate >= 0.84, fmt("%zu/%zu = %.1f%% (need >= 84%%)", rejected, total, 100 * rate)};
    });

    criterion("superiority over baseline", [] {
        const auto& full = transcript();
        const auto base = eval::degrade(full);
        const auto v1 = eval::judge_pairwise(full, base, eval::RubricJudge{}, 1);
        const auto v2 = eval::judge_pairwise(full, base, eval::RubricJudge{}, 2);
        bool blind = v1.size() == v2.size();
        for (std::size_t i = 0; blind && i < v1.size(); ++i) blind = v1[i].winning_system() == v2[i].winning_system();
        const auto r = eval::score(v1);
        const auto& t = r.relevant_answered.at("dreamkg");
        const bool ok = t.total() > 0 && t.win_rate() >= 0.9 && blind;
        return std::pair{ok, fmt("%zu/%zu wins = %.1f%% (need >= 90%%), %zu ties, %zu losses, blinding %s", t.wins,
                                 t.total(), 100 * t.win_rate(), t.ties, t.losses, blind ? "holds" : "broken")};
    });

    criterion("compile/parse round-trip", [] {
        std::mt19937_64 rng(2024);
        int fails = 0;
        const int n = 1000;
        for (int i = 0; i < n; ++i) {
            const auto ir = oracle::random_ir(rng);
            if (!structurally_equal(parse(compile(ir).text), ir)) ++fails;
        }
        return std::pair{fails == 0, fmt("%d instances, %d failures", n, fails)};
    });

    criterion("retrieval oracle", [] {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(77);
        int instances = 0, mismatches = 0;
        for (int g_i = 0; g_i < 100; ++g_i) {
            const auto g = oracle::random_graph(rng, 50);
            for (int q_i = 0; q_i < 3; ++q_i, ++instances) {
                const auto ir = oracle::random_ir(rng);
                const auto got = execute_compiled(compile(ir), g);
                const auto want = oracle::evaluate(ir, g);
                bool same = got.per_request.size() == want.size();
                for (std::size_t r = 0; same && r < want.size(); ++r) same = same_rows(as_rows(got.per_request[r]), want[r]);
                mismatches += !same;
            }
        }
        const double secs = seconds_since(t0);
        return std::pair{mismatches == 0 && instances >= 200 && secs < 60.0,
                         fmt("%d instances, %d mismatches, %.2f s", instances, mismatches, secs)};
    });

    criterion("temporal oracle", [] {
        std::mt19937_64 rng(99);
        int mismatches = 0;
        const int n = 500;
        for (int i = 0; i < n; ++i) {
            const auto windows = oracle::random_week(rng);
            const auto c = oracle::random_constraint(rng);
            std::vector<const HoursWindow*> ptrs;
            for (const auto& w : windows) ptrs.push_back(&w);
            mismatches += satisfies(ptrs, c) != oracle::brute_satisfies(ptrs, c);
        }
        return std::pair{mismatches == 0, fmt("%d instances, %d mismatches", n, mismatches)};
    });

    criterion("spatial sanity", [] {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
        int bad = 0;
        for (int i = 0; i < 100; ++i) {
            const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
            const double ab = haversine_m(a, b), bc = haversine_m(b, c), ac = haversine_m(a, c);
            bad += ab != haversine_m(b, a);
            bad += haversine_m(a, a) != 0.0;
            bad += ac > (ab + bc) * (1.0 + 1e-6);
            bad += std::abs(ab - oracle::distance_m(a, b)) > 1e-6 * ab;
        }
        struct Item {
            GeoPoint point;
            std::string name;
            std::uint64_t id;
        };
        const auto key = [](const Item& i) { return RankKey{i.point, i.name, i.id}; };
        const SpatialAnchor anchor{{39.9526, -75.1652}, "city hall", AnchorResolution::Landmark};
        const GeoPoint same{39.9553, -75.1652};
        const std::vector<Item> ties{{same, "Zeta", 1}, {same, "Alpha", 9}, {same, "Alpha", 4}, {{39.99, -75.16}, "Aaa", 0}};
        const auto ranked = rank_by_distance(anchor, ties, key);
        bool order = ranked.size() == 4 && ranked[0].item.id == 4 && ranked[1].item.id == 9 && ranked[2].item.id == 1 &&
                     ranked[3].item.id == 0;
        std::vector<Item> many;
        for (std::uint64_t i = 0; i < 50; ++i) many.push_back({oracle::random_philly_point(rng), "n", i});
        const auto sorted = rank_by_distance(anchor, many, key);
        for (std::size_t i = 1; i < sorted.size(); ++i) order = order && sorted[i - 1].meters <= sorted[i].meters;
        return std::pair{bad == 0 && order, fmt("100 triples, %d violations, ranking %s", bad, order ? "ok" : "wrong")};
    });

    criterion("multi-turn equivalence", [] {
        int equal = 0, n = 0;
        for (const auto& pair : corpus::category_switch_pairs()) {
            ++n;
            auto e = fixture::engine();
            if (!ir_of(e->query(QueryRequest{"s", pair.first, std::nullopt}))) continue;
            const auto follow = ir_of(e->query(QueryRequest{"s", pair.followup, std::nullopt}));
            const auto restated = ir_of(e->query(QueryRequest{"fresh", pair.restated, std::nullopt}));
            equal += follow && restated && structurally_equal(*follow, *restated);
        }
        return std::pair{equal == n && n == 10, fmt("%d/%d pairs equal", equal, n)};
    });

    criterion("concurrency audit", [] {
        auto e = fixture::engine();
        const auto& texts = corpus::concurrent_turns();
        std::vector<std::thread> threads;
        for (int s = 0; s < 20; ++s) {
            threads.emplace_back([&, s] {
                for (int t = 0; t < 10; ++t)
                    e->query(QueryRequest{"conc-" + std::to_string(s), texts[(s + t) % texts.size()], std::nullopt});
            });
        }
        for (auto& th : threads) th.join();
        int clean = 0;
        for (int s = 0; s < 20; ++s) {
            const auto id = "conc-" + std::to_string(s);
            const auto lines = log_lines(*e, id);
            bool ok = lines.size() == 10;
            for (std::size_t t = 0; ok && t < lines.size(); ++t)
                ok = lines[t]["session_id"] == id && lines[t]["text"] == texts[(s + t) % texts.size()];
            clean += ok;
        }
        return std::pair{clean == 20, fmt("%d/20 sessions with 10 clean lines", clean)};
    });

    std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
