#include <iostream>

#include <CLI11.hpp>

#include "dreamkg/eval.hpp"

namespace ev = dreamkg::eval;

namespace {

std::vector<ev::TranscriptEntry> load_transcript(const std::string& path) {
    std::vector<ev::TranscriptEntry> out;
    for (const auto& row : ev::read_jsonl(path)) out.push_back(ev::TranscriptEntry::from_json(row));
    return out;
}

template <typename T>
void save(const std::string& path, const std::vector<T>& items) {
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& i : items) rows.push_back(i.to_json());
    ev::write_jsonl(path, rows);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark generation, execution, pairwise judging and scoring"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::string out;

    auto* gen = app.add_subcommand("generate", "Write the factorial corpus");
    gen->add_option("--seed", seed);
    gen->add_option("--out", out)->required();

    std::string corpus, endpoint, clock = "2026-10-20T12:00:00", system = "dreamkg";
    std::string dataset = "data/dataset.json", gazetteer = "data/gazetteer.json", lexicon = "data/lexicon.json";
    auto* run = app.add_subcommand("run", "Run a corpus against the engine (in-process unless --endpoint)");
    run->add_option("--corpus", corpus)->required();
    run->add_option("--endpoint", endpoint, "Base URL of a running server");
    run->add_option("--clock", clock, "Fixed clock for in-process runs");
    run->add_option("--system", system, "Name recorded in the transcript");
    run->add_option("--dataset", dataset);
    run->add_option("--gazetteer", gazetteer);
    run->add_option("--lexicon", lexicon);
    run->add_option("--out", out)->required();

    std::string input, degraded_name = "baseline";
    auto* deg = app.add_subcommand("degrade", "Derive the stripped baseline transcript");
    deg->add_option("--in", input)->required();
    deg->add_option("--system", degraded_name, "Name of the derived system");
    deg->add_option("--out", out)->required();

    std::string a, b, judge_kind = "rubric", judge_url;
    auto* judge = app.add_subcommand("judge", "Blind pairwise comparison of two transcripts");
    judge->add_option("--a", a)->required();
    judge->add_option("--b", b)->required();
    judge->add_option("--judge", judge_kind)->check(CLI::IsMember({"rubric", "external"}));
    judge->add_option("--judge-url", judge_url, "Endpoint for the external judge");
    judge->add_option("--seed", seed);
    judge->add_option("--out", out)->required();

    std::string verdicts;
    bool as_json = false;
    auto* sc = app.add_subcommand("score", "Summarize verdicts");
    sc->add_option("--verdicts", verdicts)->required();
    sc->add_flag("--json", as_json);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            save(out, ev::generate_benchmark(seed));
        } else if (*run) {
            std::vector<ev::BenchmarkQuery> queries;
            for (const auto& row : ev::read_jsonl(corpus)) queries.push_back(ev::BenchmarkQuery::from_json(row));
            if (!endpoint.empty()) {
                save(out, ev::run_system(queries, ev::http_endpoint(endpoint), system));
            } else {
                auto fixed = dreamkg::FixedClock::from_iso8601(clock);
                if (!fixed) throw ev::EvalError("invalid --clock '" + clock + "'");
                auto engine = dreamkg::Engine::from_files({dataset, gazetteer, lexicon}, {}, std::move(fixed));
                save(out, ev::run_system(queries, ev::in_process(*engine), system));
            }
        } else if (*deg) {
            save(out, ev::degrade(load_transcript(input), degraded_name));
        } else if (*judge) {
            std::unique_ptr<ev::Judge> j;
            if (judge_kind == "external") {
                if (judge_url.empty()) throw ev::EvalError("--judge external needs --judge-url");
                j = std::make_unique<ev::ExternalJudge>(judge_url);
            } else {
                j = std::make_unique<ev::RubricJudge>();
            }
            save(out, ev::judge_pairwise(load_transcript(a), load_transcript(b), *j, seed));
        } else if (*sc) {
            std::vector<ev::Verdict> vs;
            for (const auto& row : ev::read_jsonl(verdicts)) vs.push_back(ev::Verdict::from_json(row));
            const auto report = ev::score(vs);
            std::cout << (as_json ? report.to_json().dump(2) + "\n" : report.to_text());
        }
    } catch (const std::exception& e) {
        std::cerr << "bench: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
