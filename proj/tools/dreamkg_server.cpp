#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "dreamkg/http_api.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social-services knowledge graph query server"};
    std::string dataset = "data/dataset.json";
    std::string gazetteer = "data/gazetteer.json";
    std::string lexicon = "data/lexicon.json";
    std::string bind = "127.0.0.1";
    int port = 8080;
    int ttl_minutes = 30;
    double radius = dreamkg::kDefaultRadiusMiles;
    int limit = dreamkg::kDefaultLimit;
    std::string clock;
    std::string cors = "*";
    std::string static_dir;

    app.add_option("--dataset", dataset, "Organization dataset (JSON)")->envname("DREAMKG_DATASET");
    app.add_option("--gazetteer", gazetteer, "Gazetteer (JSON)")->envname("DREAMKG_GAZETTEER");
    app.add_option("--lexicon", lexicon, "Lexicon (JSON)")->envname("DREAMKG_LEXICON");
    app.add_option("--bind", bind, "Bind address")->envname("DREAMKG_BIND");
    app.add_option("--port", port, "Port")->envname("DREAMKG_PORT");
    app.add_option("--session-ttl", ttl_minutes, "Idle session lifetime in minutes")->envname("DREAMKG_SESSION_TTL");
    app.add_option("--radius", radius, "Default search radius in miles")->envname("DREAMKG_RADIUS");
    app.add_option("--limit", limit, "Results per service request")->envname("DREAMKG_LIMIT");
    app.add_option("--clock", clock, "Fixed clock, ISO 8601 (New York time unless an offset is given)")
        ->envname("DREAMKG_CLOCK");
    app.add_option("--cors-origin", cors, "Access-Control-Allow-Origin value")->envname("DREAMKG_CORS_ORIGIN");
    app.add_option("--static", static_dir, "Directory served at /")->envname("DREAMKG_STATIC");
    CLI11_PARSE(app, argc, argv);

    std::shared_ptr<const dreamkg::ClockSource> clock_source;
    if (!clock.empty()) {
        auto fixed = dreamkg::FixedClock::from_iso8601(clock);
        if (!fixed) {
            std::cerr << "invalid --clock value '" << clock << "'\n";
            return 2;
        }
        clock_source = std::move(fixed);
    }

    dreamkg::EngineOptions options;
    options.radius_miles = radius;
    options.limit = limit;
    options.session_ttl = std::chrono::minutes{ttl_minutes};

    std::unique_ptr<dreamkg::Engine> engine;
    try {
        engine = dreamkg::Engine::from_files({dataset, gazetteer, lexicon}, options, clock_source);
    } catch (const std::exception& e) {
        std::cerr << "failed to load data: " << e.what() << "\n";
        return 1;
    }

    dreamkg::HttpOptions http;
    http.cors_origin = cors;
    if (!static_dir.empty()) http.static_dir = static_dir;

    httplib::Server server;
    dreamkg::install_routes(server, *engine, http);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    std::cerr << "listening on " << bind << ":" << port << " (" << engine->graph().count(dreamkg::NodeKind::Organization)
              << " organizations)\n";
    if (!server.listen(bind, port)) {
        std::cerr << "cannot listen on " << bind << ":" << port << "\n";
        return 1;
    }
    return 0;
}
