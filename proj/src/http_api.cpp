#include "dreamkg/http_api.hpp"

namespace dreamkg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void send_json(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, ordered_json{{"error", message}});
}

}  // namespace

void install_routes(httplib::Server& server, Engine& engine, const HttpOptions& options) {
    const std::string origin = options.cors_origin;
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/api/query", [&engine](const httplib::Request& req, httplib::Response& res) {
        QueryRequest query;
        try {
            query = QueryRequest::from_json(json::parse(req.body));
        } catch (const json::exception& e) {
            return send_error(res, 400, std::string("malformed JSON: ") + e.what());
        } catch (const InvalidRequest& e) {
            return send_error(res, 400, e.what());
        }
        try {
            send_json(res, 200, engine.query(query).to_json());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });

    server.Get(R"(/api/session/([^/]+)/log)", [&engine](const httplib::Request& req, httplib::Response& res) {
        try {
            res.set_content(engine.export_session_log(req.matches[1].str()), "application/x-ndjson");
            res.set_header("Content-Disposition", "attachment; filename=\"session-log.jsonl\"");
        } catch (const UnknownSession& e) {
            send_error(res, 404, e.what());
        }
    });

    server.Get("/api/health", [&engine](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, engine.health());
    });
    server.Get("/api/stats", [&engine](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, engine.stats());
    });

    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
}

}  // namespace dreamkg
