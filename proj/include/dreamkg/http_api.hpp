#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <httplib.h>

#include "dreamkg/engine.hpp"

namespace dreamkg {

struct HttpOptions {
    std::string cors_origin = "*";
    std::optional<std::filesystem::path> static_dir;  // served at "/" when set
};

/// Registers the /api routes on `server`. The engine must outlive the server.
///
///   POST /api/query              QueryRequest -> QueryResponse (400 on a malformed body)
///   GET  /api/session/{id}/log   JSON lines, 404 for unknown sessions
///   GET  /api/health
///   GET  /api/stats
void install_routes(httplib::Server& server, Engine& engine, const HttpOptions& options = {});

}  // namespace dreamkg
