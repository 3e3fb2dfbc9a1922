#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dreamkg/kg_store.hpp"
#include "dreamkg/query_ir.hpp"

namespace dreamkg {

/// Labels, edge kinds, properties and functions the compiled query may mention.
struct SchemaManifest {
    std::vector<std::string_view> labels;
    std::vector<std::string_view> edges;
    std::vector<std::string_view> properties;
    std::vector<std::string_view> functions;
};

const SchemaManifest& schema_manifest();

struct CompiledQuery {
    std::string text;
    std::string source_ir_digest;
};

CompiledQuery compile(const QueryIR& ir);

struct SourcePosition {
    std::size_t line = 1;
    std::size_t column = 1;
};

class QueryParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, Schema };

    QueryParseError(Kind kind, SourcePosition pos, const std::string& message);

    Kind kind() const noexcept { return kind_; }
    SourcePosition position() const noexcept { return pos_; }

private:
    Kind kind_;
    SourcePosition pos_;
};

/// Parses the compiled-query grammar back into IR. Conjunction order inside WHERE is
/// irrelevant. All subqueries must share their spatial, temporal and limit parts.
/// Throws QueryParseError.
QueryIR parse(std::string_view text);

/// One organization answering one service request.
struct ResultRow {
    const Organization* org = nullptr;
    const Location* location = nullptr;
    std::vector<const Service*> services;        // the org's services matching the request
    std::vector<const HoursWindow*> matched_hours;  // windows satisfying the time constraint
    std::vector<const HoursWindow*> all_hours;
    std::optional<double> distance_m;

    std::optional<double> distance_miles() const {
        if (!distance_m) return std::nullopt;
        return meters_to_miles(*distance_m);
    }
};

struct ResultSet {
    std::vector<std::vector<ResultRow>> per_request;  // parallel to QueryIR::requests

    std::size_t total() const noexcept;
};

/// Runs each request independently: candidate match, time filter, radius filter and
/// distance rank, then truncation to the limit. Without an anchor rows are ordered by
/// organization name, then id.
ResultSet execute(const QueryIR& ir, const Graph& graph);

/// Compiles, reparses and executes, so what runs is exactly what the text says.
ResultSet execute_compiled(const CompiledQuery& query, const Graph& graph);

}  // namespace dreamkg
