#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dreamkg/geo.hpp"
#include "dreamkg/ontology.hpp"

namespace dreamkg {

/// Dense index into the graph's node table, assigned in file order at load.
struct NodeId {
    std::uint32_t value = 0;

    auto operator<=>(const NodeId&) const = default;
};

struct PostalAddress {
    std::string street;
    std::string city;
    std::string state;
    std::string zip;

    /// "601 West Lehigh Avenue, Philadelphia, PA, 19133"
    std::string display() const;
};

struct Organization {
    NodeId id;
    std::string name;
    PostalAddress address;
    std::string phone;
    std::string description;
};

struct Location {
    NodeId id;
    GeoPoint point;
    std::string zip;
    std::string neighborhood;
    std::string street;
};

struct Service {
    NodeId id;
    Category category = Category::Food;
    std::string label;
    Cost cost = Cost::Unknown;
    std::set<std::string> features;
    std::string eligibility;
};

/// One same-day half-open interval [open_min, close_min).
struct HoursWindow {
    NodeId id;
    Day day = Day::Mon;
    int open_min = 0;
    int close_min = 0;
};

enum class NodeKind { Organization, Location, Service, Hours };
enum class EdgeKind { LocatedAt, Offers, OpenDuring };

std::string_view to_token(NodeKind k) noexcept;
std::string_view to_token(EdgeKind k) noexcept;

struct Edge {
    NodeId from;
    NodeId to;
    EdgeKind kind = EdgeKind::LocatedAt;
};

using Node = std::variant<Organization, Location, Service, HoursWindow>;

NodeKind kind_of(const Node& n) noexcept;

enum class DatasetErrorKind { MalformedRecord, InvalidEdgeEndpoints, DuplicateNodeId, Io };

std::string_view to_token(DatasetErrorKind k) noexcept;

class DatasetError : public std::runtime_error {
public:
    DatasetError(DatasetErrorKind kind, std::optional<std::size_t> record, std::string reason);

    DatasetErrorKind kind() const noexcept { return kind_; }
    /// Index of the offending organization record, when the error is tied to one.
    std::optional<std::size_t> record_index() const noexcept { return record_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    DatasetErrorKind kind_;
    std::optional<std::size_t> record_;
    std::string reason_;
};

/// All nodes reachable from one Organization that a query can use.
struct Candidate {
    const Organization* org = nullptr;
    const Service* service = nullptr;
    const Location* location = nullptr;
    std::vector<const HoursWindow*> hours;
};

struct Violation {
    std::string rule;
    std::vector<NodeId> nodes;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

class GraphBuilder;

/// Immutable typed property graph. Safe to share across threads once built.
class Graph {
public:
    Graph() = default;

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::size_t count(NodeKind k) const noexcept;

    const Node& node(NodeId id) const { return nodes_.at(id.value); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    const std::vector<NodeId>& organizations() const noexcept { return orgs_; }
    const Organization& organization(NodeId id) const { return std::get<Organization>(node(id)); }
    const Location& location(NodeId id) const { return std::get<Location>(node(id)); }
    const Service& service(NodeId id) const { return std::get<Service>(node(id)); }
    const HoursWindow& hours(NodeId id) const { return std::get<HoursWindow>(node(id)); }

    /// Targets of `kind` edges leaving `from`, in insertion order.
    std::vector<NodeId> targets(NodeId from, EdgeKind kind) const;

    std::vector<const HoursWindow*> hours_of(NodeId org) const;

    /// Every (org, service, location) with service.category == category, features a
    /// superset of `required_features` and, when given, service.cost == cost.
    std::vector<Candidate> match_candidates(Category category,
                                            const std::set<std::string>& required_features,
                                            std::optional<Cost> cost) const;

private:
    friend class GraphBuilder;

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> out_edges_;  // per node, indices into edges_
    std::vector<NodeId> orgs_;
    std::vector<std::vector<std::pair<NodeId, NodeId>>> by_category_;  // (org, service)
};

/// Assembles a graph. Endpoint kinds are checked per edge; the remaining invariants
/// are checked by validate().
class GraphBuilder {
public:
    NodeId add(Node node);
    /// Throws DatasetError(DuplicateNodeId) when `id` is already taken.
    void add_with_id(NodeId id, Node node);
    /// Throws DatasetError(InvalidEdgeEndpoints) on missing nodes or wrong endpoint kinds.
    void connect(NodeId from, NodeId to, EdgeKind kind);

    Graph build() &&;

private:
    std::vector<std::optional<Node>> slots_;
    std::vector<Edge> edges_;
};

/// Lists every invariant violation. Empty iff the graph is well formed.
ValidationReport validate(const Graph& graph);

/// Reads the JSON dataset format. Whole-file rejection on any bad record.
Graph load_dataset(const std::filesystem::path& path);
Graph load_dataset_json(std::string_view text);

/// Parses "HH:MM" (24-hour clock, "24:00" allowed) into minutes of day.
std::optional<int> parse_clock_text(std::string_view text) noexcept;

struct RawHours {
    Day day = Day::Mon;
    int open_min = 0;
    int close_min = 0;  // may be <= open_min for spans that run past midnight
};

/// Splits a possibly midnight-crossing span into same-day windows.
std::vector<RawHours> split_hours(const RawHours& raw);

}  // namespace dreamkg
