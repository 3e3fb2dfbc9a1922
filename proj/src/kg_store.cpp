#include "dreamkg/kg_store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace dreamkg {

using nlohmann::json;

std::string PostalAddress::display() const {
    std::string out = street;
    for (const auto* part : {&city, &state, &zip}) {
        if (part->empty()) continue;
        if (!out.empty()) out += ", ";
        out += *part;
    }
    return out;
}

std::string_view to_token(NodeKind k) noexcept {
    switch (k) {
        case NodeKind::Organization: return "Organization";
        case NodeKind::Location: return "Location";
        case NodeKind::Service: return "Service";
        case NodeKind::Hours: return "Hours";
    }
    return "Organization";
}

std::string_view to_token(EdgeKind k) noexcept {
    switch (k) {
        case EdgeKind::LocatedAt: return "LOCATED_AT";
        case EdgeKind::Offers: return "OFFERS";
        case EdgeKind::OpenDuring: return "OPEN_DURING";
    }
    return "LOCATED_AT";
}

std::string_view to_token(DatasetErrorKind k) noexcept {
    switch (k) {
        case DatasetErrorKind::MalformedRecord: return "MalformedRecord";
        case DatasetErrorKind::InvalidEdgeEndpoints: return "InvalidEdgeEndpoints";
        case DatasetErrorKind::DuplicateNodeId: return "DuplicateNodeId";
        case DatasetErrorKind::Io: return "Io";
    }
    return "MalformedRecord";
}

NodeKind kind_of(const Node& n) noexcept {
    return static_cast<NodeKind>(n.index());
}

namespace {

std::string describe_error(DatasetErrorKind kind, const std::optional<std::size_t>& record,
                           const std::string& reason) {
    std::string out(to_token(kind));
    if (record) out += " (record " + std::to_string(*record) + ")";
    return out + ": " + reason;
}

void set_id(Node& node, NodeId id) {
    std::visit([&](auto& n) { n.id = id; }, node);
}

NodeKind expected_target(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::LocatedAt: return NodeKind::Location;
        case EdgeKind::Offers: return NodeKind::Service;
        case EdgeKind::OpenDuring: return NodeKind::Hours;
    }
    return NodeKind::Location;
}

bool is_zip(std::string_view zip) {
    return zip.size() == 5 &&
           std::all_of(zip.begin(), zip.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string id_text(NodeId id) { return "#" + std::to_string(id.value); }

}  // namespace

DatasetError::DatasetError(DatasetErrorKind kind, std::optional<std::size_t> record,
                           std::string reason)
    : std::runtime_error(describe_error(kind, record, reason)),
      kind_(kind),
      record_(record),
      reason_(std::move(reason)) {}

// ---------------------------------------------------------------------------
// Graph

std::size_t Graph::count(NodeKind k) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [k](const Node& n) { return kind_of(n) == k; }));
}

std::vector<NodeId> Graph::targets(NodeId from, EdgeKind kind) const {
    std::vector<NodeId> out;
    if (from.value >= out_edges_.size()) return out;
    for (auto idx : out_edges_[from.value]) {
        const auto& e = edges_[idx];
        if (e.kind == kind) out.push_back(e.to);
    }
    return out;
}

std::vector<const HoursWindow*> Graph::hours_of(NodeId org) const {
    std::vector<const HoursWindow*> out;
    for (auto id : targets(org, EdgeKind::OpenDuring)) out.push_back(&hours(id));
    return out;
}

std::vector<Candidate> Graph::match_candidates(Category category,
                                               const std::set<std::string>& required_features,
                                               std::optional<Cost> cost) const {
    std::vector<Candidate> out;
    const auto slot = static_cast<std::size_t>(category);
    if (slot >= by_category_.size()) return out;
    for (const auto& [org_id, service_id] : by_category_[slot]) {
        const auto& svc = service(service_id);
        if (cost && svc.cost != *cost) continue;
        if (!std::includes(svc.features.begin(), svc.features.end(), required_features.begin(),
                           required_features.end()))
            continue;
        const auto hours = hours_of(org_id);
        for (auto loc_id : targets(org_id, EdgeKind::LocatedAt)) {
            out.push_back(Candidate{&organization(org_id), &svc, &location(loc_id), hours});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// GraphBuilder

NodeId GraphBuilder::add(Node node) {
    NodeId id{static_cast<std::uint32_t>(slots_.size())};
    set_id(node, id);
    slots_.emplace_back(std::move(node));
    return id;
}

void GraphBuilder::add_with_id(NodeId id, Node node) {
    if (id.value < slots_.size() && slots_[id.value])
        throw DatasetError(DatasetErrorKind::DuplicateNodeId, std::nullopt,
                           "node id " + id_text(id) + " already assigned");
    if (id.value >= slots_.size()) slots_.resize(id.value + 1);
    set_id(node, id);
    slots_[id.value] = std::move(node);
}

void GraphBuilder::connect(NodeId from, NodeId to, EdgeKind kind) {
    auto present = [&](NodeId id) { return id.value < slots_.size() && slots_[id.value]; };
    if (!present(from) || !present(to))
        throw DatasetError(DatasetErrorKind::InvalidEdgeEndpoints, std::nullopt,
                           std::string(to_token(kind)) + " edge references a missing node");
    const auto from_kind = kind_of(*slots_[from.value]);
    const auto to_kind = kind_of(*slots_[to.value]);
    if (from_kind != NodeKind::Organization || to_kind != expected_target(kind))
        throw DatasetError(DatasetErrorKind::InvalidEdgeEndpoints, std::nullopt,
                           std::string(to_token(kind)) + " edge " + id_text(from) + "->" +
                               id_text(to) + " connects " + std::string(to_token(from_kind)) +
                               "->" + std::string(to_token(to_kind)));
    edges_.push_back(Edge{from, to, kind});
}

Graph GraphBuilder::build() && {
    Graph g;
    g.nodes_.reserve(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (!slots_[i])
            throw DatasetError(DatasetErrorKind::MalformedRecord, std::nullopt,
                               "node id #" + std::to_string(i) + " was never assigned");
        g.nodes_.push_back(std::move(*slots_[i]));
    }
    g.edges_ = std::move(edges_);
    g.out_edges_.resize(g.nodes_.size());
    for (std::size_t i = 0; i < g.edges_.size(); ++i) g.out_edges_[g.edges_[i].from.value].push_back(i);
    g.by_category_.resize(kAllCategories.size());
    for (const auto& n : g.nodes_) {
        if (const auto* org = std::get_if<Organization>(&n)) {
            g.orgs_.push_back(org->id);
            for (auto sid : g.targets(org->id, EdgeKind::Offers)) {
                const auto& svc = g.service(sid);
                g.by_category_[static_cast<std::size_t>(svc.category)].emplace_back(org->id, sid);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// validate

ValidationReport validate(const Graph& graph) {
    ValidationReport report;
    auto add = [&](std::string rule, std::vector<NodeId> nodes, std::string message) {
        report.push_back(Violation{std::move(rule), std::move(nodes), std::move(message)});
    };

    for (const auto& e : graph.edges()) {
        const bool ok = e.from.value < graph.node_count() && e.to.value < graph.node_count() &&
                        kind_of(graph.node(e.from)) == NodeKind::Organization &&
                        kind_of(graph.node(e.to)) == expected_target(e.kind);
        if (!ok)
            add("edge_endpoints", {e.from, e.to},
                std::string(to_token(e.kind)) + " edge has wrong endpoint kinds");
    }

    for (const auto& n : graph.nodes()) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Organization>) {
                    if (v.name.empty()) add("org_name", {v.id}, "organization has an empty name");
                    if (graph.targets(v.id, EdgeKind::LocatedAt).empty())
                        add("org_location", {v.id},
                            "organization " + id_text(v.id) + " has no LOCATED_AT edge");
                    if (graph.targets(v.id, EdgeKind::Offers).empty())
                        add("org_service", {v.id},
                            "organization " + id_text(v.id) + " has no OFFERS edge");
                } else if constexpr (std::is_same_v<T, Location>) {
                    if (!is_valid(v.point))
                        add("location_point", {v.id}, "coordinates out of range");
                    if (!is_zip(v.zip)) add("location_zip", {v.id}, "zip '" + v.zip + "' is not 5 digits");
                } else if constexpr (std::is_same_v<T, Service>) {
                    for (const auto& tag : v.features)
                        if (!is_feature_tag(tag))
                            add("service_feature", {v.id}, "feature tag '" + tag + "' is not snake_case");
                } else if constexpr (std::is_same_v<T, HoursWindow>) {
                    if (v.open_min < 0 || v.open_min >= kMinutesPerDay || v.close_min <= 0 ||
                        v.close_min > kMinutesPerDay || v.open_min >= v.close_min)
                        add("hours_range", {v.id},
                            "window " + std::to_string(v.open_min) + "-" +
                                std::to_string(v.close_min) + " is not a valid same-day interval");
                }
            },
            n);
    }

    for (auto org : graph.organizations()) {
        auto windows = graph.hours_of(org);
        for (std::size_t i = 0; i < windows.size(); ++i) {
            for (std::size_t j = i + 1; j < windows.size(); ++j) {
                const auto& a = *windows[i];
                const auto& b = *windows[j];
                if (a.day != b.day) continue;
                if (std::max(a.open_min, b.open_min) < std::min(a.close_min, b.close_min))
                    add("hours_overlap", {a.id, b.id},
                        "organization " + id_text(org) + " has overlapping " +
                            std::string(to_token(a.day)) + " windows " + id_text(a.id) + " and " +
                            id_text(b.id));
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Dataset ingestion

std::optional<int> parse_clock_text(std::string_view text) noexcept {
    if (text.size() != 5 || text[2] != ':') return std::nullopt;
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!digit(text[0]) || !digit(text[1]) || !digit(text[3]) || !digit(text[4])) return std::nullopt;
    const int h = (text[0] - '0') * 10 + (text[1] - '0');
    const int m = (text[3] - '0') * 10 + (text[4] - '0');
    if (m > 59) return std::nullopt;
    if (h == 24 && m == 0) return kMinutesPerDay;
    if (h > 23) return std::nullopt;
    return h * 60 + m;
}

std::vector<RawHours> split_hours(const RawHours& raw) {
    if (raw.close_min > raw.open_min) return {raw};
    std::vector<RawHours> out{{raw.day, raw.open_min, kMinutesPerDay}};
    if (raw.close_min > 0) out.push_back({next_day(raw.day), 0, raw.close_min});
    return out;
}

namespace {

class RecordReader {
public:
    RecordReader(const json& rec, std::size_t index) : rec_(rec), index_(index) {}

    [[noreturn]] void fail(const std::string& reason) const {
        throw DatasetError(DatasetErrorKind::MalformedRecord, index_, reason);
    }

    void only_fields(const json& obj, std::initializer_list<std::string_view> allowed,
                     const std::string& where) const {
        if (!obj.is_object()) fail(where + " must be an object");
        for (const auto& [k, v] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                fail("unknown field '" + where + "." + k + "'");
        }
    }

    const json& field(const json& obj, const char* name, const std::string& where) const {
        auto it = obj.find(name);
        if (it == obj.end()) fail("missing field '" + where + "." + name + "'");
        return *it;
    }

    std::string text(const json& obj, const char* name, const std::string& where) const {
        const auto& v = field(obj, name, where);
        if (!v.is_string()) fail("field '" + where + "." + name + "' must be a string");
        return v.get<std::string>();
    }

    std::string optional_text(const json& obj, const char* name, const std::string& where) const {
        if (!obj.contains(name)) return {};
        return text(obj, name, where);
    }

    double number(const json& obj, const char* name, const std::string& where) const {
        const auto& v = field(obj, name, where);
        if (!v.is_number()) fail("field '" + where + "." + name + "' must be a number");
        return v.get<double>();
    }

    const json& rec() const { return rec_; }

private:
    const json& rec_;
    std::size_t index_;
};

void ingest_record(GraphBuilder& builder, const json& rec, std::size_t index,
                   std::vector<std::size_t>& owner) {
    RecordReader r(rec, index);
    r.only_fields(rec, {"name", "address", "phone", "description", "location", "services", "hours"},
                  "organization");

    auto track = [&](NodeId id) {
        if (owner.size() <= id.value) owner.resize(id.value + 1);
        owner[id.value] = index;
        return id;
    };

    Organization org;
    org.name = r.text(rec, "name", "organization");
    if (org.name.empty()) r.fail("organization name is empty");
    const auto& addr = r.field(rec, "address", "organization");
    r.only_fields(addr, {"street", "city", "state", "zip"}, "address");
    org.address = PostalAddress{r.text(addr, "street", "address"), r.text(addr, "city", "address"),
                                r.text(addr, "state", "address"), r.text(addr, "zip", "address")};
    if (!is_zip(org.address.zip)) r.fail("address.zip '" + org.address.zip + "' is not 5 digits");
    org.phone = r.text(rec, "phone", "organization");
    org.description = r.optional_text(rec, "description", "organization");
    const auto org_id = track(builder.add(org));

    const auto& loc_json = r.field(rec, "location", "organization");
    r.only_fields(loc_json, {"lat", "lon", "neighborhood", "street"}, "location");
    Location loc;
    loc.point = GeoPoint{r.number(loc_json, "lat", "location"), r.number(loc_json, "lon", "location")};
    if (!is_valid(loc.point)) r.fail("location coordinates out of range");
    loc.zip = org.address.zip;
    loc.neighborhood = r.optional_text(loc_json, "neighborhood", "location");
    loc.street = r.optional_text(loc_json, "street", "location");
    const auto loc_id = track(builder.add(loc));
    builder.connect(org_id, loc_id, EdgeKind::LocatedAt);

    const auto& services = r.field(rec, "services", "organization");
    if (!services.is_array() || services.empty()) r.fail("services must be a nonempty array");
    for (std::size_t i = 0; i < services.size(); ++i) {
        const auto where = "services[" + std::to_string(i) + "]";
        const auto& s = services[i];
        r.only_fields(s, {"category", "label", "cost", "features", "eligibility"}, where);
        Service svc;
        const auto cat_text = r.text(s, "category", where);
        auto cat = category_from_token(cat_text);
        if (!cat) r.fail(where + ".category '" + cat_text + "' is not one of the five domains");
        svc.category = *cat;
        svc.label = r.text(s, "label", where);
        if (svc.label.empty()) r.fail(where + ".label is empty");
        svc.cost = normalize_cost(r.optional_text(s, "cost", where));
        svc.eligibility = r.optional_text(s, "eligibility", where);
        if (s.contains("features")) {
            const auto& feats = s.at("features");
            if (!feats.is_array()) r.fail(where + ".features must be an array");
            for (const auto& f : feats) {
                if (!f.is_string()) r.fail(where + ".features entries must be strings");
                auto tag = f.get<std::string>();
                if (!is_feature_tag(tag)) r.fail(where + " feature tag '" + tag + "' is not snake_case");
                svc.features.insert(std::move(tag));
            }
        }
        builder.connect(org_id, track(builder.add(svc)), EdgeKind::Offers);
    }

    const auto& hours = r.field(rec, "hours", "organization");
    if (!hours.is_array()) r.fail("hours must be an array");
    for (std::size_t i = 0; i < hours.size(); ++i) {
        const auto where = "hours[" + std::to_string(i) + "]";
        const auto& h = hours[i];
        r.only_fields(h, {"day", "open", "close"}, where);
        const auto day_text = r.text(h, "day", where);
        auto day = day_from_text(day_text);
        if (!day) r.fail(where + ".day '" + day_text + "' is not a weekday");
        auto open = parse_clock_text(r.text(h, "open", where));
        auto close = parse_clock_text(r.text(h, "close", where));
        if (!open || !close) r.fail(where + " times must be HH:MM on a 24-hour clock");
        if (*open >= kMinutesPerDay) r.fail(where + ".open must be before 24:00");
        if (*open == *close) r.fail(where + " open and close are equal");
        for (const auto& part : split_hours(RawHours{*day, *open, *close})) {
            const auto hid = track(builder.add(HoursWindow{NodeId{}, part.day, part.open_min, part.close_min}));
            builder.connect(org_id, hid, EdgeKind::OpenDuring);
        }
    }
}

}  // namespace

Graph load_dataset_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DatasetError(DatasetErrorKind::MalformedRecord, std::nullopt,
                           std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw DatasetError(DatasetErrorKind::MalformedRecord, std::nullopt,
                           "top level must be an object");
    for (const auto& [k, v] : doc.items()) {
        if (k != "organizations")
            throw DatasetError(DatasetErrorKind::MalformedRecord, std::nullopt,
                               "unknown top-level field '" + k + "'");
    }
    const auto it = doc.find("organizations");
    if (it == doc.end() || !it->is_array())
        throw DatasetError(DatasetErrorKind::MalformedRecord, std::nullopt,
                           "'organizations' must be an array");

    GraphBuilder builder;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < it->size(); ++i) {
        try {
            ingest_record(builder, (*it)[i], i, owner);
        } catch (const json::exception& e) {
            throw DatasetError(DatasetErrorKind::MalformedRecord, i, e.what());
        } catch (const DatasetError& e) {
            if (e.record_index()) throw;
            throw DatasetError(e.kind(), i, e.reason());
        }
    }
    auto graph = std::move(builder).build();
    const auto report = validate(graph);
    if (!report.empty()) {
        const auto& v = report.front();
        std::optional<std::size_t> record;
        if (!v.nodes.empty() && v.nodes.front().value < owner.size()) record = owner[v.nodes.front().value];
        throw DatasetError(DatasetErrorKind::MalformedRecord, record, v.message);
    }
    return graph;
}

Graph load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError(DatasetErrorKind::Io, std::nullopt, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_dataset_json(buf.str());
}

}  // namespace dreamkg
