#include "dreamkg/query_language.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

namespace dreamkg {

namespace {

constexpr std::string_view kPattern =
    "(o:Organization)-[:OFFERS]->(s:Service), (o)-[:LOCATED_AT]->(l:Location), "
    "(o)-[:OPEN_DURING]->(t:Hours)";

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string number_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string out(buf, ptr);
    if (out.find_first_of(".e") == std::string::npos && out.find("inf") == std::string::npos) out += ".0";
    return out;
}

std::string compile_subquery(const ServiceRequest& req, const QueryIR& ir) {
    std::vector<std::string> preds;
    preds.push_back("s.category = " + quote(to_token(req.category)));
    for (const auto& f : req.features) preds.push_back(quote(f) + " IN s.features");  // std::set: sorted
    if (req.cost) preds.push_back("s.cost = " + quote(to_token(*req.cost)));
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OpenAt>) {
                preds.push_back("t.day = " + quote(to_token(v.day)));
                const auto m = std::to_string(v.minute);
                preds.push_back("t.open <= " + m + " AND t.close > " + m);
            } else if constexpr (std::is_same_v<T, OpenDuring>) {
                if (v.days.size() == 1) {
                    preds.push_back("t.day = " + quote(to_token(*v.days.begin())));
                } else {
                    std::string set = "[";
                    for (auto d : v.days) {
                        if (set.size() > 1) set += ", ";
                        set += quote(to_token(d));
                    }
                    preds.push_back("t.day IN " + set + "]");
                }
                preds.push_back("overlaps(t, " + std::to_string(v.start_min) + ", " + std::to_string(v.end_min) + ")");
            }
        },
        ir.temporal);
    if (ir.spatial) {
        const auto& p = ir.spatial->anchor.point;
        preds.push_back("dist(l, " + number_text(p.lat) + ", " + number_text(p.lon) +
                        ") <= " + number_text(ir.spatial->radius_m));
    }
    std::string out = "MATCH " + std::string(kPattern) + " WHERE ";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (i) out += " AND ";
        out += preds[i];
    }
    out += " RETURN o, s, l, t";
    if (ir.spatial) out += " ORDER BY dist ASC";
    out += " LIMIT " + std::to_string(ir.limit);
    return out;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, String, Number, Punct, End };

struct Token {
    Tok type = Tok::End;
    std::string text;
    SourcePosition pos;
    bool is_integer = false;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = pos_;
            if (i_ >= src_.size()) {
                t.type = Tok::End;
                out.push_back(t);
                return out;
            }
            const char c = src_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.type = Tok::Ident;
                while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                    t.text.push_back(advance());
            } else if (c == '"') {
                t.type = Tok::String;
                advance();
                bool closed = false;
                while (i_ < src_.size()) {
                    char ch = advance();
                    if (ch == '\\') {
                        if (i_ >= src_.size()) break;
                        t.text.push_back(advance());
                    } else if (ch == '"') {
                        closed = true;
                        break;
                    } else {
                        t.text.push_back(ch);
                    }
                }
                if (!closed) throw QueryParseError(QueryParseError::Kind::Syntax, t.pos, "unterminated string");
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '-' && i_ + 1 < src_.size() &&
                        (std::isdigit(static_cast<unsigned char>(src_[i_ + 1])) || src_[i_ + 1] == '.'))) {
                t.type = Tok::Number;
                t.is_integer = true;
                if (c == '-') t.text.push_back(advance());
                while (i_ < src_.size()) {
                    const char ch = src_[i_];
                    if (std::isdigit(static_cast<unsigned char>(ch))) {
                        t.text.push_back(advance());
                    } else if (ch == '.' || ch == 'e' || ch == 'E') {
                        t.is_integer = false;
                        t.text.push_back(advance());
                        if ((ch == 'e' || ch == 'E') && i_ < src_.size() && (src_[i_] == '-' || src_[i_] == '+'))
                            t.text.push_back(advance());
                    } else {
                        break;
                    }
                }
            } else {
                t.type = Tok::Punct;
                static constexpr std::string_view two[] = {"<=", "->", ">="};
                bool matched = false;
                for (auto p : two) {
                    if (src_.substr(i_, 2) == p) {
                        t.text = std::string(p);
                        advance();
                        advance();
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    if (std::string_view("()[]:,;=.-<>").find(c) == std::string_view::npos)
                        throw QueryParseError(QueryParseError::Kind::Syntax, t.pos,
                                              std::string("unexpected character '") + c + "'");
                    t.text = std::string(1, advance());
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    char advance() {
        const char c = src_[i_++];
        if (c == '\n') {
            ++pos_.line;
            pos_.column = 1;
        } else {
            ++pos_.column;
        }
        return c;
    }

    void skip_space() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance();
    }

    std::string_view src_;
    std::size_t i_ = 0;
    SourcePosition pos_;
};

// ---------------------------------------------------------------------------
// Parser

struct SubqueryParts {
    std::optional<Category> category;
    std::set<std::string> features;
    std::optional<Cost> cost;
    std::optional<std::set<Day>> days;
    bool day_is_equality = false;
    std::optional<int> open_at;
    std::optional<std::pair<int, int>> window;
    std::optional<GeoPoint> dist_point;
    std::optional<double> radius;
    bool ordered = false;
    std::optional<int> limit;
    SourcePosition start;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    QueryIR run() {
        std::vector<SubqueryParts> subs;
        subs.push_back(subquery());
        while (peek_punct(";")) {
            next();
            if (peek().type == Tok::End) break;  // tolerate a trailing semicolon
            subs.push_back(subquery());
        }
        if (peek().type != Tok::End) syntax("expected ';' or end of query");
        return assemble(subs);
    }

private:
    using K = QueryParseError::Kind;

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(i_ + ahead, toks_.size() - 1)];
    }
    const Token& next() {
        const Token& t = peek();
        if (i_ < toks_.size() - 1) ++i_;
        return t;
    }

    [[noreturn]] void syntax(const std::string& msg) const { throw QueryParseError(K::Syntax, peek().pos, msg); }
    [[noreturn]] void schema(const Token& at, const std::string& msg) const {
        throw QueryParseError(K::Schema, at.pos, msg);
    }

    bool peek_punct(std::string_view p, std::size_t ahead = 0) const {
        return peek(ahead).type == Tok::Punct && peek(ahead).text == p;
    }
    bool peek_keyword(std::string_view kw) const {
        return peek().type == Tok::Ident && ascii_lower(peek().text) == ascii_lower(kw);
    }

    void punct(std::string_view p) {
        if (!peek_punct(p)) syntax("expected '" + std::string(p) + "'");
        next();
    }
    void keyword(std::string_view kw) {
        if (!peek_keyword(kw)) syntax("expected " + std::string(kw));
        next();
    }
    const Token& ident() {
        if (peek().type != Tok::Ident) syntax("expected identifier");
        return next();
    }
    const Token& string_lit() {
        if (peek().type != Tok::String) syntax("expected string literal");
        return next();
    }
    int integer() {
        const Token& t = peek();
        if (t.type != Tok::Number || !t.is_integer) syntax("expected integer");
        next();
        int v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || p != t.text.data() + t.text.size()) throw QueryParseError(K::Syntax, t.pos, "bad integer");
        return v;
    }
    double number() {
        const Token& t = peek();
        if (t.type != Tok::Number) syntax("expected number");
        next();
        double v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || p != t.text.data() + t.text.size()) throw QueryParseError(K::Syntax, t.pos, "bad number");
        return v;
    }

    // (var[:Label])
    std::pair<std::string, std::optional<std::string>> node_pattern() {
        punct("(");
        std::string var = ident().text;
        std::optional<std::string> label;
        if (peek_punct(":")) {
            next();
            const Token& lt = ident();
            const auto& labels = schema_manifest().labels;
            if (std::find(labels.begin(), labels.end(), lt.text) == labels.end())
                schema(lt, "unknown label \"" + lt.text + "\"");
            label = lt.text;
        }
        punct(")");
        return {var, label};
    }

    // -[:TYPE]->
    std::string rel_pattern() {
        punct("-");
        punct("[");
        punct(":");
        const Token& et = ident();
        const auto& edges = schema_manifest().edges;
        if (std::find(edges.begin(), edges.end(), et.text) == edges.end())
            schema(et, "unknown relationship type \"" + et.text + "\"");
        punct("]");
        punct("->");
        return et.text;
    }

    void pattern() {
        const Token& start = peek();
        std::map<std::string, std::string> labels;
        std::set<std::pair<std::string, std::string>> rels;  // (edge, target var)
        for (;;) {
            auto [from, from_label] = node_pattern();
            if (from_label) labels[from] = *from_label;
            const auto edge = rel_pattern();
            auto [to, to_label] = node_pattern();
            if (to_label) labels[to] = *to_label;
            if (from != "o") schema(start, "relationships must start at (o)");
            rels.emplace(edge, to);
            if (!peek_punct(",")) break;
            next();
        }
        const std::map<std::string, std::string> want_labels{
            {"o", "Organization"}, {"s", "Service"}, {"l", "Location"}, {"t", "Hours"}};
        const std::set<std::pair<std::string, std::string>> want_rels{
            {"OFFERS", "s"}, {"LOCATED_AT", "l"}, {"OPEN_DURING", "t"}};
        if (labels != want_labels || rels != want_rels)
            schema(start, std::string("pattern must be ") + std::string(kPattern));
    }

    // var.property, with the property checked against the schema
    std::string property_ref() {
        const Token& var = ident();
        punct(".");
        const Token& prop = ident();
        const std::string full = var.text + "." + prop.text;
        const auto& props = schema_manifest().properties;
        if (std::find(props.begin(), props.end(), full) == props.end())
            schema(var, "unknown property \"" + full + "\"");
        return full;
    }

    void predicate(SubqueryParts& q) {
        const Token& at = peek();
        if (at.type == Tok::String) {
            const auto tag = next().text;
            keyword("IN");
            const auto prop = property_ref();
            if (prop != "s.features") schema(at, "IN over a string applies to s.features only");
            if (!is_feature_tag(tag)) schema(at, "feature tag \"" + tag + "\" is not snake_case");
            q.features.insert(tag);
            return;
        }
        if (at.type != Tok::Ident) syntax("expected predicate");
        if (at.text == "overlaps" && peek_punct("(", 1)) {
            next();
            punct("(");
            const Token& v = ident();
            if (v.text != "t") schema(v, "overlaps() takes the hours variable t");
            punct(",");
            const int s = integer();
            punct(",");
            const int e = integer();
            punct(")");
            if (q.window || q.open_at) schema(at, "more than one time predicate");
            if (s < 0 || e > kMinutesPerDay || s >= e) schema(at, "overlaps() needs 0 <= start < end <= 1440");
            q.window = std::make_pair(s, e);
            return;
        }
        if (at.text == "dist" && peek_punct("(", 1)) {
            next();
            punct("(");
            const Token& v = ident();
            if (v.text != "l") schema(v, "dist() takes the location variable l");
            punct(",");
            const double lat = number();
            punct(",");
            const double lon = number();
            punct(")");
            punct("<=");
            const double radius = number();
            if (q.dist_point) schema(at, "more than one distance predicate");
            if (!is_valid(GeoPoint{lat, lon})) schema(at, "dist() point out of range");
            if (!(radius > 0.0)) schema(at, "dist() radius must be positive");
            q.dist_point = GeoPoint{lat, lon};
            q.radius = radius;
            return;
        }
        if (peek_punct("(", 1)) schema(at, "unknown function \"" + at.text + "\"");

        const auto prop = property_ref();
        if (prop == "s.category") {
            punct("=");
            const Token& v = string_lit();
            auto cat = category_from_token(v.text);
            if (!cat) schema(v, "unknown category \"" + v.text + "\"");
            if (q.category) schema(at, "more than one category predicate");
            q.category = cat;
        } else if (prop == "s.cost") {
            punct("=");
            const Token& v = string_lit();
            auto cost = cost_from_token(v.text);
            if (!cost) schema(v, "unknown cost \"" + v.text + "\"");
            if (q.cost) schema(at, "more than one cost predicate");
            q.cost = cost;
        } else if (prop == "t.day") {
            if (q.days) schema(at, "more than one day predicate");
            std::set<Day> days;
            auto day_token = [&] {
                const Token& v = string_lit();
                auto d = day_from_text(v.text);
                if (!d || to_token(*d) != v.text) schema(v, "unknown day \"" + v.text + "\"");
                return *d;
            };
            if (peek_punct("=")) {
                next();
                days.insert(day_token());
                q.day_is_equality = true;
            } else {
                keyword("IN");
                punct("[");
                days.insert(day_token());
                while (peek_punct(",")) {
                    next();
                    days.insert(day_token());
                }
                punct("]");
            }
            q.days = days;
        } else if (prop == "t.open" || prop == "t.close") {
            // "t.open <= m AND t.close > m", in either order
            const bool open_first = prop == "t.open";
            punct(open_first ? "<=" : ">");
            const int m1 = integer();
            keyword("AND");
            const auto other = property_ref();
            if (other != (open_first ? "t.close" : "t.open")) schema(at, "open-at predicate needs t.open and t.close");
            punct(open_first ? ">" : "<=");
            const int m2 = integer();
            if (m1 != m2) schema(at, "open-at predicate must use one minute");
            if (m1 < 0 || m1 > kMinutesPerDay) schema(at, "minute out of range");
            if (q.window || q.open_at) schema(at, "more than one time predicate");
            q.open_at = m1;
        } else {
            schema(at, "property \"" + prop + "\" cannot be filtered on");
        }
    }

    SubqueryParts subquery() {
        SubqueryParts q;
        q.start = peek().pos;
        keyword("MATCH");
        pattern();
        keyword("WHERE");
        predicate(q);
        while (peek_keyword("AND")) {
            next();
            predicate(q);
        }
        keyword("RETURN");
        for (const char* v : {"o", "s", "l", "t"}) {
            if (std::string_view(v) != "o") punct(",");
            const Token& t = ident();
            if (t.text != v) schema(t, "RETURN must be o, s, l, t");
        }
        if (peek_keyword("ORDER")) {
            next();
            keyword("BY");
            const Token& t = ident();
            if (t.text != "dist") schema(t, "ORDER BY supports dist only");
            keyword("ASC");
            q.ordered = true;
        }
        if (peek_keyword("LIMIT")) {
            next();
            const Token& t = peek();
            const int n = integer();
            if (n < 1) schema(t, "LIMIT must be positive");
            q.limit = n;
        }
        return q;
    }

    QueryIR assemble(const std::vector<SubqueryParts>& subs) const {
        QueryIR ir;
        for (std::size_t i = 0; i < subs.size(); ++i) {
            const auto& q = subs[i];
            auto fail = [&](const std::string& msg) { throw QueryParseError(K::Schema, q.start, msg); };
            if (!q.category) fail("subquery requires an s.category predicate");
            if (q.ordered && !q.dist_point) fail("ORDER BY dist requires a dist() predicate");

            TemporalConstraint temporal = AnyTime{};
            if (q.open_at) {
                if (!q.days || q.days->size() != 1 || !q.day_is_equality)
                    fail("open-at predicate requires a single t.day = predicate");
                temporal = OpenAt{*q.days->begin(), *q.open_at};
            } else if (q.window) {
                if (!q.days) fail("overlaps() requires a t.day predicate");
                temporal = OpenDuring{*q.days, q.window->first, q.window->second};
            } else if (q.days) {
                temporal = OpenDuring{*q.days, 0, kMinutesPerDay};
            }

            std::optional<SpatialFilter> spatial;
            if (q.dist_point) spatial = SpatialFilter{SpatialAnchor{*q.dist_point, "", AnchorResolution::Landmark}, *q.radius};
            const int limit = q.limit.value_or(kDefaultLimit);

            if (i == 0) {
                ir.temporal = temporal;
                ir.spatial = spatial;
                ir.limit = limit;
            } else {
                const bool same_spatial =
                    spatial.has_value() == ir.spatial.has_value() &&
                    (!spatial || (spatial->anchor.point == ir.spatial->anchor.point &&
                                  spatial->radius_m == ir.spatial->radius_m));
                if (temporal != ir.temporal || !same_spatial || limit != ir.limit)
                    fail("subqueries must share time, distance and limit predicates");
            }
            ir.requests.push_back(ServiceRequest{*q.category, q.features, q.cost});
        }
        return ir;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

std::string position_text(SourcePosition p) {
    return std::to_string(p.line) + ":" + std::to_string(p.column);
}

}  // namespace

const SchemaManifest& schema_manifest() {
    static const SchemaManifest m{
        {"Organization", "Service", "Location", "Hours"},
        {"OFFERS", "LOCATED_AT", "OPEN_DURING"},
        {"s.category", "s.features", "s.cost", "t.day", "t.open", "t.close"},
        {"overlaps", "dist"},
    };
    return m;
}

QueryParseError::QueryParseError(Kind kind, SourcePosition pos, const std::string& message)
    : std::runtime_error(std::string(kind == Kind::Syntax ? "SyntaxError" : "SchemaViolation") + " at " +
                         position_text(pos) + ": " + message),
      kind_(kind),
      pos_(pos) {}

CompiledQuery compile(const QueryIR& ir) {
    std::string text;
    for (std::size_t i = 0; i < ir.requests.size(); ++i) {
        if (i) text += ";\n";
        text += compile_subquery(ir.requests[i], ir);
    }
    return CompiledQuery{std::move(text), digest(ir)};
}

QueryIR parse(std::string_view text) {
    Lexer lexer(text);
    Parser parser(lexer.run());
    return parser.run();
}

std::size_t ResultSet::total() const noexcept {
    std::size_t n = 0;
    for (const auto& rows : per_request) n += rows.size();
    return n;
}

ResultSet execute(const QueryIR& ir, const Graph& graph) {
    ResultSet out;
    for (const auto& req : ir.requests) {
        std::vector<ResultRow> rows;
        std::map<std::pair<NodeId, NodeId>, std::size_t> index;  // (org, location) -> row
        for (const auto& c : graph.match_candidates(req.category, req.features, req.cost)) {
            const auto key = std::make_pair(c.org->id, c.location->id);
            auto it = index.find(key);
            if (it == index.end()) {
                index.emplace(key, rows.size());
                rows.push_back(ResultRow{c.org, c.location, {c.service}, {}, c.hours, std::nullopt});
            } else {
                rows[it->second].services.push_back(c.service);
            }
        }
        std::vector<ResultRow> open;
        for (auto& row : rows) {
            if (!satisfies(row.all_hours, ir.temporal)) continue;
            row.matched_hours = matching_windows(row.all_hours, ir.temporal);
            open.push_back(std::move(row));
        }

        std::vector<ResultRow> final_rows;
        if (ir.spatial) {
            std::vector<ResultRow> near;
            for (auto& row : open) {
                const double m = haversine_m(ir.spatial->anchor.point, row.location->point);
                if (m <= ir.spatial->radius_m) near.push_back(std::move(row));
            }
            auto ranked = rank_by_distance(ir.spatial->anchor, std::move(near), [](const ResultRow& r) {
                return RankKey{r.location->point, r.org->name, r.org->id.value};
            });
            for (auto& r : ranked) {
                r.item.distance_m = r.meters;
                final_rows.push_back(std::move(r.item));
            }
        } else {
            std::stable_sort(open.begin(), open.end(), [](const ResultRow& a, const ResultRow& b) {
                return std::tie(a.org->name, a.org->id) < std::tie(b.org->name, b.org->id);
            });
            final_rows = std::move(open);
        }
        if (final_rows.size() > static_cast<std::size_t>(ir.limit)) final_rows.resize(static_cast<std::size_t>(ir.limit));
        out.per_request.push_back(std::move(final_rows));
    }
    return out;
}

ResultSet execute_compiled(const CompiledQuery& query, const Graph& graph) {
    return execute(parse(query.text), graph);
}

}  // namespace dreamkg
