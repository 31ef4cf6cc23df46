#include "dbgorilla/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "dbgorilla/error.hpp"
#include "dbgorilla/rng.hpp"

namespace dbgorilla::engine {

using ojson = nlohmann::ordered_json;

std::string to_display(const Value& value) {
    if (const auto* d = std::get_if<double>(&value)) return sql_number(*d);
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    return std::get<bool>(value) ? "true" : "false";
}

ojson to_json(const Value& value) {
    return std::visit([](const auto& v) { return ojson(v); }, value);
}

namespace {

bool type_matches(const Value& v, DataType type) {
    switch (type) {
        case DataType::Number:
            return std::holds_alternative<double>(v);
        case DataType::Text:
            return std::holds_alternative<std::string>(v);
        case DataType::Boolean:
            return std::holds_alternative<bool>(v);
    }
    return false;
}

std::size_t column(const CollectionSchema& schema, const std::string& property) {
    auto idx = schema.index_of(property);
    if (!idx) throw SchemaViolation(schema.name + "." + property, "unknown property");
    return *idx;
}

}  // namespace

void check_rows(const Table& table) {
    const auto& props = table.schema.properties;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const Row& row = table.rows[r];
        if (row.size() != props.size())
            throw SchemaViolation(table.schema.name, "row " + std::to_string(r) + " has " +
                                                         std::to_string(row.size()) + " values, expected " +
                                                         std::to_string(props.size()));
        for (std::size_t c = 0; c < props.size(); ++c)
            if (!type_matches(row[c], props[c].data_type))
                throw SchemaViolation(table.schema.name + "." + props[c].name,
                                      "row " + std::to_string(r) + " value is not " +
                                          std::string(to_string(props[c].data_type)));
    }
}

void Database::add(Table table) {
    check_rows(table);
    std::string name = table.schema.name;
    tables_.insert_or_assign(std::move(name), std::move(table));
}

const Table& Database::table(std::string_view collection) const {
    auto it = tables_.find(collection);
    if (it == tables_.end()) throw Error("no data for collection " + std::string(collection));
    return it->second;
}

bool Database::contains(std::string_view collection) const { return tables_.find(collection) != tables_.end(); }

bool like_match(std::string_view text, std::string_view pattern) {
    auto codepoint_len = [](unsigned char c) -> std::size_t {
        if (c < 0x80) return 1;
        if ((c >> 5) == 0x6) return 2;
        if ((c >> 4) == 0xe) return 3;
        if ((c >> 3) == 0x1e) return 4;
        return 1;
    };
    std::size_t t = 0, p = 0;
    std::size_t star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && pattern[p] == '_') {
            t += std::min(codepoint_len(static_cast<unsigned char>(text[t])), text.size() - t);
            ++p;
        } else if (p < pattern.size() && pattern[p] == '%') {
            star = p++;
            mark = t;
        } else if (p < pattern.size() && pattern[p] == text[t]) {
            ++t;
            ++p;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '%') ++p;
    return p == pattern.size();
}

bool eval_filter(const Row& row, const CollectionSchema& schema, const IntPropertyFilter& f) {
    const double v = std::get<double>(row[column(schema, f.property_name)]);
    switch (f.op) {
        case IntOperator::Eq:
            return v == f.value;
        case IntOperator::Lt:
            return v < f.value;
        case IntOperator::Gt:
            return v > f.value;
        case IntOperator::Le:
            return v <= f.value;
        case IntOperator::Ge:
            return v >= f.value;
    }
    return false;
}

bool eval_filter(const Row& row, const CollectionSchema& schema, const TextPropertyFilter& f) {
    const auto& v = std::get<std::string>(row[column(schema, f.property_name)]);
    return f.op == TextOperator::Eq ? v == f.value : like_match(v, f.value);
}

bool eval_filter(const Row& row, const CollectionSchema& schema, const BooleanPropertyFilter& f) {
    const bool v = std::get<bool>(row[column(schema, f.property_name)]);
    return f.op == BoolOperator::Eq ? v == f.value : v != f.value;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            current += static_cast<char>(std::tolower(u));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<double> relevance_scores(std::string_view query, std::span<const std::string> texts) {
    std::vector<std::string> terms = tokenize(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    std::vector<std::vector<std::string>> docs;
    docs.reserve(texts.size());
    for (const auto& t : texts) docs.push_back(tokenize(t));

    std::vector<double> scores(texts.size(), 0.0);
    const double n = static_cast<double>(texts.size());
    for (const auto& term : terms) {
        std::size_t df = 0;
        for (const auto& d : docs)
            if (std::find(d.begin(), d.end(), term) != d.end()) ++df;
        if (df == 0) continue;
        const double idf = std::log(1.0 + n / static_cast<double>(df));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const auto tf = std::count(docs[i].begin(), docs[i].end(), term);
            scores[i] += static_cast<double>(tf) * idf;
        }
    }
    return scores;
}

std::vector<Row> search_rank(std::string_view query, std::span<const Row> rows,
                             const CollectionSchema& schema, std::size_t limit) {
    if (tokenize(query).empty()) return {rows.begin(), rows.end()};
    const std::size_t col = column(schema, schema.searchable_property().name);
    std::vector<std::string> texts;
    texts.reserve(rows.size());
    for (const auto& r : rows) texts.push_back(std::get<std::string>(r[col]));
    const auto scores = relevance_scores(query, texts);

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (scores[i] > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    if (order.size() > limit) order.resize(limit);

    std::vector<Row> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back(rows[i]);
    return out;
}

namespace {

std::vector<double> as_numbers(std::span<const Value> values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(std::get<double>(v));
    return out;
}

}  // namespace

AggregateValue aggregate(std::span<const Value> values, IntMetric metric) {
    if (metric == IntMetric::Type) return AggregateValue::of_text(std::string(to_string(DataType::Number)));
    if (metric == IntMetric::Count) return AggregateValue::of_count(values.size());
    std::vector<double> xs = as_numbers(values);
    if (metric == IntMetric::Sum) {
        double sum = 0.0;
        for (double x : xs) sum += x;
        return AggregateValue::of_number(sum);
    }
    if (xs.empty()) throw EmptyAggregate(std::string(to_string(metric)));
    switch (metric) {
        case IntMetric::Min:
            return AggregateValue::of_number(*std::min_element(xs.begin(), xs.end()));
        case IntMetric::Max:
            return AggregateValue::of_number(*std::max_element(xs.begin(), xs.end()));
        case IntMetric::Mean: {
            double sum = 0.0;
            for (double x : xs) sum += x;
            return AggregateValue::of_number(sum / static_cast<double>(xs.size()));
        }
        case IntMetric::Median: {
            std::sort(xs.begin(), xs.end());
            const std::size_t n = xs.size();
            return AggregateValue::of_number(n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0);
        }
        case IntMetric::Mode: {
            std::map<double, std::size_t> freq;
            for (double x : xs) ++freq[x];
            auto best = freq.begin();
            for (auto it = freq.begin(); it != freq.end(); ++it)
                if (it->second > best->second) best = it;
            return AggregateValue::of_number(best->first);
        }
        default:
            break;
    }
    throw Error("unhandled integer metric");
}

Aggregated aggregate(std::span<const Value> values, TextMetric metric, std::int64_t limit) {
    switch (metric) {
        case TextMetric::Type:
            return AggregateValue::of_text(std::string(to_string(DataType::Text)));
        case TextMetric::Count:
            return AggregateValue::of_count(values.size());
        case TextMetric::TopOccurrences: {
            std::map<std::string, std::uint64_t> freq;
            for (const auto& v : values) ++freq[std::get<std::string>(v)];
            TopOccurrences top;
            top.reserve(freq.size());
            for (auto& [value, count] : freq) top.push_back({value, count});
            // freq is already value-ascending; stable sort keeps that for ties.
            std::stable_sort(top.begin(), top.end(),
                             [](const auto& a, const auto& b) { return a.count > b.count; });
            if (limit > 0 && top.size() > static_cast<std::size_t>(limit)) top.resize(static_cast<std::size_t>(limit));
            return top;
        }
    }
    throw Error("unhandled text metric");
}

AggregateValue aggregate(std::span<const Value> values, BoolMetric metric) {
    std::uint64_t trues = 0;
    for (const auto& v : values) trues += std::get<bool>(v) ? 1 : 0;
    const std::uint64_t total = values.size();
    const std::uint64_t falses = total - trues;
    switch (metric) {
        case BoolMetric::Type:
            return AggregateValue::of_text(std::string(to_string(DataType::Boolean)));
        case BoolMetric::Count:
            return AggregateValue::of_count(total);
        case BoolMetric::TotalTrue:
            return AggregateValue::of_count(trues);
        case BoolMetric::TotalFalse:
            return AggregateValue::of_count(falses);
        case BoolMetric::PercentageTrue:
            return AggregateValue::of_percentage(total == 0 ? 0.0 : 100.0 * double(trues) / double(total));
        case BoolMetric::PercentageFalse:
            return AggregateValue::of_percentage(total == 0 ? 0.0 : 100.0 * double(falses) / double(total));
    }
    throw Error("unhandled boolean metric");
}

namespace {

int aggregation_count(const QueryRequest& q) {
    return int(q.integer_property_aggregation.has_value()) + int(q.text_property_aggregation.has_value()) +
           int(q.boolean_property_aggregation.has_value());
}

std::vector<Value> column_values(const std::vector<Row>& rows, std::size_t col) {
    std::vector<Value> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[col]);
    return out;
}

GroupResult reduce(const QueryRequest& q, const CollectionSchema& schema, std::vector<Row> rows,
                   const ExecuteOptions& options) {
    if (const auto& a = q.integer_property_aggregation)
        return aggregate(column_values(rows, column(schema, a->property_name)), a->metric);
    if (const auto& a = q.text_property_aggregation) {
        auto out = aggregate(column_values(rows, column(schema, a->property_name)), a->metric,
                             a->top_occurrences_limit.value_or(options.default_top_occurrences));
        return std::visit([](auto&& v) -> GroupResult { return std::move(v); }, std::move(out));
    }
    if (const auto& a = q.boolean_property_aggregation)
        return aggregate(column_values(rows, column(schema, a->property_name)), a->metric);
    return rows;
}

}  // namespace

ResultSet execute(const ValidatedQuery& validated, const Table& table, const ExecuteOptions& options) {
    const QueryRequest& q = validated.query();
    const CollectionSchema& schema = validated.collection();
    if (table.schema != schema)
        throw SchemaViolation(schema.name, "table data does not match the query's collection schema");
    if (aggregation_count(q) > 1) throw MultipleAggregationsPresent();

    std::vector<Row> rows;
    for (const auto& row : table.rows) {
        if (q.integer_property_filter && !eval_filter(row, schema, *q.integer_property_filter)) continue;
        if (q.text_property_filter && !eval_filter(row, schema, *q.text_property_filter)) continue;
        if (q.boolean_property_filter && !eval_filter(row, schema, *q.boolean_property_filter)) continue;
        rows.push_back(row);
    }
    if (q.search_query) rows = search_rank(*q.search_query, rows, schema, options.search_limit);

    if (!q.groupby_property) {
        GroupResult r = reduce(q, schema, std::move(rows), options);
        return std::visit([](auto&& v) { return ResultSet{std::move(v)}; }, std::move(r));
    }

    const std::size_t key_col = column(schema, *q.groupby_property);
    std::map<Value, std::vector<Row>> partitions;
    for (auto& row : rows) {
        Value key = row[key_col];
        partitions[std::move(key)].push_back(std::move(row));
    }
    std::vector<Group> groups;
    groups.reserve(partitions.size());
    for (auto& [key, members] : partitions) groups.push_back({key, reduce(q, schema, std::move(members), options)});
    return ResultSet{std::move(groups)};
}

ResultSet execute(const ValidatedQuery& query, const Database& db, const ExecuteOptions& options) {
    return execute(query, db.table(query.query().collection_name), options);
}

namespace {

ojson aggregate_json(const AggregateValue& v) {
    switch (v.kind) {
        case AggregateValue::Kind::Count:
            return {{"count", v.count}};
        case AggregateValue::Kind::Number:
            return {{"value", v.number}};
        case AggregateValue::Kind::Text:
            return {{"type", v.text}};
        case AggregateValue::Kind::Percentage:
            return {{"percentage", v.number}};
    }
    return {};
}

ojson top_json(const TopOccurrences& top) {
    ojson out = ojson::array();
    for (const auto& t : top) out.push_back({{"value", t.value}, {"count", t.count}});
    return out;
}

ojson rows_json(const std::vector<Row>& rows, const CollectionSchema& schema) {
    ojson out = ojson::array();
    for (const auto& row : rows) {
        ojson obj;
        for (std::size_t i = 0; i < row.size(); ++i) obj[schema.properties[i].name] = engine::to_json(row[i]);
        out.push_back(std::move(obj));
    }
    return out;
}

}  // namespace

ojson to_json(const ResultSet& result, const CollectionSchema& schema) {
    struct Visitor {
        const CollectionSchema& schema;
        ojson operator()(const std::vector<Row>& rows) const { return {{"objects", rows_json(rows, schema)}}; }
        ojson operator()(const AggregateValue& v) const { return {{"aggregate", aggregate_json(v)}}; }
        ojson operator()(const TopOccurrences& t) const { return {{"top_occurrences", top_json(t)}}; }
        ojson operator()(const std::vector<Group>& groups) const {
            ojson arr = ojson::array();
            for (const auto& g : groups) {
                ojson entry;
                entry["group"] = engine::to_json(g.key);
                entry["result"] = std::visit(
                    [&](const auto& r) -> ojson {
                        using R = std::decay_t<decltype(r)>;
                        if constexpr (std::is_same_v<R, std::vector<Row>>)
                            return {{"objects", rows_json(r, schema)}};
                        else if constexpr (std::is_same_v<R, AggregateValue>)
                            return {{"aggregate", aggregate_json(r)}};
                        else
                            return {{"top_occurrences", top_json(r)}};
                    },
                    g.result);
                arr.push_back(std::move(entry));
            }
            return {{"groups", std::move(arr)}};
        }
    };
    return std::visit(Visitor{schema}, result.value);
}

// ---------------------------------------------------------------------------
// SQL

std::string sql_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw Error("cannot format number");
    return std::string(buf, ptr);
}

namespace {

const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words{
        "ALL",  "AND",   "AS",     "ASC",   "BETWEEN", "BY",     "CASE",  "CREATE", "DELETE", "DESC",
        "DISTINCT", "DROP", "ELSE", "END",  "EXISTS",  "FALSE",  "FROM",  "GROUP",  "HAVING", "IN",
        "INSERT", "INTO", "IS",    "JOIN",  "LIKE",    "LIMIT",  "NOT",   "NULL",   "OFFSET", "ON",
        "OR",   "ORDER", "SELECT", "SET",   "TABLE",   "THEN",   "TRUE",  "UNION",  "UPDATE", "VALUES",
        "WHEN", "WHERE", "WITH"};
    return words;
}

std::string ident(const std::string& name) {
    bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
    for (char c : name) plain = plain && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
    std::string upper = name;
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (plain && !reserved_words().count(upper)) return name;
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string literal(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

std::string where_clause(const QueryRequest& q) {
    std::vector<std::string> terms;
    if (const auto& f = q.integer_property_filter)
        terms.push_back(ident(f->property_name) + " " + std::string(to_string(f->op)) + " " + sql_number(f->value));
    if (const auto& f = q.text_property_filter)
        terms.push_back(ident(f->property_name) + (f->op == TextOperator::Eq ? " = " : " LIKE ") + literal(f->value));
    if (const auto& f = q.boolean_property_filter)
        terms.push_back(ident(f->property_name) + (f->op == BoolOperator::Eq ? " = " : " <> ") +
                        (f->value ? "TRUE" : "FALSE"));
    if (terms.empty()) return {};
    std::string out = " WHERE ";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += " AND ";
        out += terms[i];
    }
    return out;
}

// Aggregates expressible as one expression over the (grouped) rows.
std::optional<std::string> simple_aggregate(const QueryRequest& q) {
    if (const auto& a = q.integer_property_aggregation) {
        const std::string p = ident(a->property_name);
        switch (a->metric) {
            case IntMetric::Count: return "COUNT(" + p + ")";
            case IntMetric::Min: return "MIN(" + p + ")";
            case IntMetric::Max: return "MAX(" + p + ")";
            case IntMetric::Mean: return "AVG(" + p + ")";
            case IntMetric::Sum: return "COALESCE(SUM(" + p + "), 0)";
            case IntMetric::Type: throw UnsupportedMetricForDialect("TYPE");
            default: return std::nullopt;
        }
    }
    if (const auto& a = q.text_property_aggregation) {
        switch (a->metric) {
            case TextMetric::Count: return "COUNT(" + ident(a->property_name) + ")";
            case TextMetric::Type: throw UnsupportedMetricForDialect("TYPE");
            default: return std::nullopt;
        }
    }
    if (const auto& a = q.boolean_property_aggregation) {
        const std::string p = ident(a->property_name);
        const std::string is_true = "CASE WHEN " + p + " THEN 1 ELSE 0 END";
        const std::string is_false = "CASE WHEN " + p + " THEN 0 ELSE 1 END";
        switch (a->metric) {
            case BoolMetric::Count: return "COUNT(" + p + ")";
            case BoolMetric::Type: throw UnsupportedMetricForDialect("TYPE");
            case BoolMetric::TotalTrue: return "COALESCE(SUM(" + is_true + "), 0)";
            case BoolMetric::TotalFalse: return "COALESCE(SUM(" + is_false + "), 0)";
            case BoolMetric::PercentageTrue: return "COALESCE(100.0 * AVG(" + is_true + "), 0)";
            case BoolMetric::PercentageFalse: return "COALESCE(100.0 * AVG(" + is_false + "), 0)";
        }
    }
    return std::nullopt;
}

}  // namespace

std::string compile_to_sql(const ValidatedQuery& validated, SqlDialect) {
    const QueryRequest& q = validated.query();
    if (q.search_query) throw SearchNotCompilable();
    if (aggregation_count(q) > 1) throw MultipleAggregationsPresent();

    const std::string table = ident(q.collection_name);
    const std::string where = where_clause(q);
    const std::optional<std::string> group =
        q.groupby_property ? std::optional(ident(*q.groupby_property)) : std::nullopt;

    if (aggregation_count(q) == 0) {
        std::string sql = "SELECT * FROM " + table + where;
        if (group) sql += " ORDER BY " + *group;
        return sql;
    }

    if (auto expr = simple_aggregate(q)) {
        if (!group) return "SELECT " + *expr + " FROM " + table + where;
        return "SELECT " + *group + ", " + *expr + " FROM " + table + where + " GROUP BY " + *group +
               " ORDER BY " + *group;
    }

    // MEDIAN, MODE and TOP_OCCURRENCES go through window functions.
    std::string value;
    if (q.integer_property_aggregation) value = ident(q.integer_property_aggregation->property_name);
    else value = ident(q.text_property_aggregation->property_name);

    const std::string partition = group ? "PARTITION BY " + *group + " " : "";
    const std::string grp_select = group ? *group + " AS grp, " : "";
    const std::string grp_out = group ? "grp, " : "";
    const std::string grp_group = group ? *group + ", " : "";
    const std::string grp_order = group ? " ORDER BY grp" : "";

    if (q.integer_property_aggregation && q.integer_property_aggregation->metric == IntMetric::Median) {
        std::string sql = "SELECT " + grp_out + "AVG(val) FROM (SELECT " + grp_select + value +
                          " AS val, ROW_NUMBER() OVER (" + partition + "ORDER BY " + value +
                          ") AS rn, COUNT(*) OVER (" + (group ? "PARTITION BY " + *group : std::string()) +
                          ") AS cnt FROM " + table + where +
                          ") AS ranked WHERE rn IN ((cnt + 1) / 2, (cnt + 2) / 2)";
        if (group) sql += " GROUP BY grp ORDER BY grp";
        return sql;
    }
    if (q.integer_property_aggregation && q.integer_property_aggregation->metric == IntMetric::Mode) {
        if (!group)
            return "SELECT val FROM (SELECT " + value + " AS val, COUNT(*) AS freq FROM " + table + where +
                   " GROUP BY " + value + ") AS counted ORDER BY freq DESC, val ASC LIMIT 1";
        return "SELECT grp, val FROM (SELECT " + grp_select + value + " AS val, ROW_NUMBER() OVER (" +
               partition + "ORDER BY COUNT(*) DESC, " + value + " ASC) AS rn FROM " + table + where +
               " GROUP BY " + grp_group + value + ") AS ranked WHERE rn = 1 ORDER BY grp";
    }
    // TOP_OCCURRENCES
    const std::int64_t limit = q.text_property_aggregation->top_occurrences_limit.value_or(5);
    if (!group)
        return "SELECT " + value + ", COUNT(*) AS occurrences FROM " + table + where + " GROUP BY " + value +
               " ORDER BY occurrences DESC, " + value + " ASC LIMIT " + std::to_string(limit);
    return "SELECT grp, val, occurrences FROM (SELECT " + grp_select + value +
           " AS val, COUNT(*) AS occurrences, ROW_NUMBER() OVER (" + partition + "ORDER BY COUNT(*) DESC, " +
           value + " ASC) AS rn FROM " + table + where + " GROUP BY " + grp_group + value +
           ") AS ranked WHERE rn <= " + std::to_string(limit) + grp_order + ", rn";
}

// ---------------------------------------------------------------------------
// Seeding

Table seed_table(const UseCase& use_case, const CollectionSchema& collection, std::uint64_t seed,
                 std::size_t rows, const ValueCatalog* catalog) {
    const ValueCatalog& values = catalog ? *catalog : catalog_for(use_case);
    Rng rng(mix_seed(seed, use_case.name + "/" + collection.name));
    std::vector<PropertyValues> specs;
    for (const auto& p : collection.properties) specs.push_back(values.lookup(collection.name, p));

    Table table{collection, {}};
    table.rows.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        Row row;
        for (std::size_t c = 0; c < collection.properties.size(); ++c) {
            const auto& p = collection.properties[c];
            const auto& spec = specs[c];
            switch (p.data_type) {
                case DataType::Number: {
                    const auto steps = static_cast<std::uint64_t>(std::floor((spec.max - spec.min) / spec.step + 1e-9));
                    const double v = spec.min + static_cast<double>(rng.below(steps + 1)) * spec.step;
                    row.emplace_back(std::round(v * 1e6) / 1e6);
                    break;
                }
                case DataType::Boolean:
                    row.emplace_back(rng.coin());
                    break;
                case DataType::Text: {
                    std::string text = rng.pick(spec.samples);
                    if (p.searchable && spec.samples.size() > 1 && rng.coin()) {
                        const auto& extra = rng.pick(spec.samples);
                        if (extra != text) text += ", " + extra;
                    }
                    row.emplace_back(std::move(text));
                    break;
                }
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

Database seed_database(const UseCase& use_case, std::uint64_t seed, std::size_t rows) {
    Database db;
    for (const auto& c : use_case.collections) db.add(seed_table(use_case, c, seed, rows));
    return db;
}

ojson to_json(const Database& db) {
    ojson out;
    for (const auto& [name, table] : db.tables()) out[name] = rows_json(table.rows, table.schema);
    return out;
}

Database database_from_json(const ojson& doc, const UseCase& use_case) {
    if (!doc.is_object()) throw ParseError("seed data must be an object keyed by collection");
    Database db;
    for (const auto& collection : use_case.collections) {
        auto it = doc.find(collection.name);
        if (it == doc.end()) continue;
        if (!it->is_array()) throw ParseError(collection.name + ": rows must be an array");
        Table table{collection, {}};
        for (const auto& obj : *it) {
            if (!obj.is_object()) throw ParseError(collection.name + ": row must be an object");
            Row row;
            for (const auto& p : collection.properties) {
                auto v = obj.find(p.name);
                if (v == obj.end() || v->is_null())
                    throw SchemaViolation(collection.name + "." + p.name, "missing field in seed row");
                switch (p.data_type) {
                    case DataType::Number:
                        if (!v->is_number()) throw SchemaViolation(collection.name + "." + p.name, "expected number");
                        row.emplace_back(v->get<double>());
                        break;
                    case DataType::Text:
                        if (!v->is_string()) throw SchemaViolation(collection.name + "." + p.name, "expected text");
                        row.emplace_back(v->get<std::string>());
                        break;
                    case DataType::Boolean:
                        if (!v->is_boolean()) throw SchemaViolation(collection.name + "." + p.name, "expected boolean");
                        row.emplace_back(v->get<bool>());
                        break;
                }
            }
            table.rows.push_back(std::move(row));
        }
        db.add(std::move(table));
    }
    return db;
}

}  // namespace dbgorilla::engine
