#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dbgorilla/catalog.hpp"
#include "dbgorilla/query.hpp"
#include "dbgorilla/schema.hpp"

namespace dbgorilla::engine {

// NUMBER -> double, TEXT -> string, BOOLEAN -> bool.
using Value = std::variant<double, std::string, bool>;
// One value per property, in schema order.
using Row = std::vector<Value>;

std::string to_display(const Value& value);
nlohmann::ordered_json to_json(const Value& value);

struct Table {
    CollectionSchema schema;
    std::vector<Row> rows;
};

// Throws SchemaViolation when a row has the wrong arity or value types.
void check_rows(const Table& table);

class Database {
public:
    void add(Table table);
    const Table& table(std::string_view collection) const;
    bool contains(std::string_view collection) const;
    const std::map<std::string, Table, std::less<>>& tables() const { return tables_; }

private:
    std::map<std::string, Table, std::less<>> tables_;
};

struct TopOccurrence {
    std::string value;
    std::uint64_t count = 0;
    bool operator==(const TopOccurrence&) const = default;
};
using TopOccurrences = std::vector<TopOccurrence>;

struct AggregateValue {
    enum class Kind { Count, Number, Text, Percentage };
    Kind kind = Kind::Count;
    std::uint64_t count = 0;
    double number = 0.0;
    std::string text;

    static AggregateValue of_count(std::uint64_t n) { return {Kind::Count, n, 0.0, {}}; }
    static AggregateValue of_number(double x) { return {Kind::Number, 0, x, {}}; }
    static AggregateValue of_text(std::string s) { return {Kind::Text, 0, 0.0, std::move(s)}; }
    static AggregateValue of_percentage(double p) { return {Kind::Percentage, 0, p, {}}; }

    bool operator==(const AggregateValue&) const = default;
};

using Aggregated = std::variant<AggregateValue, TopOccurrences>;
using GroupResult = std::variant<std::vector<Row>, AggregateValue, TopOccurrences>;

struct Group {
    Value key;
    GroupResult result;
    bool operator==(const Group&) const = default;
};

// Ranked objects, a scalar, top occurrences, or groups ordered by key.
struct ResultSet {
    std::variant<std::vector<Row>, AggregateValue, TopOccurrences, std::vector<Group>> value;
    bool operator==(const ResultSet&) const = default;
};

nlohmann::ordered_json to_json(const ResultSet& result, const CollectionSchema& schema);

struct ExecuteOptions {
    std::size_t search_limit = 10;
    std::int64_t default_top_occurrences = 5;
};

// SQL LIKE: % matches any run, _ matches one character; case-sensitive.
bool like_match(std::string_view text, std::string_view pattern);

bool eval_filter(const Row& row, const CollectionSchema& schema, const IntPropertyFilter& filter);
bool eval_filter(const Row& row, const CollectionSchema& schema, const TextPropertyFilter& filter);
bool eval_filter(const Row& row, const CollectionSchema& schema, const BooleanPropertyFilter& filter);

// Lowercased alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

// TF-IDF relevance of each text against the query, idf = ln(1 + N / df)
// over the given texts.
std::vector<double> relevance_scores(std::string_view query, std::span<const std::string> texts);

// Rows with positive relevance over the searchable property, best first,
// ties in input order, at most `limit`. A query without terms is a no-op
// and returns every row unchanged.
std::vector<Row> search_rank(std::string_view query, std::span<const Row> rows,
                             const CollectionSchema& schema, std::size_t limit);

// `values` must all carry the alternative matching `type`.
// Throws EmptyAggregate for MIN/MAX/MEAN/MEDIAN/MODE over no values.
AggregateValue aggregate(std::span<const Value> values, IntMetric metric);
Aggregated aggregate(std::span<const Value> values, TextMetric metric, std::int64_t limit = 5);
AggregateValue aggregate(std::span<const Value> values, BoolMetric metric);

// Filters (all present filters must hold) -> search -> aggregate, with the
// aggregate computed per group when groupby is present. With search and
// aggregation together, the aggregate covers the top-ranked rows.
ResultSet execute(const ValidatedQuery& query, const Table& table, const ExecuteOptions& options = {});
ResultSet execute(const ValidatedQuery& query, const Database& db, const ExecuteOptions& options = {});

enum class SqlDialect { Ansi };

// One SELECT statement, no trailing semicolon. LIKE is assumed
// case-sensitive. Throws SearchNotCompilable, UnsupportedMetricForDialect.
std::string compile_to_sql(const ValidatedQuery& query, SqlDialect dialect = SqlDialect::Ansi);

std::string sql_number(double value);

// Deterministic rows keyed by (use case, collection, seed).
Table seed_table(const UseCase& use_case, const CollectionSchema& collection, std::uint64_t seed,
                 std::size_t rows = 50, const ValueCatalog* catalog = nullptr);
Database seed_database(const UseCase& use_case, std::uint64_t seed, std::size_t rows = 50);

// {"<collection>": [ {"<property>": value, ...}, ... ], ...}
nlohmann::ordered_json to_json(const Database& db);
Database database_from_json(const nlohmann::ordered_json& doc, const UseCase& use_case);

}  // namespace dbgorilla::engine
