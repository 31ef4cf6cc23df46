#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dbgorilla/error.hpp"
#include "dbgorilla/schema.hpp"

namespace dbgorilla {

enum class IntOperator { Eq, Lt, Gt, Le, Ge };
enum class TextOperator { Eq, Like };
enum class BoolOperator { Eq, Ne };

enum class IntMetric { Count, Type, Min, Max, Mean, Median, Mode, Sum };
enum class TextMetric { Count, Type, TopOccurrences };
enum class BoolMetric { Count, Type, TotalTrue, TotalFalse, PercentageTrue, PercentageFalse };

// Wire spellings, exactly as they appear in the tool enums.
std::string_view to_string(IntOperator op);
std::string_view to_string(TextOperator op);
std::string_view to_string(BoolOperator op);
std::string_view to_string(IntMetric metric);
std::string_view to_string(TextMetric metric);
std::string_view to_string(BoolMetric metric);

const std::vector<std::string>& int_operator_names();
const std::vector<std::string>& text_operator_names();
const std::vector<std::string>& bool_operator_names();
const std::vector<std::string>& int_metric_names();
const std::vector<std::string>& text_metric_names();
const std::vector<std::string>& bool_metric_names();

struct IntPropertyFilter {
    std::string property_name;
    IntOperator op = IntOperator::Eq;
    double value = 0.0;
    bool operator==(const IntPropertyFilter&) const = default;
};

struct TextPropertyFilter {
    std::string property_name;
    TextOperator op = TextOperator::Eq;
    std::string value;
    bool operator==(const TextPropertyFilter&) const = default;
};

struct BooleanPropertyFilter {
    std::string property_name;
    BoolOperator op = BoolOperator::Eq;
    bool value = true;
    bool operator==(const BooleanPropertyFilter&) const = default;
};

struct IntAggregation {
    std::string property_name;
    IntMetric metric = IntMetric::Count;
    bool operator==(const IntAggregation&) const = default;
};

struct TextAggregation {
    std::string property_name;
    TextMetric metric = TextMetric::Count;
    // Only meaningful with TOP_OCCURRENCES.
    std::optional<std::int64_t> top_occurrences_limit;
    bool operator==(const TextAggregation&) const = default;
};

struct BooleanAggregation {
    std::string property_name;
    BoolMetric metric = BoolMetric::Count;
    bool operator==(const BooleanAggregation&) const = default;
};

struct QueryRequest {
    std::string collection_name;
    std::optional<std::string> search_query;
    std::optional<IntPropertyFilter> integer_property_filter;
    std::optional<TextPropertyFilter> text_property_filter;
    std::optional<BooleanPropertyFilter> boolean_property_filter;
    std::optional<IntAggregation> integer_property_aggregation;
    std::optional<TextAggregation> text_property_aggregation;
    std::optional<BooleanAggregation> boolean_property_aggregation;
    std::optional<std::string> groupby_property;

    bool operator==(const QueryRequest&) const = default;
};

// The nine argument names, in declaration order.
const std::vector<std::string>& query_parameter_names();

// Absent arguments are omitted; keys follow query_parameter_names() order.
nlohmann::ordered_json to_json(const QueryRequest& query);
std::string serialize(const QueryRequest& query);

// Strict about types and enum spellings; null is read as absent. Unknown
// keys are rejected unless listed in `ignored_keys`.
QueryRequest query_from_json(const nlohmann::ordered_json& args,
                             const std::vector<std::string>& ignored_keys = {});
QueryRequest parse_query(std::string_view text);

enum class OperandKind { None, Int, Text, Bool };
std::string_view to_string(OperandKind kind);
std::optional<OperandKind> parse_operand_kind(std::string_view name);

// One point of the operator grid: search? x filter kind x aggregation kind x groupby?.
struct CombinationId {
    bool search = false;
    OperandKind filter = OperandKind::None;
    OperandKind aggregation = OperandKind::None;
    bool groupby = false;

    bool empty() const {
        return !search && filter == OperandKind::None && aggregation == OperandKind::None && !groupby;
    }
    int argument_count() const {
        return int(search) + int(filter != OperandKind::None) +
               int(aggregation != OperandKind::None) + int(groupby);
    }
    auto operator<=>(const CombinationId&) const = default;
};

// "1-int-none-0" style label.
std::string to_string(const CombinationId& id);
nlohmann::ordered_json to_json(const CombinationId& id);
CombinationId combination_from_json(const nlohmann::ordered_json& doc);

enum class ComplexityBucket { Simple, Moderate, Complex };
std::string_view to_string(ComplexityBucket bucket);

struct ValidationIssue {
    enum class Kind { UnknownCollection, UnknownProperty, TypeMismatch, InvalidArgument };
    Kind kind;
    std::string collection;
    std::string property;
    std::optional<DataType> expected;
    std::optional<DataType> actual;
    std::string detail;

    std::string message() const;
};

struct ValidationResult;
// Collects every issue rather than stopping at the first.
ValidationResult validate(const QueryRequest& query, const UseCase& use_case);

// A query checked against its use case. Carries its own copy of the target
// collection schema so it can outlive the UseCase it was validated against.
class ValidatedQuery {
public:
    const QueryRequest& query() const { return query_; }
    const CollectionSchema& collection() const { return collection_; }

private:
    friend ValidationResult validate(const QueryRequest&, const UseCase&);
    ValidatedQuery(QueryRequest query, CollectionSchema collection)
        : query_(std::move(query)), collection_(std::move(collection)) {}

    QueryRequest query_;
    CollectionSchema collection_;
};

struct ValidationResult {
    std::optional<ValidatedQuery> validated;
    std::vector<ValidationIssue> issues;

    bool ok() const { return validated.has_value(); }
    std::string summary() const;
};

class ValidationFailed : public Error {
public:
    explicit ValidationFailed(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

// Throws ValidationFailed.
ValidatedQuery validate_or_throw(const QueryRequest& query, const UseCase& use_case);

// Case-folds and whitespace-collapses search_query, trims text filter values.
QueryRequest canonicalize(const QueryRequest& query);
std::string fold_search_text(std::string_view text);

int optional_argument_count(const QueryRequest& query);
// Throws DegenerateQuery when no optional argument is present.
ComplexityBucket complexity(const QueryRequest& query);
ComplexityBucket complexity(const CombinationId& id);

// Throws MultipleFiltersPresent / MultipleAggregationsPresent / DegenerateQuery.
CombinationId operator_signature(const QueryRequest& query);

}  // namespace dbgorilla
