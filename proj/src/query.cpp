#include "dbgorilla/query.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace dbgorilla {

using ojson = nlohmann::ordered_json;

namespace {

template <typename Enum, std::size_t N>
struct EnumNames {
    std::array<std::string_view, N> names;

    std::string_view name(Enum e) const { return names[static_cast<std::size_t>(e)]; }
    std::optional<Enum> parse(std::string_view s) const {
        for (std::size_t i = 0; i < N; ++i)
            if (names[i] == s) return static_cast<Enum>(i);
        return std::nullopt;
    }
    std::vector<std::string> list() const { return {names.begin(), names.end()}; }
};

constexpr EnumNames<IntOperator, 5> kIntOps{{"=", "<", ">", "<=", ">="}};
constexpr EnumNames<TextOperator, 2> kTextOps{{"=", "LIKE"}};
constexpr EnumNames<BoolOperator, 2> kBoolOps{{"=", "!="}};
constexpr EnumNames<IntMetric, 8> kIntMetrics{
    {"COUNT", "TYPE", "MIN", "MAX", "MEAN", "MEDIAN", "MODE", "SUM"}};
constexpr EnumNames<TextMetric, 3> kTextMetrics{{"COUNT", "TYPE", "TOP_OCCURRENCES"}};
constexpr EnumNames<BoolMetric, 6> kBoolMetrics{
    {"COUNT", "TYPE", "TOTAL_TRUE", "TOTAL_FALSE", "PERCENTAGE_TRUE", "PERCENTAGE_FALSE"}};
constexpr EnumNames<OperandKind, 4> kOperandKinds{{"none", "int", "text", "bool"}};

}  // namespace

std::string_view to_string(IntOperator op) { return kIntOps.name(op); }
std::string_view to_string(TextOperator op) { return kTextOps.name(op); }
std::string_view to_string(BoolOperator op) { return kBoolOps.name(op); }
std::string_view to_string(IntMetric m) { return kIntMetrics.name(m); }
std::string_view to_string(TextMetric m) { return kTextMetrics.name(m); }
std::string_view to_string(BoolMetric m) { return kBoolMetrics.name(m); }
std::string_view to_string(OperandKind k) { return kOperandKinds.name(k); }
std::optional<OperandKind> parse_operand_kind(std::string_view s) { return kOperandKinds.parse(s); }

const std::vector<std::string>& int_operator_names() {
    static const auto v = kIntOps.list();
    return v;
}
const std::vector<std::string>& text_operator_names() {
    static const auto v = kTextOps.list();
    return v;
}
const std::vector<std::string>& bool_operator_names() {
    static const auto v = kBoolOps.list();
    return v;
}
const std::vector<std::string>& int_metric_names() {
    static const auto v = kIntMetrics.list();
    return v;
}
const std::vector<std::string>& text_metric_names() {
    static const auto v = kTextMetrics.list();
    return v;
}
const std::vector<std::string>& bool_metric_names() {
    static const auto v = kBoolMetrics.list();
    return v;
}

const std::vector<std::string>& query_parameter_names() {
    static const std::vector<std::string> names{
        "collection_name",           "search_query",
        "integer_property_filter",   "text_property_filter",
        "boolean_property_filter",   "integer_property_aggregation",
        "text_property_aggregation", "boolean_property_aggregation",
        "groupby_property"};
    return names;
}

ojson to_json(const QueryRequest& q) {
    ojson out;
    out["collection_name"] = q.collection_name;
    if (q.search_query) out["search_query"] = *q.search_query;
    if (const auto& f = q.integer_property_filter)
        out["integer_property_filter"] = {{"property_name", f->property_name},
                                          {"operator", std::string(to_string(f->op))},
                                          {"value", f->value}};
    if (const auto& f = q.text_property_filter)
        out["text_property_filter"] = {{"property_name", f->property_name},
                                       {"operator", std::string(to_string(f->op))},
                                       {"value", f->value}};
    if (const auto& f = q.boolean_property_filter)
        out["boolean_property_filter"] = {{"property_name", f->property_name},
                                          {"operator", std::string(to_string(f->op))},
                                          {"value", f->value}};
    if (const auto& a = q.integer_property_aggregation)
        out["integer_property_aggregation"] = {{"property_name", a->property_name},
                                               {"metrics", std::string(to_string(a->metric))}};
    if (const auto& a = q.text_property_aggregation) {
        ojson agg = {{"property_name", a->property_name},
                     {"metrics", std::string(to_string(a->metric))}};
        if (a->top_occurrences_limit) agg["top_occurrences_limit"] = *a->top_occurrences_limit;
        out["text_property_aggregation"] = std::move(agg);
    }
    if (const auto& a = q.boolean_property_aggregation)
        out["boolean_property_aggregation"] = {{"property_name", a->property_name},
                                               {"metrics", std::string(to_string(a->metric))}};
    if (q.groupby_property) out["groupby_property"] = *q.groupby_property;
    return out;
}

std::string serialize(const QueryRequest& query) { return to_json(query).dump(); }

namespace {

bool present(const ojson& obj, const char* key) {
    auto it = obj.find(key);
    return it != obj.end() && !it->is_null();
}

std::string get_string(const ojson& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) throw ParseError(where + ": missing '" + key + "'");
    if (!it->is_string()) throw ParseError(where + ": '" + key + "' must be a string");
    return it->get<std::string>();
}

void reject_unknown(const ojson& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ParseError(where + ": unexpected key '" + it.key() + "'");
    }
}

template <typename Names>
auto get_enum(const ojson& obj, const char* key, const Names& names, const std::string& where) {
    const std::string raw = get_string(obj, key, where);
    auto parsed = names.parse(raw);
    if (!parsed) throw ParseError(where + ": '" + raw + "' is not a valid " + key);
    return *parsed;
}

const ojson& get_object(const ojson& args, const char* key) {
    const auto& v = args.at(key);
    if (!v.is_object()) throw ParseError(std::string(key) + " must be an object");
    return v;
}

}  // namespace

QueryRequest query_from_json(const ojson& args, const std::vector<std::string>& ignored_keys) {
    if (!args.is_object()) throw ParseError("query arguments must be an object");
    const auto& names = query_parameter_names();
    for (auto it = args.begin(); it != args.end(); ++it) {
        if (std::find(names.begin(), names.end(), it.key()) == names.end() &&
            std::find(ignored_keys.begin(), ignored_keys.end(), it.key()) == ignored_keys.end())
            throw ParseError("unexpected argument '" + it.key() + "'");
    }

    QueryRequest q;
    q.collection_name = get_string(args, "collection_name", "query");
    if (present(args, "search_query")) q.search_query = get_string(args, "search_query", "query");

    if (present(args, "integer_property_filter")) {
        const auto& f = get_object(args, "integer_property_filter");
        const std::string where = "integer_property_filter";
        reject_unknown(f, {"property_name", "operator", "value"}, where);
        IntPropertyFilter out;
        out.property_name = get_string(f, "property_name", where);
        out.op = get_enum(f, "operator", kIntOps, where);
        if (!present(f, "value") || !f.at("value").is_number())
            throw ParseError(where + ": 'value' must be a number");
        out.value = f.at("value").get<double>();
        q.integer_property_filter = std::move(out);
    }
    if (present(args, "text_property_filter")) {
        const auto& f = get_object(args, "text_property_filter");
        const std::string where = "text_property_filter";
        reject_unknown(f, {"property_name", "operator", "value"}, where);
        TextPropertyFilter out;
        out.property_name = get_string(f, "property_name", where);
        out.op = get_enum(f, "operator", kTextOps, where);
        out.value = get_string(f, "value", where);
        q.text_property_filter = std::move(out);
    }
    if (present(args, "boolean_property_filter")) {
        const auto& f = get_object(args, "boolean_property_filter");
        const std::string where = "boolean_property_filter";
        reject_unknown(f, {"property_name", "operator", "value"}, where);
        BooleanPropertyFilter out;
        out.property_name = get_string(f, "property_name", where);
        out.op = get_enum(f, "operator", kBoolOps, where);
        if (!present(f, "value") || !f.at("value").is_boolean())
            throw ParseError(where + ": 'value' must be a boolean");
        out.value = f.at("value").get<bool>();
        q.boolean_property_filter = std::move(out);
    }
    if (present(args, "integer_property_aggregation")) {
        const auto& a = get_object(args, "integer_property_aggregation");
        const std::string where = "integer_property_aggregation";
        reject_unknown(a, {"property_name", "metrics"}, where);
        q.integer_property_aggregation =
            IntAggregation{get_string(a, "property_name", where), get_enum(a, "metrics", kIntMetrics, where)};
    }
    if (present(args, "text_property_aggregation")) {
        const auto& a = get_object(args, "text_property_aggregation");
        const std::string where = "text_property_aggregation";
        reject_unknown(a, {"property_name", "metrics", "top_occurrences_limit"}, where);
        TextAggregation out;
        out.property_name = get_string(a, "property_name", where);
        out.metric = get_enum(a, "metrics", kTextMetrics, where);
        if (present(a, "top_occurrences_limit")) {
            const auto& lim = a.at("top_occurrences_limit");
            if (!lim.is_number_integer())
                throw ParseError(where + ": 'top_occurrences_limit' must be an integer");
            out.top_occurrences_limit = lim.get<std::int64_t>();
        }
        q.text_property_aggregation = std::move(out);
    }
    if (present(args, "boolean_property_aggregation")) {
        const auto& a = get_object(args, "boolean_property_aggregation");
        const std::string where = "boolean_property_aggregation";
        reject_unknown(a, {"property_name", "metrics"}, where);
        q.boolean_property_aggregation = BooleanAggregation{get_string(a, "property_name", where),
                                                            get_enum(a, "metrics", kBoolMetrics, where)};
    }
    if (present(args, "groupby_property"))
        q.groupby_property = get_string(args, "groupby_property", "query");
    return q;
}

QueryRequest parse_query(std::string_view text) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("query: ") + e.what());
    }
    return query_from_json(doc);
}

std::string to_string(const CombinationId& id) {
    std::string s;
    s += id.search ? '1' : '0';
    s += '-';
    s += to_string(id.filter);
    s += '-';
    s += to_string(id.aggregation);
    s += '-';
    s += id.groupby ? '1' : '0';
    return s;
}

ojson to_json(const CombinationId& id) {
    return {{"search", id.search},
            {"filter", std::string(to_string(id.filter))},
            {"aggregation", std::string(to_string(id.aggregation))},
            {"groupby", id.groupby}};
}

CombinationId combination_from_json(const ojson& doc) {
    if (!doc.is_object()) throw ParseError("combination must be an object");
    CombinationId id;
    auto flag = [&](const char* key) {
        if (!doc.contains(key) || !doc.at(key).is_boolean())
            throw ParseError(std::string("combination: '") + key + "' must be a boolean");
        return doc.at(key).get<bool>();
    };
    auto kind = [&](const char* key) {
        auto k = parse_operand_kind(get_string(doc, key, "combination"));
        if (!k) throw ParseError(std::string("combination: bad '") + key + "'");
        return *k;
    };
    id.search = flag("search");
    id.filter = kind("filter");
    id.aggregation = kind("aggregation");
    id.groupby = flag("groupby");
    if (id.empty()) throw ParseError("combination: empty signature");
    return id;
}

std::string_view to_string(ComplexityBucket bucket) {
    switch (bucket) {
        case ComplexityBucket::Simple:
            return "SIMPLE";
        case ComplexityBucket::Moderate:
            return "MODERATE";
        case ComplexityBucket::Complex:
            return "COMPLEX";
    }
    return "SIMPLE";
}

std::string ValidationIssue::message() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::UnknownCollection:
            out << "UnknownCollection(" << collection << ")";
            break;
        case Kind::UnknownProperty:
            out << "UnknownProperty(" << collection << ", " << property << ")";
            break;
        case Kind::TypeMismatch:
            out << "TypeMismatch(" << property << ", " << to_string(*expected) << ", "
                << to_string(*actual) << ")";
            break;
        case Kind::InvalidArgument:
            out << "InvalidArgument(" << property << ")";
            break;
    }
    if (!detail.empty()) out << ": " << detail;
    return out.str();
}

std::string ValidationResult::summary() const {
    std::string s;
    for (const auto& issue : issues) {
        if (!s.empty()) s += "; ";
        s += issue.message();
    }
    return s;
}

ValidationFailed::ValidationFailed(std::vector<ValidationIssue> issues)
    : Error([&] {
          ValidationResult r;
          r.issues = issues;
          return "invalid query: " + r.summary();
      }()),
      issues_(std::move(issues)) {}

ValidationResult validate(const QueryRequest& query, const UseCase& use_case) {
    ValidationResult result;
    const CollectionSchema* collection = use_case.find_collection(query.collection_name);
    if (!collection) {
        result.issues.push_back({ValidationIssue::Kind::UnknownCollection, query.collection_name,
                                 {}, std::nullopt, std::nullopt, {}});
        return result;
    }

    auto check = [&](const std::string& property, std::optional<DataType> expected,
                     const char* argument) {
        const PropertySchema* p = collection->find_property(property);
        if (!p) {
            result.issues.push_back({ValidationIssue::Kind::UnknownProperty, collection->name,
                                     property, expected, std::nullopt, argument});
            return;
        }
        if (expected && p->data_type != *expected)
            result.issues.push_back({ValidationIssue::Kind::TypeMismatch, collection->name,
                                     property, expected, p->data_type, argument});
    };

    if (const auto& f = query.integer_property_filter)
        check(f->property_name, DataType::Number, "integer_property_filter");
    if (const auto& f = query.text_property_filter)
        check(f->property_name, DataType::Text, "text_property_filter");
    if (const auto& f = query.boolean_property_filter)
        check(f->property_name, DataType::Boolean, "boolean_property_filter");
    if (const auto& a = query.integer_property_aggregation)
        check(a->property_name, DataType::Number, "integer_property_aggregation");
    if (const auto& a = query.text_property_aggregation) {
        check(a->property_name, DataType::Text, "text_property_aggregation");
        if (a->top_occurrences_limit) {
            if (a->metric != TextMetric::TopOccurrences)
                result.issues.push_back({ValidationIssue::Kind::InvalidArgument, collection->name,
                                         "top_occurrences_limit", std::nullopt, std::nullopt,
                                         "only allowed with TOP_OCCURRENCES"});
            else if (*a->top_occurrences_limit <= 0)
                result.issues.push_back({ValidationIssue::Kind::InvalidArgument, collection->name,
                                         "top_occurrences_limit", std::nullopt, std::nullopt,
                                         "must be positive"});
        }
    }
    if (const auto& a = query.boolean_property_aggregation)
        check(a->property_name, DataType::Boolean, "boolean_property_aggregation");
    if (query.groupby_property) check(*query.groupby_property, std::nullopt, "groupby_property");

    if (result.issues.empty()) result.validated = ValidatedQuery(query, *collection);
    return result;
}

ValidatedQuery validate_or_throw(const QueryRequest& query, const UseCase& use_case) {
    auto result = validate(query, use_case);
    if (!result.ok()) throw ValidationFailed(std::move(result.issues));
    return std::move(*result.validated);
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::string fold_search_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

QueryRequest canonicalize(const QueryRequest& query) {
    QueryRequest q = query;
    if (q.search_query) q.search_query = fold_search_text(*q.search_query);
    if (q.text_property_filter) q.text_property_filter->value = trim(q.text_property_filter->value);
    return q;
}

int optional_argument_count(const QueryRequest& q) {
    return int(q.search_query.has_value()) + int(q.integer_property_filter.has_value()) +
           int(q.text_property_filter.has_value()) + int(q.boolean_property_filter.has_value()) +
           int(q.integer_property_aggregation.has_value()) +
           int(q.text_property_aggregation.has_value()) +
           int(q.boolean_property_aggregation.has_value()) + int(q.groupby_property.has_value());
}

namespace {

ComplexityBucket bucket_for(int arguments) {
    if (arguments <= 0) throw DegenerateQuery();
    if (arguments == 1) return ComplexityBucket::Simple;
    if (arguments == 2) return ComplexityBucket::Moderate;
    return ComplexityBucket::Complex;
}

}  // namespace

ComplexityBucket complexity(const QueryRequest& query) {
    return bucket_for(optional_argument_count(query));
}

ComplexityBucket complexity(const CombinationId& id) { return bucket_for(id.argument_count()); }

CombinationId operator_signature(const QueryRequest& q) {
    CombinationId id;
    id.search = q.search_query.has_value();
    const int filters = int(q.integer_property_filter.has_value()) +
                        int(q.text_property_filter.has_value()) +
                        int(q.boolean_property_filter.has_value());
    const int aggregations = int(q.integer_property_aggregation.has_value()) +
                             int(q.text_property_aggregation.has_value()) +
                             int(q.boolean_property_aggregation.has_value());
    if (filters > 1) throw MultipleFiltersPresent();
    if (aggregations > 1) throw MultipleAggregationsPresent();
    if (q.integer_property_filter) id.filter = OperandKind::Int;
    if (q.text_property_filter) id.filter = OperandKind::Text;
    if (q.boolean_property_filter) id.filter = OperandKind::Bool;
    if (q.integer_property_aggregation) id.aggregation = OperandKind::Int;
    if (q.text_property_aggregation) id.aggregation = OperandKind::Text;
    if (q.boolean_property_aggregation) id.aggregation = OperandKind::Bool;
    id.groupby = q.groupby_property.has_value();
    if (id.empty()) throw DegenerateQuery();
    return id;
}

}  // namespace dbgorilla
