#include <gtest/gtest.h>

#include <set>

#include "dbgorilla/catalog.hpp"
#include "dbgorilla/error.hpp"
#include "dbgorilla/toolgen.hpp"

using namespace dbgorilla;
using namespace dbgorilla::tools;
using ojson = nlohmann::ordered_json;

namespace {

const UseCase& restaurants() { return find_builtin_domain("restaurants")->use_case; }

// Parameter block of the reference tool listing, typed in by hand.
const char* kReferenceParameters = R"({
  "type": "object",
  "properties": {
    "collection_name": {"type": "string", "description": "The collection to query.",
                        "enum": ["Restaurants", "Menus", "Reservations"]},
    "search_query": {"type": "string", "description": "A search query to return objects from a search index."},
    "integer_property_filter": {
      "type": "object", "description": "Filter numeric properties using comparison operators.",
      "properties": {"property_name": {"type": "string"},
                     "operator": {"type": "string", "enum": ["=", "<", ">", "<=", ">="]},
                     "value": {"type": "number"}}},
    "text_property_filter": {
      "type": "object", "description": "Filter text properties using equality or LIKE operators",
      "properties": {"property_name": {"type": "string"},
                     "operator": {"type": "string", "enum": ["=", "LIKE"]},
                     "value": {"type": "string"}}},
    "boolean_property_filter": {
      "type": "object", "description": "Filter boolean properties using equality operators",
      "properties": {"property_name": {"type": "string"},
                     "operator": {"type": "string", "enum": ["=", "!="]},
                     "value": {"type": "boolean"}}},
    "integer_property_aggregation": {
      "type": "object", "description": "Aggregate numeric properties using statistical functions",
      "properties": {"property_name": {"type": "string"},
                     "metrics": {"type": "string",
                                 "enum": ["COUNT", "TYPE", "MIN", "MAX", "MEAN", "MEDIAN", "MODE", "SUM"]}}},
    "text_property_aggregation": {
      "type": "object", "description": "Aggregate text properties using frequency analysis",
      "properties": {"property_name": {"type": "string"},
                     "metrics": {"type": "string", "enum": ["COUNT", "TYPE", "TOP_OCCURRENCES"]},
                     "top_occurrences_limit": {"type": "integer"}}},
    "boolean_property_aggregation": {
      "type": "object", "description": "Aggregate boolean properties using statistical functions",
      "properties": {"property_name": {"type": "string"},
                     "metrics": {"type": "string",
                                 "enum": ["COUNT", "TYPE", "TOTAL_TRUE", "TOTAL_FALSE",
                                          "PERCENTAGE_TRUE", "PERCENTAGE_FALSE"]}}},
    "groupby_property": {"type": "string", "description": "Group the results by a property."}
  },
  "required": ["collection_name"]
})";

const char* kReferencePreamble =
    "Query a database with an optional search query or optional filters or aggregations on the results.\n\n"
    "IMPORTANT! Please be mindful of the available query APIs you can use such as search queries, filters, "
    "aggregations, and groupby!\n\nAvailable collections in this database:\n";

}  // namespace

TEST(Toolgen, UnifiedToolMatchesReferenceListing) {
    const ToolDefinition tool = build_unified_tool(restaurants());
    const ojson env = to_reference_envelope(tool);
    EXPECT_EQ(env["type"], "function");
    EXPECT_EQ(env["function"]["name"], "query_database");
    EXPECT_EQ(env["function"]["parameters"].dump(), ojson::parse(kReferenceParameters).dump());
    const std::string desc = env["function"]["description"];
    ASSERT_TRUE(desc.starts_with(kReferencePreamble));
    EXPECT_NE(desc.find("Menus"), std::string::npos);
    EXPECT_EQ(tool.required, std::vector<std::string>{"collection_name"});
}

TEST(Toolgen, EmissionIsDeterministic) {
    EXPECT_EQ(to_reference_envelope(build_unified_tool(restaurants())).dump(),
              to_reference_envelope(build_unified_tool(restaurants())).dump());
    EXPECT_EQ(build_structured_output_schema(restaurants()).dump(), build_structured_output_schema(restaurants()).dump());
}

TEST(Toolgen, DescriptionFitsBudget) {
    const CharQuarterEstimator est;
    for (std::size_t budget : {1024u, 400u, 250u}) {
        const ToolDefinition tool = build_unified_tool(restaurants(), budget);
        EXPECT_LE(est.estimate(tool.description), budget);
    }
    EXPECT_THROW(build_unified_tool(restaurants(), 70), BudgetExceeded);
}

TEST(Toolgen, PerCollectionTools) {
    const auto tools = build_per_collection_tools(restaurants());
    ASSERT_EQ(tools.size(), 3u);
    EXPECT_EQ(tools[0].name, "query_Restaurants");
    EXPECT_EQ(tools[1].name, "query_Menus");
    EXPECT_EQ(tools[2].name, "query_Reservations");
    std::set<std::string> names;
    for (const auto& t : tools) {
        EXPECT_FALSE(t.has_parameter("collection_name"));
        EXPECT_TRUE(t.required.empty());
        for (const auto& [k, _] : t.parameters.items()) names.insert(k);
    }
    std::set<std::string> unified;
    const ToolDefinition whole = build_unified_tool(restaurants());
    for (const auto& [k, _] : whole.parameters.items())
        if (k != "collection_name") unified.insert(k);
    EXPECT_EQ(names, unified);
    EXPECT_NE(tools[1].description.find("itemDescription"), std::string::npos);
    EXPECT_EQ(tools[1].description.find("partySize"), std::string::npos);
}

TEST(Toolgen, PerCollectionCallMapsBack) {
    const ParsedCall call = parse_tool_call(
        "query_Menus", std::string_view(R"({"integer_property_filter":{"property_name":"price","operator":"<","value":20}})"));
    QueryRequest expected;
    expected.collection_name = "Menus";
    expected.integer_property_filter = IntPropertyFilter{"price", IntOperator::Lt, 20};
    EXPECT_EQ(call.query, expected);
    EXPECT_THROW(parse_tool_call("query_Menus", ojson::parse(R"({"collection_name":"Restaurants"})")), ParseError);
    EXPECT_THROW(parse_tool_call("query_", ojson::object()), ParseError);
    EXPECT_THROW(parse_tool_call("search_web", ojson::parse(R"({"collection_name":"Menus"})")), ParseError);
}

TEST(Toolgen, Rationale) {
    const ToolDefinition tool = with_rationale(build_unified_tool(restaurants()));
    EXPECT_EQ(tool.required, (std::vector<std::string>{"collection_name", "rationale"}));
    EXPECT_EQ(tool.parameters["rationale"]["type"], "string");
    EXPECT_THROW(with_rationale(tool), AlreadyPresent);

    const ParsedCall call = parse_tool_call(
        "query_database",
        ojson::parse(R"({"collection_name":"Menus","rationale":"perform a frequency analysis",
                         "text_property_aggregation":{"property_name":"menuItem","metrics":"TOP_OCCURRENCES"}})"));
    EXPECT_EQ(call.rationale, "perform a frequency analysis");
    EXPECT_EQ(call.query.text_property_aggregation->metric, TextMetric::TopOccurrences);
}

TEST(Toolgen, StructuredSchemaShape) {
    const ojson schema = build_structured_output_schema(restaurants());
    std::vector<std::string> keys;
    for (const auto& [k, _] : schema["properties"].items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"tool_rationale", "use_tools", "response", "tool_calls"}));
    EXPECT_EQ(schema["properties"]["tool_rationale"]["description"],
              "A rationale regarding whether tool calls are needed.");
    EXPECT_EQ(schema["required"], ojson::array({"use_tools"}));
    const ojson& args = schema["properties"]["tool_calls"]["items"]["properties"]["arguments"];
    EXPECT_EQ(args.dump(), parameters_schema(build_unified_tool(restaurants())).dump());
}

TEST(Toolgen, StructuredInstanceInvariants) {
    EXPECT_THROW(parse_structured_response(std::string_view(R"({"use_tools":false})")), ParseError);
    EXPECT_THROW(parse_structured_response(std::string_view(R"({"use_tools":true,"tool_calls":[]})")), ParseError);
    EXPECT_THROW(parse_structured_response(std::string_view(R"({"use_tools":true})")), ParseError);
    EXPECT_THROW(parse_structured_response(std::string_view(R"({"use_tools":"yes","response":"x"})")), ParseError);
    EXPECT_THROW(parse_structured_response(std::string_view(R"({"use_tools":false,"response":"x","extra":1})")),
                 ParseError);
    const auto r = parse_structured_response(std::string_view(R"({"use_tools":false,"response":"Hello"})"));
    EXPECT_FALSE(r.use_tools);
    EXPECT_EQ(r.response, "Hello");
}

TEST(Toolgen, StructuredAndNativeParseEqual) {
    const ojson args = ojson::parse(
        R"({"collection_name":"Menus","search_query":"seasonal specialties",
            "integer_property_filter":{"property_name":"price","operator":"<","value":20},
            "integer_property_aggregation":{"property_name":"price","metrics":"MEAN"},
            "groupby_property":"isVegetarian"})");
    const ParsedCall native = parse_tool_call("query_database", args);
    ojson instance = {{"tool_rationale", "needs the database"},
                      {"use_tools", true},
                      {"tool_calls", {{{"function_name", "query_database"}, {"arguments", args}}}}};
    const auto structured = parse_structured_response(instance);
    ASSERT_EQ(structured.tool_calls.size(), 1u);
    EXPECT_EQ(structured.tool_calls[0].arguments, native.query);
    EXPECT_EQ(structured.tool_rationale, "needs the database");

    ojson per = args;
    per.erase("collection_name");
    EXPECT_EQ(parse_tool_call("query_Menus", per).query, native.query);
}
