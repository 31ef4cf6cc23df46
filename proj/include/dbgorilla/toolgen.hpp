#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dbgorilla/query.hpp"
#include "dbgorilla/schema.hpp"

namespace dbgorilla::tools {

inline constexpr std::string_view kUnifiedToolName = "query_database";
inline constexpr std::string_view kPerCollectionPrefix = "query_";
inline constexpr std::string_view kRationaleParameter = "rationale";

// Provider-neutral function definition. `parameters` maps parameter name to
// its JSON-schema node, in emission order.
struct ToolDefinition {
    std::string name;
    std::string description;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::vector<std::string> required;

    bool has_parameter(std::string_view name) const { return parameters.contains(std::string(name)); }
    bool operator==(const ToolDefinition&) const = default;
};

// {"type": "function", "function": {name, description, parameters: {type, properties, required}}}
nlohmann::ordered_json to_reference_envelope(const ToolDefinition& tool);
// {"type": "object", "properties": ..., "required": ...}
nlohmann::ordered_json parameters_schema(const ToolDefinition& tool);

ToolDefinition build_unified_tool(const UseCase& use_case, std::size_t budget = kDefaultToolBudget,
                                  const TokenEstimator& estimator = default_estimator());

// One `query_<collection>` tool per collection, without collection_name.
std::vector<ToolDefinition> build_per_collection_tools(
    const UseCase& use_case, std::size_t budget = kDefaultToolBudget,
    const TokenEstimator& estimator = default_estimator());

// Adds a required string `rationale` parameter. Throws AlreadyPresent.
ToolDefinition with_rationale(const ToolDefinition& tool);

// JSON schema equivalent to the ResponseOrToolCall model; the arguments
// sub-schema equals the unified tool parameters.
nlohmann::ordered_json build_structured_output_schema(
    const UseCase& use_case, std::size_t budget = kDefaultToolBudget,
    const TokenEstimator& estimator = default_estimator());

struct ParsedCall {
    QueryRequest query;
    std::optional<std::string> rationale;
};

// Maps a native tool call back onto a QueryRequest. Unified calls carry
// collection_name; per-collection calls take it from the tool name.
// Throws ParseError.
ParsedCall parse_tool_call(std::string_view function_name, const nlohmann::ordered_json& arguments);
// Same, for arguments delivered as the JSON text most providers send.
ParsedCall parse_tool_call(std::string_view function_name, std::string_view arguments_text);

struct StructuredToolCall {
    std::string function_name;
    QueryRequest arguments;
};

struct StructuredResponse {
    std::optional<std::string> tool_rationale;
    bool use_tools = false;
    std::optional<std::string> response;
    std::vector<StructuredToolCall> tool_calls;
};

// Parses and checks a ResponseOrToolCall instance: use_tools=true needs a
// non-empty tool_calls list, use_tools=false needs a response. Throws ParseError.
StructuredResponse parse_structured_response(const nlohmann::ordered_json& instance);
StructuredResponse parse_structured_response(std::string_view text);

}  // namespace dbgorilla::tools
