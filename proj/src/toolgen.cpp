#include "dbgorilla/toolgen.hpp"

#include "dbgorilla/error.hpp"

namespace dbgorilla::tools {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kUnifiedPreamble =
    "Query a database with an optional search query or optional filters or aggregations on the "
    "results.\n\nIMPORTANT! Please be mindful of the available query APIs you can use such as "
    "search queries, filters, aggregations, and groupby!\n\nAvailable collections in this "
    "database:\n";

std::string per_collection_preamble(const std::string& collection) {
    return "Query the " + collection +
           " collection with an optional search query or optional filters or aggregations on "
           "the results.\n\nIMPORTANT! Please be mindful of the available query APIs you can use "
           "such as search queries, filters, aggregations, and groupby!\n\nCollection schema:\n";
}

ojson string_enum(const std::vector<std::string>& values) {
    return {{"type", "string"}, {"enum", values}};
}

// Everything except collection_name, in the reference order.
ojson operator_parameters() {
    ojson p;
    p["search_query"] = {{"type", "string"},
                         {"description", "A search query to return objects from a search index."}};
    p["integer_property_filter"] = {
        {"type", "object"},
        {"description", "Filter numeric properties using comparison operators."},
        {"properties",
         {{"property_name", {{"type", "string"}}},
          {"operator", string_enum(int_operator_names())},
          {"value", {{"type", "number"}}}}}};
    p["text_property_filter"] = {
        {"type", "object"},
        {"description", "Filter text properties using equality or LIKE operators"},
        {"properties",
         {{"property_name", {{"type", "string"}}},
          {"operator", string_enum(text_operator_names())},
          {"value", {{"type", "string"}}}}}};
    p["boolean_property_filter"] = {
        {"type", "object"},
        {"description", "Filter boolean properties using equality operators"},
        {"properties",
         {{"property_name", {{"type", "string"}}},
          {"operator", string_enum(bool_operator_names())},
          {"value", {{"type", "boolean"}}}}}};
    p["integer_property_aggregation"] = {
        {"type", "object"},
        {"description", "Aggregate numeric properties using statistical functions"},
        {"properties",
         {{"property_name", {{"type", "string"}}}, {"metrics", string_enum(int_metric_names())}}}};
    p["text_property_aggregation"] = {
        {"type", "object"},
        {"description", "Aggregate text properties using frequency analysis"},
        {"properties",
         {{"property_name", {{"type", "string"}}},
          {"metrics", string_enum(text_metric_names())},
          {"top_occurrences_limit", {{"type", "integer"}}}}}};
    p["boolean_property_aggregation"] = {
        {"type", "object"},
        {"description", "Aggregate boolean properties using statistical functions"},
        {"properties",
         {{"property_name", {{"type", "string"}}}, {"metrics", string_enum(bool_metric_names())}}}};
    p["groupby_property"] = {{"type", "string"}, {"description", "Group the results by a property."}};
    return p;
}

std::size_t remaining_budget(std::string_view preamble, std::size_t budget,
                             const TokenEstimator& estimator) {
    const std::size_t used = estimator.estimate(preamble);
    if (used >= budget) throw BudgetExceeded(used, budget);
    return budget - used;
}

}  // namespace

ojson parameters_schema(const ToolDefinition& tool) {
    return {{"type", "object"}, {"properties", tool.parameters}, {"required", tool.required}};
}

ojson to_reference_envelope(const ToolDefinition& tool) {
    return {{"type", "function"},
            {"function",
             {{"name", tool.name},
              {"description", tool.description},
              {"parameters", parameters_schema(tool)}}}};
}

ToolDefinition build_unified_tool(const UseCase& use_case, std::size_t budget,
                                  const TokenEstimator& estimator) {
    const std::string collections =
        render_description(use_case, remaining_budget(kUnifiedPreamble, budget, estimator), estimator);
    ToolDefinition tool;
    tool.name = std::string(kUnifiedToolName);
    tool.description = std::string(kUnifiedPreamble) + collections;
    tool.parameters["collection_name"] = {{"type", "string"},
                                          {"description", "The collection to query."},
                                          {"enum", collection_names(use_case)}};
    const ojson ops = operator_parameters();
    for (const auto& [key, value] : ops.items()) tool.parameters[key] = value;
    tool.required = {"collection_name"};
    return tool;
}

std::vector<ToolDefinition> build_per_collection_tools(const UseCase& use_case, std::size_t budget,
                                                       const TokenEstimator& estimator) {
    std::vector<ToolDefinition> tools;
    for (const auto& collection : use_case.collections) {
        const std::string preamble = per_collection_preamble(collection.name);
        const std::string rendered = render_collections(
            std::span(&collection, 1), remaining_budget(preamble, budget, estimator), estimator);
        ToolDefinition tool;
        tool.name = std::string(kPerCollectionPrefix) + collection.name;
        tool.description = preamble + rendered;
        tool.parameters = operator_parameters();
        tools.push_back(std::move(tool));
    }
    return tools;
}

ToolDefinition with_rationale(const ToolDefinition& tool) {
    if (tool.has_parameter(kRationaleParameter)) throw AlreadyPresent(std::string(kRationaleParameter));
    ToolDefinition out = tool;
    out.parameters[std::string(kRationaleParameter)] = {
        {"type", "string"},
        {"description", "Explain why these arguments answer the request."}};
    out.required.emplace_back(kRationaleParameter);
    return out;
}

ojson build_structured_output_schema(const UseCase& use_case, std::size_t budget,
                                     const TokenEstimator& estimator) {
    const ToolDefinition tool = build_unified_tool(use_case, budget, estimator);
    ojson call = {{"type", "object"},
                  {"properties",
                   {{"function_name", {{"type", "string"}, {"enum", {tool.name}}}},
                    {"arguments", parameters_schema(tool)}}},
                  {"required", {"function_name", "arguments"}}};
    return {{"title", "ResponseOrToolCall"},
            {"description", tool.description},
            {"type", "object"},
            {"properties",
             {{"tool_rationale",
               {{"type", "string"},
                {"description", "A rationale regarding whether tool calls are needed."}}},
              {"use_tools", {{"type", "boolean"}}},
              {"response", {{"type", "string"}}},
              {"tool_calls", {{"type", "array"}, {"items", std::move(call)}}}}},
            {"required", {"use_tools"}}};
}

ParsedCall parse_tool_call(std::string_view function_name, const ojson& arguments) {
    if (!arguments.is_object()) throw ParseError("tool arguments must be an object");
    ParsedCall parsed;
    ojson args = arguments;
    if (auto it = args.find(std::string(kRationaleParameter)); it != args.end()) {
        if (!it->is_null()) {
            if (!it->is_string()) throw ParseError("rationale must be a string");
            parsed.rationale = it->get<std::string>();
        }
        args.erase(it);
    }

    if (function_name == kUnifiedToolName) {
        parsed.query = query_from_json(args);
        return parsed;
    }
    if (function_name.starts_with(kPerCollectionPrefix) &&
        function_name.size() > kPerCollectionPrefix.size()) {
        const std::string collection(function_name.substr(kPerCollectionPrefix.size()));
        if (auto it = args.find("collection_name"); it != args.end() && !it->is_null()) {
            if (!it->is_string() || it->get<std::string>() != collection)
                throw ParseError("tool " + std::string(function_name) +
                                 " called with a different collection_name");
        }
        args["collection_name"] = collection;
        parsed.query = query_from_json(args);
        return parsed;
    }
    throw ParseError("unknown tool '" + std::string(function_name) + "'");
}

ParsedCall parse_tool_call(std::string_view function_name, std::string_view arguments_text) {
    ojson args;
    try {
        args = arguments_text.empty() ? ojson::object() : ojson::parse(arguments_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("tool arguments: ") + e.what());
    }
    return parse_tool_call(function_name, args);
}

StructuredResponse parse_structured_response(const ojson& instance) {
    if (!instance.is_object()) throw ParseError("ResponseOrToolCall must be an object");
    for (auto it = instance.begin(); it != instance.end(); ++it) {
        const auto& k = it.key();
        if (k != "tool_rationale" && k != "use_tools" && k != "response" && k != "tool_calls")
            throw ParseError("ResponseOrToolCall: unexpected key '" + k + "'");
    }
    StructuredResponse out;
    auto opt_string = [&](const char* key) -> std::optional<std::string> {
        auto it = instance.find(key);
        if (it == instance.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) throw ParseError(std::string("ResponseOrToolCall: '") + key + "' must be a string");
        return it->get<std::string>();
    };
    out.tool_rationale = opt_string("tool_rationale");
    out.response = opt_string("response");
    auto use = instance.find("use_tools");
    if (use == instance.end() || !use->is_boolean())
        throw ParseError("ResponseOrToolCall: 'use_tools' must be a boolean");
    out.use_tools = use->get<bool>();

    if (auto calls = instance.find("tool_calls"); calls != instance.end() && !calls->is_null()) {
        if (!calls->is_array()) throw ParseError("ResponseOrToolCall: 'tool_calls' must be an array");
        for (const auto& call : *calls) {
            if (!call.is_object() || !call.contains("function_name") ||
                !call.at("function_name").is_string() || !call.contains("arguments"))
                throw ParseError("ResponseOrToolCall: malformed tool call");
            const std::string name = call.at("function_name").get<std::string>();
            if (name != kUnifiedToolName)
                throw ParseError("ResponseOrToolCall: unknown function '" + name + "'");
            out.tool_calls.push_back({name, query_from_json(call.at("arguments"))});
        }
    }
    if (out.use_tools && out.tool_calls.empty())
        throw ParseError("ResponseOrToolCall: use_tools=true requires tool_calls");
    if (!out.use_tools && !out.response)
        throw ParseError("ResponseOrToolCall: use_tools=false requires a response");
    return out;
}

StructuredResponse parse_structured_response(std::string_view text) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("ResponseOrToolCall: ") + e.what());
    }
    return parse_structured_response(doc);
}

}  // namespace dbgorilla::tools
