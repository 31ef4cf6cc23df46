#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>

#include "dbgorilla/error.hpp"
#include "dbgorilla/harness.hpp"

namespace dbgorilla::harness {

using ojson = nlohmann::ordered_json;

ojson openai_request_body(const ChatRequest& request, const std::string& model) {
    ojson body;
    body["model"] = model;
    ojson messages = ojson::array();
    if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
    messages.push_back({{"role", "user"}, {"content", request.user}});
    body["messages"] = messages;
    if (!request.tools.empty()) {
        ojson tools = ojson::array();
        for (const auto& t : request.tools) tools.push_back(tools::to_reference_envelope(t));
        body["tools"] = tools;
        body["parallel_tool_calls"] = request.parallel_tool_calls;
    }
    if (request.response_schema)
        body["response_format"] = {
            {"type", "json_schema"},
            {"json_schema", {{"name", "ResponseOrToolCall"}, {"schema", *request.response_schema}}}};
    if (request.temperature) body["temperature"] = *request.temperature;
    return body;
}

ojson anthropic_request_body(const ChatRequest& request, const std::string& model) {
    ojson body;
    body["model"] = model;
    body["max_tokens"] = 4096;
    if (!request.system.empty()) body["system"] = request.system;
    std::string user = request.user;
    // No native schema-constrained decoding here; the schema rides along in the prompt.
    if (request.response_schema)
        user += "\n\nReply with a single JSON object that validates against this JSON schema:\n" +
                request.response_schema->dump();
    body["messages"] = ojson::array({{{"role", "user"}, {"content", user}}});
    if (!request.tools.empty()) {
        ojson tools = ojson::array();
        for (const auto& t : request.tools)
            tools.push_back({{"name", t.name}, {"description", t.description}, {"input_schema", tools::parameters_schema(t)}});
        body["tools"] = tools;
        body["tool_choice"] = {{"type", "auto"}, {"disable_parallel_tool_use", !request.parallel_tool_calls}};
    }
    if (request.temperature) body["temperature"] = *request.temperature;
    return body;
}

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("endpoint must be an absolute URL: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

class HttpProvider final : public ChatProvider {
public:
    explicit HttpProvider(const ProviderConfig& config) : config_(config) {
        anthropic_ = config.provider == "anthropic";
        std::string endpoint = config.endpoint;
        if (endpoint.empty()) {
            if (config.provider == "openai") endpoint = "https://api.openai.com/v1/chat/completions";
            else if (anthropic_) endpoint = "https://api.anthropic.com/v1/messages";
            else throw Error("openai-compatible provider needs an endpoint URL");
        }
        url_ = split_url(endpoint);
        std::string env = config.credential_env;
        if (env.empty()) env = anthropic_ ? "ANTHROPIC_API_KEY" : "OPENAI_API_KEY";
        if (const char* key = std::getenv(env.c_str()); key && *key) key_ = key;
        else if (config.provider != "openai-compatible")
            throw ProviderError("environment variable " + env + " is not set");
    }

    std::string model() const override { return config_.model; }

    ChatResponse complete(const ChatRequest& request) override {
        httplib::Client client(url_.origin);
        client.set_connection_timeout(std::chrono::seconds(30));
        client.set_read_timeout(std::chrono::seconds(300));
        httplib::Headers headers;
        if (anthropic_) {
            headers.emplace("x-api-key", key_);
            headers.emplace("anthropic-version", "2023-06-01");
        } else if (!key_.empty()) {
            headers.emplace("Authorization", "Bearer " + key_);
        }
        const ojson body = anthropic_ ? anthropic_request_body(request, config_.model)
                                      : openai_request_body(request, config_.model);
        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(url_.path, headers, body.dump(), "application/json");
        const double latency =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        if (!res) throw TransportError(url_.origin + ": " + httplib::to_string(res.error()));
        if (res->status == 429 || res->status >= 500)
            throw TransportError("HTTP " + std::to_string(res->status) + " from " + url_.origin);
        if (res->status < 200 || res->status >= 300)
            throw ProviderError("HTTP " + std::to_string(res->status) + " from " + url_.origin + ": " +
                                res->body.substr(0, 500));
        ChatResponse out;
        out.envelope = anthropic_ ? "anthropic" : "openai";
        try {
            out.payload = ojson::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProviderError(std::string("response body is not JSON: ") + e.what());
        }
        out.usage = usage_from_payload(out.envelope, out.payload);
        out.latency_ms = latency;
        return out;
    }

private:
    ProviderConfig config_;
    bool anthropic_ = false;
    Url url_;
    std::string key_;
};

}  // namespace

std::unique_ptr<ChatProvider> make_http_provider(const ProviderConfig& config) {
    return std::make_unique<HttpProvider>(config);
}

}  // namespace dbgorilla::harness
