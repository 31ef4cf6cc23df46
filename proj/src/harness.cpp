#include "dbgorilla/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "dbgorilla/error.hpp"
#include "dbgorilla/io.hpp"
#include "dbgorilla/parallel.hpp"
#include "dbgorilla/rng.hpp"

namespace dbgorilla::harness {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::Unified: return "unified";
        case Mode::PerCollectionTools: return "per-collection-tools";
        case Mode::Structured: return "structured";
        case Mode::Rationale: return "rationale";
        case Mode::Parallel: return "parallel";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view name) {
    for (Mode m : {Mode::Unified, Mode::PerCollectionTools, Mode::Structured, Mode::Rationale, Mode::Parallel})
        if (to_string(m) == name) return m;
    return std::nullopt;
}

ModeFlags ModeFlags::from(Mode mode) {
    ModeFlags f;
    switch (mode) {
        case Mode::Unified: break;
        case Mode::PerCollectionTools: f.per_collection_tools = true; break;
        case Mode::Structured: f.structured_generation = true; break;
        case Mode::Rationale: f.rationale_required = true; break;
        case Mode::Parallel: f.parallel_tool_calls = true; break;
    }
    return f;
}

void ModeFlags::check() const {
    if (structured_generation && per_collection_tools)
        throw Error("structured generation cannot be combined with per-collection tools");
    if (structured_generation && rationale_required)
        throw Error("structured generation already carries tool_rationale; drop the rationale flag");
}

ojson ModeFlags::to_json() const {
    return {{"parallel_tool_calls", parallel_tool_calls},
            {"structured_generation", structured_generation},
            {"per_collection_tools", per_collection_tools},
            {"rationale_required", rationale_required}};
}

Pricing Pricing::per_million(double input, double output) {
    if (!std::isfinite(input) || !std::isfinite(output) || input < 0 || output < 0)
        throw Error("pricing must be finite and non-negative");
    return {std::llround(input * 1e6), std::llround(output * 1e6)};
}

namespace {

struct RegistryRow {
    PricingEntry entry;
    std::vector<std::string> aliases;
};

std::string fold(std::string_view s) {
    std::string out;
    for (char c : s)
        if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

const std::vector<RegistryRow>& registry_rows() {
    static const std::vector<RegistryRow> rows{
        {{"Claude 3.5 Sonnet", Pricing::per_million(3.00, 15.00), ""},
         {"claude-3-5-sonnet", "claude-3-5-sonnet-20241022", "claude-3-5-sonnet-latest"}},
        {{"OpenAI GPT-4o", Pricing::per_million(2.50, 10.00), ""}, {"GPT-4o", "gpt-4o"}},
        {{"Command R+", Pricing::per_million(2.50, 10.00), ""}, {"command-r-plus"}},
        {{"Gemini 1.5 Pro", Pricing::per_million(1.25, 5.00), ""}, {"gemini-1.5-pro"}},
        {{"GPT-4o Mini", Pricing::per_million(0.15, 0.60), ""}, {"gpt-4o-mini"}},
        {{"Llama 3.1 8B Instruct", Pricing::per_million(0.10, 0.10), ""},
         {"Llama 3.1 8B", "llama-3.1-8b-instruct", "meta-llama/Meta-Llama-3.1-8B-Instruct-Turbo"}},
        {{"Gemini 1.5 Flash", Pricing::per_million(0.075, 0.30), ""}, {"gemini-1.5-flash"}},
        {{"Command R7B", Pricing::per_million(0.0375, 0.15), ""}, {"command-r7b", "command-r7b-12-2024"}},
        {{"Gemini 2.0 Flash (exp)", Pricing::per_million(0.075, 0.30),
          "priced as Gemini 1.5 Flash: the cost table lists 1.5 Flash while results report 2.0 Flash (exp)"},
         {"Gemini 2.0 Flash", "gemini-2.0-flash-exp"}},
    };
    return rows;
}

}  // namespace

const std::vector<PricingEntry>& pricing_registry() {
    static const std::vector<PricingEntry> entries = [] {
        std::vector<PricingEntry> out;
        for (const auto& r : registry_rows()) out.push_back(r.entry);
        return out;
    }();
    return entries;
}

const PricingEntry* find_pricing(std::string_view model) {
    const std::string key = fold(model);
    const auto& rows = registry_rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (fold(rows[i].entry.model) == key) return &pricing_registry()[i];
        for (const auto& a : rows[i].aliases)
            if (fold(a) == key) return &pricing_registry()[i];
    }
    return nullptr;
}

std::int64_t cost_cents(std::uint64_t tokens, std::int64_t micro_per_m) {
    // dollars = tokens * micro / 1e12, cents = tokens * micro / 1e10.
    const unsigned __int128 product = static_cast<unsigned __int128>(tokens) * static_cast<std::uint64_t>(micro_per_m);
    return static_cast<std::int64_t>((product + 5'000'000'000ULL) / 10'000'000'000ULL);
}

std::string format_dollars(std::int64_t cents) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents < 0 ? "-" : "", static_cast<long long>(std::llabs(cents) / 100),
                  static_cast<long long>(std::llabs(cents) % 100));
    return buf;
}

void CostLedger::add(const std::string& model, const Usage& usage, const Pricing& pricing) {
    for (auto& e : entries_) {
        if (e.model != model) continue;
        if (!(e.pricing == pricing)) throw Error("model " + model + " re-added with different pricing");
        e.usage.input_tokens += usage.input_tokens;
        e.usage.output_tokens += usage.output_tokens;
        return;
    }
    entries_.push_back({model, pricing, usage});
}

const ModelCost* CostLedger::find(const std::string& model) const {
    for (const auto& e : entries_)
        if (e.model == model) return &e;
    return nullptr;
}

std::int64_t CostLedger::grand_total_cents() const {
    std::int64_t total = 0;
    for (const auto& e : entries_) total += e.total_cents();
    return total;
}

namespace {

std::string price_text(std::int64_t micro) {
    // Up to six decimals, trailing zeros trimmed but at least two kept.
    char buf[48];
    std::snprintf(buf, sizeof buf, "%lld.%06lld", static_cast<long long>(micro / 1'000'000),
                  static_cast<long long>(micro % 1'000'000));
    std::string s = buf;
    while (s.size() > 1 && s.back() == '0' && s.size() - s.find('.') > 3) s.pop_back();
    return s;
}

}  // namespace

eval::TextTable CostLedger::table() const {
    eval::TextTable t;
    t.title = "Cost";
    t.header = {"Model", "Input Tokens", "Output Tokens", "Input Cost ($)", "Output Cost ($)", "Total Cost ($)",
                "Input Pricing ($/1M)", "Output Pricing ($/1M)"};
    for (const auto& e : entries_)
        t.rows.push_back({e.model, std::to_string(e.usage.input_tokens), std::to_string(e.usage.output_tokens),
                          format_dollars(e.input_cents()), format_dollars(e.output_cents()),
                          format_dollars(e.total_cents()), price_text(e.pricing.input_micro_per_m),
                          price_text(e.pricing.output_micro_per_m)});
    t.rows.push_back({"Total", "", "", "", "", format_dollars(grand_total_cents()), "", ""});
    return t;
}

ojson CostLedger::to_json() const {
    ojson models = ojson::array();
    for (const auto& e : entries_)
        models.push_back({{"model", e.model},
                          {"input_tokens", e.usage.input_tokens},
                          {"output_tokens", e.usage.output_tokens},
                          {"input_cost_cents", e.input_cents()},
                          {"output_cost_cents", e.output_cents()},
                          {"total_cost_cents", e.total_cents()},
                          {"input_price_micro_per_1m", e.pricing.input_micro_per_m},
                          {"output_price_micro_per_1m", e.pricing.output_micro_per_m}});
    return {{"models", models}, {"grand_total_cents", grand_total_cents()}};
}

// ---------------------------------------------------------------------------
// Archives

std::string archive_path(const std::string& dir, const std::string& model, const std::string& key) {
    return (fs::path(dir) / model / (key + ".json")).string();
}

ojson archive_entry(const ChatResponse& r) {
    return {{"envelope", r.envelope},
            {"payload", r.payload},
            {"usage", {{"input_tokens", r.usage.input_tokens}, {"output_tokens", r.usage.output_tokens}}},
            {"latency_ms", r.latency_ms}};
}

ChatResponse response_from_archive(const ojson& entry) {
    if (!entry.is_object() || !entry.contains("payload") || !entry.contains("envelope") ||
        !entry["envelope"].is_string())
        throw ParseError("archive entry needs 'envelope' and 'payload'");
    ChatResponse r;
    r.envelope = entry["envelope"].get<std::string>();
    if (r.envelope != "openai" && r.envelope != "anthropic")
        throw ParseError("archive entry has unknown envelope '" + r.envelope + "'");
    r.payload = entry["payload"];
    if (entry.contains("usage") && entry["usage"].is_object()) {
        const auto& u = entry["usage"];
        r.usage.input_tokens = u.value("input_tokens", std::uint64_t{0});
        r.usage.output_tokens = u.value("output_tokens", std::uint64_t{0});
    } else {
        r.usage = usage_from_payload(r.envelope, r.payload);
    }
    if (entry.contains("latency_ms") && entry["latency_ms"].is_number()) r.latency_ms = entry["latency_ms"].get<double>();
    return r;
}

ReplayProvider::ReplayProvider(std::string archive_dir, std::string model)
    : dir_(std::move(archive_dir)), model_(std::move(model)) {
    if (!fs::is_directory(fs::path(dir_) / model_))
        throw ProviderError("replay archive has no directory for model '" + model_ + "' under " + dir_);
}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
    const std::string path = archive_path(dir_, model_, request.key);
    if (!fs::exists(path)) throw ProviderError("no recorded response " + path);
    try {
        return response_from_archive(ojson::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ProviderError(path + ": " + e.what());
    } catch (const ParseError& e) {
        throw ProviderError(path + ": " + e.what());
    }
}

RecordingProvider::RecordingProvider(ChatProvider& inner, std::string archive_dir)
    : inner_(inner), dir_(std::move(archive_dir)) {}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
    ChatResponse r = inner_.complete(request);
    write_text_file(archive_path(dir_, inner_.model(), request.key), archive_entry(r).dump(2) + "\n");
    return r;
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
    if (config.provider == "replay") {
        if (config.endpoint.empty()) throw Error("replay provider needs an archive directory");
        return std::make_unique<ReplayProvider>(config.endpoint, config.model);
    }
    if (config.provider == "openai" || config.provider == "anthropic" || config.provider == "openai-compatible")
        return make_http_provider(config);
    throw Error("unknown provider '" + config.provider + "'");
}

// ---------------------------------------------------------------------------
// Payload normalization

Usage usage_from_payload(const std::string& envelope, const ojson& payload) {
    Usage u;
    if (!payload.is_object() || !payload.contains("usage") || !payload["usage"].is_object()) return u;
    const auto& usage = payload["usage"];
    const char* in = envelope == "anthropic" ? "input_tokens" : "prompt_tokens";
    const char* out = envelope == "anthropic" ? "output_tokens" : "completion_tokens";
    if (usage.contains(in) && usage[in].is_number_unsigned()) u.input_tokens = usage[in].get<std::uint64_t>();
    if (usage.contains(out) && usage[out].is_number_unsigned()) u.output_tokens = usage[out].get<std::uint64_t>();
    return u;
}

NormalizedReply normalize_reply(const ChatResponse& response) {
    const ojson& p = response.payload;
    NormalizedReply out;
    if (!p.is_object()) throw ParseError("provider payload is not an object");
    if (response.envelope == "openai") {
        if (!p.contains("choices") || !p["choices"].is_array() || p["choices"].empty())
            throw ParseError("payload has no choices");
        const ojson& choice = p["choices"][0];
        if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object())
            throw ParseError("first choice has no message");
        const ojson& msg = choice["message"];
        if (msg.contains("content") && msg["content"].is_string()) out.text = msg["content"].get<std::string>();
        if (msg.contains("tool_calls") && !msg["tool_calls"].is_null()) {
            if (!msg["tool_calls"].is_array()) throw ParseError("tool_calls is not an array");
            for (const auto& call : msg["tool_calls"]) {
                if (!call.is_object() || !call.contains("function") || !call["function"].is_object())
                    throw ParseError("tool call without function");
                const ojson& fn = call["function"];
                if (!fn.contains("name") || !fn["name"].is_string()) throw ParseError("tool call without name");
                out.calls.push_back({fn["name"].get<std::string>(), fn.value("arguments", ojson("{}"))});
            }
        }
        return out;
    }
    if (response.envelope == "anthropic") {
        if (!p.contains("content") || !p["content"].is_array()) throw ParseError("payload has no content blocks");
        std::string text;
        bool any_text = false;
        for (const auto& block : p["content"]) {
            const std::string type = block.is_object() ? block.value("type", "") : "";
            if (type == "text") {
                if (any_text) text += "\n";
                text += block.value("text", "");
                any_text = true;
            } else if (type == "tool_use") {
                if (!block.contains("name") || !block["name"].is_string()) throw ParseError("tool_use without name");
                out.calls.push_back({block["name"].get<std::string>(), block.value("input", ojson::object())});
            }
        }
        if (any_text) out.text = text;
        return out;
    }
    throw ParseError("unknown envelope '" + response.envelope + "'");
}

std::string ProviderTextGenerator::generate(const std::string& system, const std::string& prompt) {
    char key[40];
    std::snprintf(key, sizeof key, "%016llx", static_cast<unsigned long long>(fnv1a(prompt, fnv1a(system))));
    ChatRequest req;
    req.key = prefix_ + "-" + key;
    req.system = system;
    req.user = prompt;
    ChatResponse r;
    try {
        r = provider_.complete(req);
    } catch (const Error& e) {
        throw GeneratorFailure(std::string("text generation request failed: ") + e.what());
    }
    try {
        auto reply = normalize_reply(r);
        if (!reply.text) throw ParseError("reply has no text");
        return *reply.text;
    } catch (const ParseError& e) {
        throw GeneratorFailure(std::string("text generation reply unusable: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Tools and prompts

ToolSet build_toolset(const UseCase& use_case, const ModeFlags& mode, std::size_t budget) {
    mode.check();
    ToolSet set;
    set.parallel_tool_calls = mode.parallel_tool_calls;
    if (mode.structured_generation) {
        set.response_schema = tools::build_structured_output_schema(use_case, budget);
        return set;
    }
    if (mode.per_collection_tools) set.tools = tools::build_per_collection_tools(use_case, budget);
    else set.tools.push_back(tools::build_unified_tool(use_case, budget));
    if (mode.rationale_required)
        for (auto& t : set.tools) t = tools::with_rationale(t);
    return set;
}

std::string system_prompt(const ModeFlags& mode) {
    if (mode.structured_generation)
        return "You are a helpful assistant with access to a database. Reply with a JSON object matching the "
               "ResponseOrToolCall schema: set use_tools to true and list tool_calls with arguments for the "
               "query_database function when querying the database helps, otherwise set use_tools to false and "
               "answer in response.";
    return "You are a helpful assistant with access to a database. Use the available tools to query the "
           "database when they help answer the user's request.";
}

// ---------------------------------------------------------------------------
// Outcomes

ojson to_json(const PredictionOutcome& o) {
    ojson doc;
    doc["record_id"] = o.record_id;
    doc["model"] = o.model;
    doc["kind"] = std::string(eval::to_string(o.kind));
    ojson queries = ojson::array();
    for (const auto& q : o.queries) queries.push_back(to_json(q));
    doc["queries"] = queries;
    doc["rationale"] = o.rationale ? ojson(*o.rationale) : ojson();
    doc["response_text"] = o.response_text;
    doc["raw_payload"] = o.raw_payload;
    doc["diagnostics"] = o.diagnostics;
    doc["usage"] = {{"input_tokens", o.usage.input_tokens}, {"output_tokens", o.usage.output_tokens}};
    doc["latency_ms"] = o.latency_ms;
    return doc;
}

PredictionOutcome outcome_from_json(const ojson& doc) {
    if (!doc.is_object()) throw ParseError("outcome must be an object");
    PredictionOutcome o;
    try {
        o.record_id = doc.at("record_id").get<std::string>();
        o.model = doc.at("model").get<std::string>();
        auto kind = eval::parse_prediction_kind(doc.at("kind").get<std::string>());
        if (!kind) throw ParseError("outcome has unknown kind");
        o.kind = *kind;
        for (const auto& q : doc.at("queries")) o.queries.push_back(query_from_json(q));
        if (doc.contains("rationale") && doc["rationale"].is_string()) o.rationale = doc["rationale"].get<std::string>();
        o.response_text = doc.value("response_text", "");
        o.raw_payload = doc.value("raw_payload", "");
        if (doc.contains("diagnostics"))
            for (const auto& d : doc["diagnostics"]) o.diagnostics.push_back(d.get<std::string>());
        if (doc.contains("usage")) {
            o.usage.input_tokens = doc["usage"].value("input_tokens", std::uint64_t{0});
            o.usage.output_tokens = doc["usage"].value("output_tokens", std::uint64_t{0});
        }
        o.latency_ms = doc.value("latency_ms", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("outcome: ") + e.what());
    }
    if (o.kind == eval::Prediction::Kind::ToolCall && o.queries.empty())
        throw ParseError(o.record_id + ": TOOL_CALL outcome without queries");
    return o;
}

std::string outcomes_jsonl(const std::vector<PredictionOutcome>& outcomes) {
    std::string out;
    for (const auto& o : outcomes) out += to_json(o).dump() + "\n";
    return out;
}

std::vector<PredictionOutcome> read_outcomes_jsonl(std::string_view text) {
    std::vector<PredictionOutcome> out;
    for (const auto& line : split_lines(text)) {
        try {
            out.push_back(outcome_from_json(ojson::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("outcomes: ") + e.what());
        }
    }
    return out;
}

PredictionOutcome interpret_reply(const DatasetRecord& record, const UseCase& use_case, const ModeFlags& mode,
                                  const ChatResponse& response, const std::string& model) {
    PredictionOutcome o;
    o.record_id = record.record_id;
    o.model = model;
    o.usage = response.usage;
    o.latency_ms = response.latency_ms;
    o.raw_payload = response.payload.dump();

    auto malformed = [&](std::string why) {
        o.kind = eval::Prediction::Kind::Malformed;
        o.diagnostics.push_back(std::move(why));
        return o;
    };

    NormalizedReply reply;
    try {
        reply = normalize_reply(response);
    } catch (const ParseError& e) {
        return malformed(std::string("payload: ") + e.what());
    }
    if (reply.text) o.response_text = *reply.text;

    // Structured generation delivers everything through the text channel.
    std::vector<std::pair<std::string, ojson>> calls;
    if (mode.structured_generation) {
        tools::StructuredResponse sr;
        try {
            if (!reply.text) throw ParseError("structured reply has no text content");
            sr = tools::parse_structured_response(std::string_view(*reply.text));
        } catch (const ParseError& e) {
            return malformed(std::string("structured output: ") + e.what());
        }
        o.rationale = sr.tool_rationale;
        if (!sr.use_tools) {
            o.kind = eval::Prediction::Kind::NoTool;
            o.response_text = sr.response.value_or("");
            return o;
        }
        for (auto& c : sr.tool_calls) calls.emplace_back(c.function_name, to_json(c.arguments));
    } else {
        if (reply.calls.empty()) {
            o.kind = eval::Prediction::Kind::NoTool;
            return o;
        }
        for (auto& c : reply.calls) calls.emplace_back(c.name, c.arguments);
    }
    if (!mode.parallel_tool_calls && calls.size() > 1) {
        o.diagnostics.push_back("ignored " + std::to_string(calls.size() - 1) +
                                " extra tool call(s): parallel calls are disabled");
        calls.resize(1);
    }

    bool bad = false;
    for (const auto& [name, args] : calls) {
        tools::ParsedCall parsed;
        try {
            parsed = args.is_string() ? tools::parse_tool_call(name, std::string_view(args.get_ref<const std::string&>()))
                                      : tools::parse_tool_call(name, args);
        } catch (const ParseError& e) {
            o.diagnostics.push_back(name + ": " + e.what());
            bad = true;
            continue;
        }
        if (parsed.rationale && !o.rationale) o.rationale = parsed.rationale;
        if (mode.rationale_required && !parsed.rationale) {
            o.diagnostics.push_back(name + ": missing required rationale");
            bad = true;
        }
        auto v = validate(parsed.query, use_case);
        if (!v.ok()) {
            o.diagnostics.push_back(name + ": " + v.summary());
            bad = true;
        }
        o.queries.push_back(std::move(parsed.query));
    }
    o.kind = bad ? eval::Prediction::Kind::Malformed : eval::Prediction::Kind::ToolCall;
    return o;
}

PredictionOutcome run_single_step(const DatasetRecord& record, const UseCase& use_case, ChatProvider& provider,
                                  const ProviderConfig& config, const ToolSet& tools) {
    ChatRequest req;
    req.key = record.record_id;
    req.system = system_prompt(config.mode);
    req.user = record.nl_command;
    req.tools = tools.tools;
    req.parallel_tool_calls = tools.parallel_tool_calls;
    req.response_schema = tools.response_schema;
    req.temperature = config.temperature;

    const int attempts = std::max(1, config.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            ChatResponse r = provider.complete(req);
            return interpret_reply(record, use_case, config.mode, r, provider.model());
        } catch (const TransportError&) {
            if (attempt >= attempts) throw;
            std::this_thread::sleep_for(config.backoff * (1 << (attempt - 1)));
        }
    }
}

eval::EvalOutcome score_parallel(const PredictionOutcome& outcome, const DatasetRecord& truth,
                                 const eval::CompareOptions& options) {
    return eval::score_prediction(outcome.model, truth, outcome.prediction(), options);
}

RunResult run_benchmark(const Dataset& dataset, ChatProvider& provider, const ProviderConfig& config) {
    config.mode.check();
    std::map<std::string, ToolSet> toolsets;
    for (const auto& u : dataset.use_cases) toolsets.emplace(u.name, build_toolset(u, config.mode, config.description_budget));

    std::vector<const DatasetRecord*> records;
    for (const auto& r : dataset.records) records.push_back(&r);
    std::sort(records.begin(), records.end(), [](auto* a, auto* b) { return a->record_id < b->record_id; });

    std::vector<PredictionOutcome> outcomes(records.size());
    std::atomic<std::size_t> failures{0};
    const std::string model = provider.model();
    parallel_for(records.size(), config.max_in_flight, [&](std::size_t i) {
        const DatasetRecord& rec = *records[i];
        const UseCase& u = dataset.use_case(rec.schema_ref);
        try {
            outcomes[i] = run_single_step(rec, u, provider, config, toolsets.at(rec.schema_ref));
            return;
        } catch (const TransportError& e) {
            outcomes[i].diagnostics.push_back(std::string("transport: ") + e.what());
        } catch (const ProviderError& e) {
            outcomes[i].diagnostics.push_back(std::string("provider: ") + e.what());
        }
        outcomes[i].record_id = rec.record_id;
        outcomes[i].model = model;
        outcomes[i].kind = eval::Prediction::Kind::Malformed;
        if (failures.fetch_add(1) + 1 >= config.abort_after && config.abort_after > 0)
            throw AbortAfterNFailures(config.abort_after);
    });

    RunResult result;
    std::size_t calls = 0, calling = 0;
    for (const auto& o : outcomes) {
        result.ledger.add(model, o.usage, config.pricing);
        if (!o.queries.empty()) {
            calls += o.queries.size();
            ++calling;
        }
    }
    result.mean_calls = calling ? double(calls) / double(calling) : 0.0;
    result.outcomes = std::move(outcomes);
    return result;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ojson run_metadata(const ProviderConfig& config, std::uint64_t seed, const std::string& dataset_dir,
                   const std::string& started_at, const std::string& finished_at, std::size_t records) {
    ojson doc;
    doc["provider"] = config.provider;
    doc["model"] = config.model;
    doc["endpoint"] = config.endpoint;
    doc["mode"] = config.mode.to_json();
    doc["seed"] = seed;
    doc["dataset"] = dataset_dir;
    doc["records"] = records;
    doc["temperature"] = config.temperature ? ojson(*config.temperature) : ojson("provider default");
    doc["max_in_flight"] = config.max_in_flight;
    doc["max_attempts"] = config.max_attempts;
    doc["description_budget"] = config.description_budget;
    doc["started_at"] = started_at;
    doc["finished_at"] = finished_at;
    return doc;
}

// ---------------------------------------------------------------------------
// Judge

ojson to_json(const Judgment& j) {
    ojson ranks = ojson::object();
    for (const auto& [model, rank] : j.ranks) ranks[model] = rank;
    ojson preds = ojson::object();
    for (const auto& [label, text] : j.predictions) preds[label] = text;
    return {{"record_id", j.record_id}, {"ranks", ranks}, {"explanation", j.explanation}, {"predictions", preds}};
}

Judgment judgment_from_json(const ojson& doc) {
    Judgment j;
    try {
        j.record_id = doc.at("record_id").get<std::string>();
        for (const auto& [model, rank] : doc.at("ranks").items()) j.ranks[model] = rank.get<int>();
        j.explanation = doc.value("explanation", "");
        if (doc.contains("predictions"))
            for (const auto& [label, text] : doc["predictions"].items())
                j.predictions.emplace_back(label, text.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("judgment: ") + e.what());
    }
    return j;
}

std::string judgments_jsonl(const std::vector<Judgment>& judgments) {
    std::string out;
    for (const auto& j : judgments) out += to_json(j).dump() + "\n";
    return out;
}

std::vector<Judgment> read_judgments_jsonl(std::string_view text) {
    std::vector<Judgment> out;
    for (const auto& line : split_lines(text)) {
        try {
            out.push_back(judgment_from_json(ojson::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("judgments: ") + e.what());
        }
    }
    return out;
}

namespace {

std::string prediction_text(const PredictionOutcome& o) {
    if (o.kind == eval::Prediction::Kind::NoTool) return "No tool call. Response: " + o.response_text;
    if (o.queries.empty()) return "Unparseable tool call.";
    std::string s;
    for (std::size_t i = 0; i < o.queries.size(); ++i) s += (i ? "\n" : "") + serialize(canonicalize(o.queries[i]));
    return s;
}

}  // namespace

ojson judge_response_schema() {
    return ojson::parse(R"({
  "type": "object",
  "properties": {
    "ranking": {
      "type": "array",
      "items": {
        "type": "object",
        "properties": {"prediction": {"type": "string"}, "rank": {"type": "integer"}},
        "required": ["prediction", "rank"]
      }
    },
    "explanation": {"type": "string"}
  },
  "required": ["ranking", "explanation"]
})");
}

std::string judge_prompt(const DatasetRecord& record, const UseCase& use_case,
                         const std::vector<std::pair<std::string, std::string>>& predictions) {
    std::ostringstream p;
    p << "A user asked a database assistant:\n" << record.nl_command << "\n\n"
      << "The database:\n" << render_description(use_case, kDefaultToolBudget * 4) << "\n\n"
      << "Candidate database queries produced for this request:\n";
    for (const auto& [label, text] : predictions) p << "\n" << label << ":\n" << text << "\n";
    p << "\nRank the candidates from 1 (best) to " << predictions.size()
      << " by how well they answer the request. Equally good candidates may share a rank. Reply with JSON "
         "{\"ranking\": [{\"prediction\": \"P1\", \"rank\": 1}, ...], \"explanation\": \"...\"}.";
    return p.str();
}

Judgment judge_predictions(const DatasetRecord& record, const UseCase& use_case,
                           const std::vector<PredictionOutcome>& per_model, ChatProvider& judge) {
    Judgment j;
    j.record_id = record.record_id;
    std::vector<const PredictionOutcome*> sorted;
    for (const auto& o : per_model) sorted.push_back(&o);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->model < b->model; });

    std::map<std::string, std::string> label_of;  // prediction text -> label
    std::map<std::string, std::string> model_label;
    for (const auto* o : sorted) {
        const std::string text = prediction_text(*o);
        auto it = label_of.find(text);
        if (it == label_of.end()) {
            const std::string label = "P" + std::to_string(label_of.size() + 1);
            it = label_of.emplace(text, label).first;
            j.predictions.emplace_back(label, text);
        }
        model_label[o->model] = it->second;
    }
    if (j.predictions.size() <= 1) {
        for (const auto& [model, _] : model_label) j.ranks[model] = 1;
        j.explanation = "All predictions are identical.";
        return j;
    }

    ChatRequest req;
    req.key = record.record_id;
    req.system = "You are an expert judge of database queries. Candidates are anonymized.";
    req.user = judge_prompt(record, use_case, j.predictions);
    req.response_schema = judge_response_schema();

    ChatResponse r;
    try {
        r = judge.complete(req);
    } catch (const Error& e) {
        throw GeneratorFailure(record.record_id + ": judge request failed: " + e.what());
    }
    std::map<std::string, int> label_rank;
    try {
        auto reply = normalize_reply(r);
        if (!reply.text) throw ParseError("judge reply has no text");
        const std::string& text = *reply.text;
        const auto b = text.find('{');
        const auto e = text.rfind('}');
        if (b == std::string::npos || e == std::string::npos || e < b) throw ParseError("no JSON object in judge reply");
        const ojson doc = ojson::parse(text.substr(b, e - b + 1));
        if (!doc.contains("ranking") || !doc["ranking"].is_array()) throw ParseError("judge reply has no ranking");
        for (const auto& item : doc["ranking"]) {
            const std::string label = item.at("prediction").get<std::string>();
            const int rank = item.at("rank").get<int>();
            if (rank < 1 || rank > int(j.predictions.size())) throw RankOutOfRange(rank, int(j.predictions.size()));
            if (!label_rank.emplace(label, rank).second) throw ParseError("judge ranked " + label + " twice");
        }
        for (const auto& [label, _] : j.predictions)
            if (!label_rank.count(label)) throw ParseError("judge did not rank " + label);
        if (label_rank.size() != j.predictions.size()) throw ParseError("judge ranked unknown predictions");
        j.explanation = doc.value("explanation", "");
    } catch (const nlohmann::json::exception& e) {
        throw GeneratorFailure(record.record_id + ": judge reply unusable: " + e.what());
    } catch (const Error& e) {
        throw GeneratorFailure(record.record_id + ": judge reply unusable: " + e.what());
    }
    for (const auto& [model, label] : model_label) j.ranks[model] = label_rank.at(label);
    return j;
}

std::map<std::string, std::vector<int>> rank_lists(const std::vector<Judgment>& judgments) {
    std::map<std::string, std::vector<int>> out;
    for (const auto& j : judgments)
        for (const auto& [model, rank] : j.ranks) out[model].push_back(rank);
    return out;
}

}  // namespace dbgorilla::harness
