#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbgorilla/benchgen.hpp"
#include "dbgorilla/dataset.hpp"
#include "dbgorilla/eval.hpp"
#include "dbgorilla/toolgen.hpp"

namespace dbgorilla::harness {

enum class Mode { Unified, PerCollectionTools, Structured, Rationale, Parallel };
std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);

struct ModeFlags {
    bool parallel_tool_calls = false;
    bool structured_generation = false;
    bool per_collection_tools = false;
    bool rationale_required = false;

    static ModeFlags from(Mode mode);
    // Structured generation replaces native tools, so it cannot be combined
    // with per-collection tools or a rationale argument. Throws Error.
    void check() const;
    nlohmann::ordered_json to_json() const;
    bool operator==(const ModeFlags&) const = default;
};

// Prices are held in micro-dollars per million tokens so cost arithmetic
// stays in integers.
struct Pricing {
    std::int64_t input_micro_per_m = 0;
    std::int64_t output_micro_per_m = 0;

    // Throws Error for negative or non-finite prices.
    static Pricing per_million(double input_dollars, double output_dollars);
    bool operator==(const Pricing&) const = default;
};

struct PricingEntry {
    std::string model;
    Pricing pricing;
    std::string note;
};

// Eight priced models plus the "Gemini 2.0 Flash (exp)" alias, which carries
// Gemini 1.5 Flash pricing and a note flagging the naming mismatch.
const std::vector<PricingEntry>& pricing_registry();
const PricingEntry* find_pricing(std::string_view model);

struct Usage {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    bool operator==(const Usage&) const = default;
};

// tokens x micro-dollars-per-million, in cents, rounded half up.
std::int64_t cost_cents(std::uint64_t tokens, std::int64_t micro_per_m);
std::string format_dollars(std::int64_t cents);

struct ModelCost {
    std::string model;
    Pricing pricing;
    Usage usage;

    std::int64_t input_cents() const { return cost_cents(usage.input_tokens, pricing.input_micro_per_m); }
    std::int64_t output_cents() const { return cost_cents(usage.output_tokens, pricing.output_micro_per_m); }
    std::int64_t total_cents() const { return input_cents() + output_cents(); }
};

// Single-owner accumulator; not thread-safe.
class CostLedger {
public:
    // Throws Error when a model is re-added with different pricing.
    void add(const std::string& model, const Usage& usage, const Pricing& pricing);
    const std::vector<ModelCost>& entries() const { return entries_; }
    const ModelCost* find(const std::string& model) const;
    std::int64_t grand_total_cents() const;

    eval::TextTable table() const;
    nlohmann::ordered_json to_json() const;

private:
    std::vector<ModelCost> entries_;
};

struct ProviderConfig {
    // "replay", "openai", "anthropic" or "openai-compatible".
    std::string provider = "replay";
    std::string model;
    // Base URL for HTTP providers, archive directory for replay.
    std::string endpoint;
    // Name of the environment variable holding the API key.
    std::string credential_env;
    Pricing pricing;
    ModeFlags mode;
    std::optional<double> temperature;
    std::size_t max_in_flight = 4;
    int max_attempts = 3;
    std::chrono::milliseconds backoff{250};
    std::size_t abort_after = 5;
    std::size_t description_budget = kDefaultToolBudget;
};

struct ChatRequest {
    // Archive key: record id, "judge/<record id>" etc.
    std::string key;
    std::string system;
    std::string user;
    std::vector<tools::ToolDefinition> tools;
    bool parallel_tool_calls = false;
    std::optional<nlohmann::ordered_json> response_schema;
    std::optional<double> temperature;
};

struct ChatResponse {
    // "openai" or "anthropic": which payload shape `payload` has.
    std::string envelope;
    nlohmann::ordered_json payload;
    Usage usage;
    double latency_ms = 0.0;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    // Throws TransportError (retryable) or ProviderError.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string model() const = 0;
};

// Reads <archive>/<model>/<key>.json holding {payload, envelope, usage, latency_ms}.
class ReplayProvider final : public ChatProvider {
public:
    ReplayProvider(std::string archive_dir, std::string model);
    ChatResponse complete(const ChatRequest& request) override;
    std::string model() const override { return model_; }

private:
    std::string dir_;
    std::string model_;
};

// Wraps another provider and writes every response into an archive that
// ReplayProvider can read back.
class RecordingProvider final : public ChatProvider {
public:
    RecordingProvider(ChatProvider& inner, std::string archive_dir);
    ChatResponse complete(const ChatRequest& request) override;
    std::string model() const override { return inner_.model(); }

private:
    ChatProvider& inner_;
    std::string dir_;
};

// Chat-completions over HTTP with OpenAI or Anthropic envelopes.
std::unique_ptr<ChatProvider> make_http_provider(const ProviderConfig& config);
// Replay or HTTP according to config.provider. Throws Error for unknown ids.
std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config);

// Request bodies as sent over the wire; exposed for tests.
nlohmann::ordered_json openai_request_body(const ChatRequest& request, const std::string& model);
nlohmann::ordered_json anthropic_request_body(const ChatRequest& request, const std::string& model);

std::string archive_path(const std::string& archive_dir, const std::string& model, const std::string& key);
nlohmann::ordered_json archive_entry(const ChatResponse& response);
ChatResponse response_from_archive(const nlohmann::ordered_json& entry);

// Provider-neutral view of the first reply.
struct RawCall {
    std::string name;
    // Object (Anthropic) or JSON text (OpenAI).
    nlohmann::ordered_json arguments;
};
struct NormalizedReply {
    std::optional<std::string> text;
    std::vector<RawCall> calls;
};
// Throws ParseError when the payload does not have the envelope's shape.
NormalizedReply normalize_reply(const ChatResponse& response);

// Usage reported by a payload, or zero.
Usage usage_from_payload(const std::string& envelope, const nlohmann::ordered_json& payload);

// benchgen-facing adapter: each prompt becomes one chat request keyed by a
// hash of its text, so recorded generations replay deterministically.
class ProviderTextGenerator final : public bench::TextGenerator {
public:
    explicit ProviderTextGenerator(ChatProvider& provider, std::string key_prefix = "gen")
        : provider_(provider), prefix_(std::move(key_prefix)) {}
    std::string generate(const std::string& system, const std::string& prompt) override;

private:
    ChatProvider& provider_;
    std::string prefix_;
};

struct ToolSet {
    std::vector<tools::ToolDefinition> tools;
    std::optional<nlohmann::ordered_json> response_schema;
    bool parallel_tool_calls = false;
};

ToolSet build_toolset(const UseCase& use_case, const ModeFlags& mode, std::size_t budget = kDefaultToolBudget);

std::string system_prompt(const ModeFlags& mode);

struct PredictionOutcome {
    std::string record_id;
    std::string model;
    eval::Prediction::Kind kind = eval::Prediction::Kind::NoTool;
    std::vector<QueryRequest> queries;
    std::optional<std::string> rationale;
    std::string response_text;
    // Compact dump of the provider payload (empty when none arrived).
    std::string raw_payload;
    std::vector<std::string> diagnostics;
    Usage usage;
    double latency_ms = 0.0;

    eval::Prediction prediction() const { return {kind, queries}; }
    bool operator==(const PredictionOutcome&) const = default;
};

nlohmann::ordered_json to_json(const PredictionOutcome& outcome);
PredictionOutcome outcome_from_json(const nlohmann::ordered_json& doc);
std::string outcomes_jsonl(const std::vector<PredictionOutcome>& outcomes);
std::vector<PredictionOutcome> read_outcomes_jsonl(std::string_view text);

// Interprets one reply. Never throws for bad model output: unparseable or
// invalid arguments give MALFORMED with diagnostics.
PredictionOutcome interpret_reply(const DatasetRecord& record, const UseCase& use_case, const ModeFlags& mode,
                                  const ChatResponse& response, const std::string& model);

// One request, one reply, no second turn. Transport errors are retried
// config.max_attempts times with exponential backoff and then rethrown.
PredictionOutcome run_single_step(const DatasetRecord& record, const UseCase& use_case, ChatProvider& provider,
                                  const ProviderConfig& config, const ToolSet& tools);

// Best-of scoring over all calls of one outcome.
eval::EvalOutcome score_parallel(const PredictionOutcome& outcome, const DatasetRecord& truth,
                                 const eval::CompareOptions& options = {});

struct RunResult {
    std::vector<PredictionOutcome> outcomes;  // sorted by record id
    CostLedger ledger;
    double mean_calls = 0.0;
};

// Failed requests become MALFORMED outcomes; once config.abort_after of
// them accumulate the run stops with AbortAfterNFailures.
RunResult run_benchmark(const Dataset& dataset, ChatProvider& provider, const ProviderConfig& config);

nlohmann::ordered_json run_metadata(const ProviderConfig& config, std::uint64_t seed, const std::string& dataset_dir,
                                    const std::string& started_at, const std::string& finished_at,
                                    std::size_t records);
std::string utc_timestamp();

struct Judgment {
    std::string record_id;
    // Rank of each model's prediction, 1 = best; models with identical
    // predictions share a rank.
    std::map<std::string, int> ranks;
    std::string explanation;
    // Anonymized label ("P1", ...) -> prediction text shown to the judge.
    std::vector<std::pair<std::string, std::string>> predictions;
    bool operator==(const Judgment&) const = default;
};

nlohmann::ordered_json to_json(const Judgment& judgment);
Judgment judgment_from_json(const nlohmann::ordered_json& doc);
std::string judgments_jsonl(const std::vector<Judgment>& judgments);
std::vector<Judgment> read_judgments_jsonl(std::string_view text);

// The judge sees the command, the schema and anonymized distinct
// predictions, never model names. All-identical predictions share rank 1
// without a judge call. Throws GeneratorFailure for an unusable ranking.
Judgment judge_predictions(const DatasetRecord& record, const UseCase& use_case,
                           const std::vector<PredictionOutcome>& per_model, ChatProvider& judge);

std::string judge_prompt(const DatasetRecord& record, const UseCase& use_case,
                         const std::vector<std::pair<std::string, std::string>>& predictions);
nlohmann::ordered_json judge_response_schema();

// Rank lists per model, ready for eval::preference_score.
std::map<std::string, std::vector<int>> rank_lists(const std::vector<Judgment>& judgments);

}  // namespace dbgorilla::harness
