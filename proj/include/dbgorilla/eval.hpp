#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbgorilla/dataset.hpp"
#include "dbgorilla/query.hpp"

namespace dbgorilla::eval {

struct AstWeights {
    double collection_weight = 0.40;
    // Applied to each of search, filters, aggregations, groupby.
    double component_weight = 0.15;

    // Throws Error unless collection_weight + 4 * component_weight == 1.
    void check() const;
};

struct CompareOptions {
    AstWeights weights;
    // Compare search_query and text filter values byte-for-byte instead of
    // after canonicalization.
    bool strict_text = false;
};

bool exact_match(const QueryRequest& pred, const QueryRequest& truth, bool strict_text = false);

// Per-component agreement. Filters and aggregations each compare all three
// typed slots at once; absent on both sides counts as agreement. Search
// compares presence only.
struct ComponentMatch {
    bool collection = false;
    bool search = false;
    bool filters = false;
    bool aggregations = false;
    bool groupby = false;

    int matched_components() const {
        return int(search) + int(filters) + int(aggregations) + int(groupby);
    }
    bool operator==(const ComponentMatch&) const = default;
};

ComponentMatch compare_components(const QueryRequest& pred, const QueryRequest& truth);

// nullopt stands for NO_TOOL. Results are snapped to 1e-9 so the lattice
// values compare equal to their decimal literals.
double ast_score(const std::optional<QueryRequest>& pred, const QueryRequest& truth,
                 const AstWeights& weights = {});

bool collection_routing(const std::optional<QueryRequest>& pred, const QueryRequest& truth);

// What one model produced for one record, reduced to what scoring needs.
struct Prediction {
    enum class Kind { ToolCall, NoTool, Malformed };
    Kind kind = Kind::NoTool;
    // Parsed calls; may be non-empty for Malformed when some calls parsed.
    std::vector<QueryRequest> queries;
};

std::string_view to_string(Prediction::Kind kind);
std::optional<Prediction::Kind> parse_prediction_kind(std::string_view name);

struct EvalOutcome {
    std::string model;
    std::string record_id;
    std::string schema_ref;
    CombinationId combination;
    ComplexityBucket complexity = ComplexityBucket::Simple;
    Prediction::Kind kind = Prediction::Kind::NoTool;

    bool exact_match = false;
    double ast_score = 0.0;
    bool routed_correctly = false;
    bool no_tool = false;
    // Agreement of the best-scoring call.
    ComponentMatch components;
    std::size_t calls = 0;
    // Best call carries more than one filter or aggregation kind.
    bool multi_slot = false;
    std::optional<QueryRequest> best_call;
};

// With several calls: EM if any call matches, AST is the maximum, routing
// and components come from the highest-AST call (first one on ties).
EvalOutcome score_prediction(const std::string& model, const DatasetRecord& record,
                             const Prediction& prediction, const CompareOptions& options = {});

struct PreferenceWeights {
    // Points for ranks 1, 2, ...; ranks past the end score 0.
    std::vector<int> points{100, 70, 50, 35, 25, 20, 15, 10, 5, 0};

    int points_for(int rank) const;
};

struct PreferenceScore {
    std::string model;
    std::int64_t weighted_score = 0;
    std::size_t first_places = 0;
    std::size_t queries = 0;
    double first_place_pct() const { return queries == 0 ? 0.0 : 100.0 * double(first_places) / double(queries); }
};

// `ranks[model]` lists that model's rank on each judged query. Ranks must
// lie in 1..max_rank; throws RankOutOfRange otherwise. Output is ordered by
// model name.
std::vector<PreferenceScore> preference_score(const std::map<std::string, std::vector<int>>& ranks, int max_rank,
                                              const PreferenceWeights& weights = {});

struct LeaderboardRow {
    std::string model;
    std::size_t records = 0;
    double exact_match_pct = 0.0;
    std::optional<double> simple_pct;
    std::optional<double> moderate_pct;
    std::optional<double> complex_pct;
    double ast_mean = 0.0;
    double routing_pct = 0.0;
    double no_tool_pct = 0.0;
    double mean_calls = 0.0;
};

// Component categories in report order.
enum class Component {
    SearchQueries,
    IntegerFilters,
    TextFilters,
    BooleanFilters,
    IntegerAggregations,
    TextAggregations,
    BooleanAggregations,
    GroupBy
};
const std::vector<Component>& all_components();
std::string_view label(Component component);
bool uses_component(const CombinationId& combination, Component component);

struct NoToolRow {
    std::string model;
    std::size_t records = 0;
    std::size_t no_tool = 0;
    std::size_t malformed = 0;
    std::size_t multi_slot = 0;
    double no_tool_pct() const { return records == 0 ? 0.0 : 100.0 * double(no_tool) / double(records); }
};

// Cells are EM% over the records that qualify; nullopt when none do.
struct Breakdown {
    std::vector<std::string> models;
    std::vector<std::string> row_labels;
    std::vector<std::vector<std::optional<double>>> cells;
};

struct Reports {
    std::vector<LeaderboardRow> leaderboard;  // EM desc, then AST desc, then name
    Breakdown components;
    Breakdown per_schema;
    std::vector<NoToolRow> no_tool;
    std::vector<PreferenceScore> preference;  // empty unless rankings were supplied
};

// Throws MissingRecord when an outcome names a record absent from the
// dataset, and Error when `outcomes` is empty.
Reports build_reports(const std::vector<EvalOutcome>& outcomes, const std::vector<DatasetRecord>& dataset);

// Pre-formatted table for the renderers below.
struct TextTable {
    std::string title;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

TextTable leaderboard_table(const Reports& reports);
TextTable component_table(const Reports& reports);
TextTable per_schema_table(const Reports& reports);
TextTable no_tool_table(const Reports& reports);
TextTable preference_table(const Reports& reports);
// Model positions under the EM, AST and (when available) preference orders.
TextTable rankings_table(const Reports& reports);

std::string render_markdown(const TextTable& table);
std::string render_csv(const TextTable& table);
// Self-contained page with every report table and one anchored section per
// record (id "rec-<record_id>") listing each model's best call.
std::string render_html(const Reports& reports, const std::vector<EvalOutcome>& outcomes,
                        const std::vector<DatasetRecord>& dataset);

// One row per (model, record id), sorted that way, with every outcome field.
std::string outcomes_csv(const std::vector<EvalOutcome>& outcomes);

std::string format_fixed(double value, int decimals);

}  // namespace dbgorilla::eval
