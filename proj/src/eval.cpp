#include "dbgorilla/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dbgorilla/error.hpp"

namespace dbgorilla::eval {

void AstWeights::check() const {
    if (collection_weight < 0 || component_weight < 0)
        throw Error("AST weights must be non-negative");
    if (std::abs(collection_weight + 4 * component_weight - 1.0) > 1e-9)
        throw Error("AST weights must sum to 1 (collection + 4 x component)");
}

bool exact_match(const QueryRequest& pred, const QueryRequest& truth, bool strict_text) {
    if (strict_text) return pred == truth;
    return canonicalize(pred) == canonicalize(truth);
}

ComponentMatch compare_components(const QueryRequest& pred_raw, const QueryRequest& truth_raw) {
    const QueryRequest pred = canonicalize(pred_raw);
    const QueryRequest truth = canonicalize(truth_raw);
    ComponentMatch m;
    m.collection = pred.collection_name == truth.collection_name;
    m.search = pred.search_query.has_value() == truth.search_query.has_value();
    m.filters = pred.integer_property_filter == truth.integer_property_filter &&
                pred.text_property_filter == truth.text_property_filter &&
                pred.boolean_property_filter == truth.boolean_property_filter;
    m.aggregations = pred.integer_property_aggregation == truth.integer_property_aggregation &&
                     pred.text_property_aggregation == truth.text_property_aggregation &&
                     pred.boolean_property_aggregation == truth.boolean_property_aggregation;
    m.groupby = pred.groupby_property == truth.groupby_property;
    return m;
}

namespace {

double snap(double x) { return std::round(x * 1e9) / 1e9; }

double score_components(const ComponentMatch& m, const AstWeights& w) {
    if (!m.collection) return 0.0;
    return snap(w.collection_weight + m.matched_components() * w.component_weight);
}

bool multi_slot(const QueryRequest& q) {
    const int filters = int(q.integer_property_filter.has_value()) + int(q.text_property_filter.has_value()) +
                        int(q.boolean_property_filter.has_value());
    const int aggs = int(q.integer_property_aggregation.has_value()) +
                     int(q.text_property_aggregation.has_value()) +
                     int(q.boolean_property_aggregation.has_value());
    return filters > 1 || aggs > 1;
}

}  // namespace

double ast_score(const std::optional<QueryRequest>& pred, const QueryRequest& truth, const AstWeights& weights) {
    if (!pred) return 0.0;
    return score_components(compare_components(*pred, truth), weights);
}

bool collection_routing(const std::optional<QueryRequest>& pred, const QueryRequest& truth) {
    return pred && pred->collection_name == truth.collection_name;
}

std::string_view to_string(Prediction::Kind kind) {
    switch (kind) {
        case Prediction::Kind::ToolCall: return "TOOL_CALL";
        case Prediction::Kind::NoTool: return "NO_TOOL";
        case Prediction::Kind::Malformed: return "MALFORMED";
    }
    return "?";
}

std::optional<Prediction::Kind> parse_prediction_kind(std::string_view name) {
    if (name == "TOOL_CALL") return Prediction::Kind::ToolCall;
    if (name == "NO_TOOL") return Prediction::Kind::NoTool;
    if (name == "MALFORMED") return Prediction::Kind::Malformed;
    return std::nullopt;
}

EvalOutcome score_prediction(const std::string& model, const DatasetRecord& record, const Prediction& prediction,
                             const CompareOptions& options) {
    EvalOutcome out;
    out.model = model;
    out.record_id = record.record_id;
    out.schema_ref = record.schema_ref;
    out.combination = record.combination;
    out.complexity = complexity(record.combination);
    out.kind = prediction.kind;
    out.no_tool = prediction.kind == Prediction::Kind::NoTool;
    if (prediction.kind == Prediction::Kind::ToolCall && prediction.queries.empty())
        throw Error(record.record_id + ": TOOL_CALL prediction without parsed queries");
    if (out.no_tool) return out;

    out.calls = prediction.queries.size();
    std::optional<std::size_t> best;
    double best_score = -1.0;
    for (std::size_t i = 0; i < prediction.queries.size(); ++i) {
        const auto& q = prediction.queries[i];
        const ComponentMatch m = compare_components(q, record.ground_truth_query);
        const double s = score_components(m, options.weights);
        if (exact_match(q, record.ground_truth_query, options.strict_text)) out.exact_match = true;
        if (s > best_score) {
            best_score = s;
            best = i;
            out.components = m;
        }
    }
    if (best) {
        out.ast_score = best_score;
        out.best_call = prediction.queries[*best];
        out.routed_correctly = out.components.collection;
        out.multi_slot = multi_slot(*out.best_call);
    }
    return out;
}

int PreferenceWeights::points_for(int rank) const {
    if (rank < 1) throw RankOutOfRange(rank, int(points.size()));
    const auto idx = static_cast<std::size_t>(rank - 1);
    return idx < points.size() ? points[idx] : 0;
}

std::vector<PreferenceScore> preference_score(const std::map<std::string, std::vector<int>>& ranks, int max_rank,
                                              const PreferenceWeights& weights) {
    for (std::size_t i = 1; i < weights.points.size(); ++i)
        if (weights.points[i] > weights.points[i - 1]) throw Error("preference weights must be non-increasing");
    std::vector<PreferenceScore> out;
    for (const auto& [model, list] : ranks) {
        PreferenceScore s;
        s.model = model;
        for (int r : list) {
            if (r < 1 || r > max_rank) throw RankOutOfRange(r, max_rank);
            s.weighted_score += weights.points_for(r);
            s.first_places += r == 1 ? 1 : 0;
            ++s.queries;
        }
        out.push_back(s);
    }
    return out;
}

const std::vector<Component>& all_components() {
    static const std::vector<Component> list{
        Component::SearchQueries,       Component::IntegerFilters,   Component::TextFilters,
        Component::BooleanFilters,      Component::IntegerAggregations, Component::TextAggregations,
        Component::BooleanAggregations, Component::GroupBy};
    return list;
}

std::string_view label(Component c) {
    switch (c) {
        case Component::SearchQueries: return "Search Queries";
        case Component::IntegerFilters: return "Integer Filters";
        case Component::TextFilters: return "Text Filters";
        case Component::BooleanFilters: return "Boolean Filters";
        case Component::IntegerAggregations: return "Integer Aggregations";
        case Component::TextAggregations: return "Text Aggregations";
        case Component::BooleanAggregations: return "Boolean Aggregations";
        case Component::GroupBy: return "GroupBy Operations";
    }
    return "?";
}

bool uses_component(const CombinationId& id, Component c) {
    switch (c) {
        case Component::SearchQueries: return id.search;
        case Component::IntegerFilters: return id.filter == OperandKind::Int;
        case Component::TextFilters: return id.filter == OperandKind::Text;
        case Component::BooleanFilters: return id.filter == OperandKind::Bool;
        case Component::IntegerAggregations: return id.aggregation == OperandKind::Int;
        case Component::TextAggregations: return id.aggregation == OperandKind::Text;
        case Component::BooleanAggregations: return id.aggregation == OperandKind::Bool;
        case Component::GroupBy: return id.groupby;
    }
    return false;
}

namespace {

struct Tally {
    std::size_t n = 0;
    std::size_t hits = 0;
    void add(bool hit) {
        ++n;
        hits += hit ? 1 : 0;
    }
    std::optional<double> pct() const {
        if (n == 0) return std::nullopt;
        return 100.0 * double(hits) / double(n);
    }
};

}  // namespace

Reports build_reports(const std::vector<EvalOutcome>& outcomes_in, const std::vector<DatasetRecord>& dataset) {
    if (outcomes_in.empty()) throw Error("no outcomes to report on");
    std::unordered_map<std::string, const DatasetRecord*> by_id;
    std::vector<std::string> schema_order;
    for (const auto& r : dataset) {
        by_id.emplace(r.record_id, &r);
        if (std::find(schema_order.begin(), schema_order.end(), r.schema_ref) == schema_order.end())
            schema_order.push_back(r.schema_ref);
    }

    std::vector<EvalOutcome> outcomes = outcomes_in;
    std::sort(outcomes.begin(), outcomes.end(), [](const EvalOutcome& a, const EvalOutcome& b) {
        return std::tie(a.model, a.record_id) < std::tie(b.model, b.record_id);
    });

    struct ModelStats {
        Tally em, simple, moderate, complex, routing, no_tool;
        double ast_sum = 0.0;
        std::size_t calls = 0, calling = 0, malformed = 0, multi_slot = 0;
        std::vector<Tally> components = std::vector<Tally>(all_components().size());
        std::map<std::string, Tally> schemas;
    };
    std::map<std::string, ModelStats> stats;
    std::set<std::pair<std::string, std::string>> seen;

    for (const auto& o : outcomes) {
        auto it = by_id.find(o.record_id);
        if (it == by_id.end()) throw MissingRecord(o.record_id);
        if (!seen.emplace(o.model, o.record_id).second)
            throw Error("duplicate outcome for " + o.model + " / " + o.record_id);
        const DatasetRecord& rec = *it->second;
        ModelStats& s = stats[o.model];
        s.em.add(o.exact_match);
        switch (complexity(rec.combination)) {
            case ComplexityBucket::Simple: s.simple.add(o.exact_match); break;
            case ComplexityBucket::Moderate: s.moderate.add(o.exact_match); break;
            case ComplexityBucket::Complex: s.complex.add(o.exact_match); break;
        }
        s.ast_sum += o.ast_score;
        s.routing.add(o.routed_correctly);
        s.no_tool.add(o.no_tool);
        if (o.calls > 0) {
            s.calls += o.calls;
            ++s.calling;
        }
        s.malformed += o.kind == Prediction::Kind::Malformed ? 1 : 0;
        s.multi_slot += o.multi_slot ? 1 : 0;
        for (std::size_t c = 0; c < all_components().size(); ++c)
            if (uses_component(rec.combination, all_components()[c])) s.components[c].add(o.exact_match);
        s.schemas[rec.schema_ref].add(o.exact_match);
    }

    Reports reports;
    for (const auto& [model, s] : stats) {
        LeaderboardRow row;
        row.model = model;
        row.records = s.em.n;
        row.exact_match_pct = *s.em.pct();
        row.simple_pct = s.simple.pct();
        row.moderate_pct = s.moderate.pct();
        row.complex_pct = s.complex.pct();
        row.ast_mean = s.ast_sum / double(s.em.n);
        row.routing_pct = *s.routing.pct();
        row.no_tool_pct = *s.no_tool.pct();
        row.mean_calls = s.calling == 0 ? 0.0 : double(s.calls) / double(s.calling);
        reports.leaderboard.push_back(row);
    }
    std::sort(reports.leaderboard.begin(), reports.leaderboard.end(),
              [](const LeaderboardRow& a, const LeaderboardRow& b) {
                  if (a.exact_match_pct != b.exact_match_pct) return a.exact_match_pct > b.exact_match_pct;
                  if (a.ast_mean != b.ast_mean) return a.ast_mean > b.ast_mean;
                  return a.model < b.model;
              });

    for (const auto& row : reports.leaderboard) {
        reports.components.models.push_back(row.model);
        reports.per_schema.models.push_back(row.model);
        const ModelStats& s = stats.at(row.model);
        NoToolRow nt;
        nt.model = row.model;
        nt.records = s.em.n;
        nt.no_tool = s.no_tool.hits;
        nt.malformed = s.malformed;
        nt.multi_slot = s.multi_slot;
        reports.no_tool.push_back(nt);
    }
    for (std::size_t c = 0; c < all_components().size(); ++c) {
        reports.components.row_labels.emplace_back(label(all_components()[c]));
        std::vector<std::optional<double>> cells;
        for (const auto& m : reports.components.models) cells.push_back(stats.at(m).components[c].pct());
        reports.components.cells.push_back(std::move(cells));
    }
    for (const auto& schema : schema_order) {
        std::vector<std::optional<double>> cells;
        bool any = false;
        for (const auto& m : reports.per_schema.models) {
            const auto& tallies = stats.at(m).schemas;
            auto t = tallies.find(schema);
            cells.push_back(t == tallies.end() ? std::nullopt : t->second.pct());
            any = any || t != tallies.end();
        }
        if (!any) continue;
        reports.per_schema.row_labels.push_back(schema);
        reports.per_schema.cells.push_back(std::move(cells));
    }
    return reports;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

namespace {

std::string cell(const std::optional<double>& v, int decimals) {
    return v ? format_fixed(*v, decimals) : "n/a";
}

TextTable breakdown_table(const std::string& title, const std::string& first, const Breakdown& b) {
    TextTable t;
    t.title = title;
    t.header.push_back(first);
    for (const auto& m : b.models) t.header.push_back(m);
    for (std::size_t r = 0; r < b.row_labels.size(); ++r) {
        std::vector<std::string> row{b.row_labels[r]};
        for (const auto& v : b.cells[r]) row.push_back(cell(v, 2));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace

TextTable leaderboard_table(const Reports& reports) {
    TextTable t;
    t.title = "Leaderboard";
    t.header = {"Rank",       "Model",       "Exact Match (%)", "Simple (%)",  "Moderate (%)", "Complex (%)",
                "AST Score",  "Routing (%)", "No Tool (%)",     "Calls/Query", "Records"};
    std::size_t rank = 0;
    for (const auto& r : reports.leaderboard) {
        t.rows.push_back({std::to_string(++rank), r.model, format_fixed(r.exact_match_pct, 1), cell(r.simple_pct, 1),
                          cell(r.moderate_pct, 1), cell(r.complex_pct, 1), format_fixed(r.ast_mean, 3),
                          format_fixed(r.routing_pct, 1), format_fixed(r.no_tool_pct, 2),
                          format_fixed(r.mean_calls, 2), std::to_string(r.records)});
    }
    return t;
}

TextTable component_table(const Reports& reports) {
    return breakdown_table("Exact Match (%) by query component", "Component", reports.components);
}

TextTable per_schema_table(const Reports& reports) {
    return breakdown_table("Exact Match (%) by schema", "Schema", reports.per_schema);
}

TextTable no_tool_table(const Reports& reports) {
    TextTable t;
    t.title = "No tool selected";
    t.header = {"Model", "No Tool", "Records", "No Tool (%)", "Malformed", "Multi-slot"};
    for (const auto& r : reports.no_tool)
        t.rows.push_back({r.model, std::to_string(r.no_tool), std::to_string(r.records), format_fixed(r.no_tool_pct(), 2),
                          std::to_string(r.malformed), std::to_string(r.multi_slot)});
    return t;
}

TextTable preference_table(const Reports& reports) {
    TextTable t;
    t.title = "Preference ranking";
    t.header = {"Model", "Weighted Score", "First Places", "First Place (%)", "Judged Queries"};
    std::vector<PreferenceScore> rows = reports.preference;
    std::stable_sort(rows.begin(), rows.end(), [](const PreferenceScore& a, const PreferenceScore& b) {
        return a.weighted_score > b.weighted_score;
    });
    for (const auto& p : rows)
        t.rows.push_back({p.model, std::to_string(p.weighted_score), std::to_string(p.first_places),
                          format_fixed(p.first_place_pct(), 2), std::to_string(p.queries)});
    return t;
}

TextTable rankings_table(const Reports& reports) {
    TextTable t;
    t.title = "Model order by metric";
    const bool with_pref = !reports.preference.empty();
    t.header = {"Model", "EM Rank", "AST Rank"};
    if (with_pref) t.header.push_back("Preference Rank");

    auto position = [](std::vector<std::pair<double, std::string>> keyed, const std::string& model) {
        std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t i = 0; i < keyed.size(); ++i)
            if (keyed[i].second == model) return std::to_string(i + 1);
        return std::string("n/a");
    };
    std::vector<std::pair<double, std::string>> em, ast, pref;
    for (const auto& r : reports.leaderboard) {
        em.emplace_back(r.exact_match_pct, r.model);
        ast.emplace_back(r.ast_mean, r.model);
    }
    for (const auto& p : reports.preference) pref.emplace_back(double(p.weighted_score), p.model);
    for (const auto& r : reports.leaderboard) {
        std::vector<std::string> row{r.model, position(em, r.model), position(ast, r.model)};
        if (with_pref) row.push_back(position(pref, r.model));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string render_markdown(const TextTable& t) {
    std::ostringstream out;
    if (!t.title.empty()) out << "### " << t.title << "\n\n";
    auto line = [&](const std::vector<std::string>& cells) {
        out << '|';
        for (const auto& c : cells) out << ' ' << c << " |";
        out << '\n';
    };
    line(t.header);
    out << '|';
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
    out << '\n';
    for (const auto& r : t.rows) line(r);
    return out.str();
}

std::string render_csv(const TextTable& t) {
    auto field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << field(cells[i]);
        out << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out.str();
}

namespace {

std::string html_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void html_table(std::ostringstream& out, const TextTable& t) {
    out << "<h2>" << html_escape(t.title) << "</h2>\n<table>\n<tr>";
    for (const auto& h : t.header) out << "<th>" << html_escape(h) << "</th>";
    out << "</tr>\n";
    for (const auto& r : t.rows) {
        out << "<tr>";
        for (const auto& c : r) out << "<td>" << html_escape(c) << "</td>";
        out << "</tr>\n";
    }
    out << "</table>\n";
}

}  // namespace

std::string render_html(const Reports& reports, const std::vector<EvalOutcome>& outcomes,
                        const std::vector<DatasetRecord>& dataset) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>dbgorilla report</title>\n"
           "<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse;margin-bottom:1.5em}"
           "td,th{border:1px solid #bbb;padding:3px 8px;text-align:right}td:first-child,th:first-child{text-align:left}"
           "pre{background:#f4f4f4;padding:6px;white-space:pre-wrap}.miss{color:#a00}.hit{color:#070}</style>\n"
           "</head><body>\n<h1>dbgorilla report</h1>\n";
    html_table(out, leaderboard_table(reports));
    html_table(out, component_table(reports));
    html_table(out, per_schema_table(reports));
    html_table(out, no_tool_table(reports));
    if (!reports.preference.empty()) html_table(out, preference_table(reports));
    html_table(out, rankings_table(reports));

    std::map<std::string, std::vector<const EvalOutcome*>> by_record;
    for (const auto& o : outcomes) by_record[o.record_id].push_back(&o);
    out << "<h2>Records</h2>\n";
    for (const auto& r : dataset) {
        auto it = by_record.find(r.record_id);
        if (it == by_record.end()) continue;
        auto list = it->second;
        std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->model < b->model; });
        out << "<section id=\"rec-" << html_escape(r.record_id) << "\">\n<h3><a href=\"#rec-"
            << html_escape(r.record_id) << "\">" << html_escape(r.record_id) << "</a> ("
            << to_string(r.combination) << ", " << to_string(complexity(r.combination)) << ")</h3>\n"
            << "<p>" << html_escape(r.nl_command) << "</p>\n<pre>" << html_escape(serialize(r.ground_truth_query))
            << "</pre>\n<table>\n<tr><th>Model</th><th>Outcome</th><th>EM</th><th>AST</th><th>Prediction</th></tr>\n";
        for (const auto* o : list) {
            out << "<tr><td>" << html_escape(o->model) << "</td><td>" << to_string(o->kind) << "</td><td class=\""
                << (o->exact_match ? "hit\">yes" : "miss\">no") << "</td><td>" << format_fixed(o->ast_score, 2)
                << "</td><td><code>" << (o->best_call ? html_escape(serialize(*o->best_call)) : "") << "</code></td></tr>\n";
        }
        out << "</table>\n</section>\n";
    }
    out << "</body></html>\n";
    return out.str();
}

std::string outcomes_csv(const std::vector<EvalOutcome>& outcomes_in) {
    std::vector<EvalOutcome> outcomes = outcomes_in;
    std::sort(outcomes.begin(), outcomes.end(), [](const EvalOutcome& a, const EvalOutcome& b) {
        return std::tie(a.model, a.record_id) < std::tie(b.model, b.record_id);
    });
    TextTable t;
    t.header = {"model",        "record_id",      "schema_ref",     "combination",         "complexity",
                "kind",         "exact_match",    "ast_score",      "routed_correctly",    "no_tool",
                "search_match", "filters_match",  "aggregations_match", "groupby_match", "calls",
                "multi_slot",   "best_call"};
    auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    for (const auto& o : outcomes)
        t.rows.push_back({o.model, o.record_id, o.schema_ref, to_string(o.combination),
                          std::string(to_string(o.complexity)), std::string(to_string(o.kind)), b(o.exact_match),
                          format_fixed(o.ast_score, 2), b(o.routed_correctly), b(o.no_tool), b(o.components.search),
                          b(o.components.filters), b(o.components.aggregations), b(o.components.groupby),
                          std::to_string(o.calls), b(o.multi_slot), o.best_call ? serialize(*o.best_call) : ""});
    return render_csv(t);
}

}  // namespace dbgorilla::eval
