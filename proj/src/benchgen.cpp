#include "dbgorilla/benchgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "dbgorilla/engine.hpp"
#include "dbgorilla/error.hpp"
#include "dbgorilla/io.hpp"
#include "dbgorilla/parallel.hpp"
#include "dbgorilla/rng.hpp"

namespace dbgorilla::bench {

using ojson = nlohmann::ordered_json;

const std::vector<CombinationId>& enumerate_combinations() {
    static const std::vector<CombinationId> combos = [] {
        const OperandKind kinds[] = {OperandKind::None, OperandKind::Int, OperandKind::Text, OperandKind::Bool};
        std::vector<CombinationId> out;
        for (bool search : {false, true})
            for (auto filter : kinds)
                for (auto agg : kinds)
                    for (bool groupby : {false, true}) {
                        CombinationId id{search, filter, agg, groupby};
                        if (!id.empty()) out.push_back(id);
                    }
        std::sort(out.begin(), out.end());
        return out;
    }();
    return combos;
}

std::size_t combination_index(const CombinationId& id) {
    if (id.empty()) throw DegenerateQuery();
    const auto& all = enumerate_combinations();
    return static_cast<std::size_t>(std::lower_bound(all.begin(), all.end(), id) - all.begin());
}

std::string humanize(std::string_view id) {
    std::string out;
    for (std::size_t i = 0; i < id.size(); ++i) {
        const auto c = static_cast<unsigned char>(id[i]);
        if (c == '_' || c == '-') {
            if (!out.empty() && out.back() != ' ') out += ' ';
            continue;
        }
        if (std::isupper(c) && i > 0) {
            const auto prev = static_cast<unsigned char>(id[i - 1]);
            const bool next_lower = i + 1 < id.size() && std::islower(static_cast<unsigned char>(id[i + 1]));
            if (std::islower(prev) || std::isdigit(prev) || (std::isupper(prev) && next_lower))
                if (!out.empty() && out.back() != ' ') out += ' ';
        }
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

namespace {

struct Roles {
    const PropertySchema* search = nullptr;  // searchable TEXT
    const PropertySchema* text = nullptr;    // other TEXT
    const PropertySchema* number = nullptr;
    const PropertySchema* boolean = nullptr;
};

Roles roles_of(const CollectionSchema& c) {
    Roles r;
    for (const auto& p : c.properties) {
        if (p.searchable) {
            r.search = &p;
        } else if (p.data_type == DataType::Text && !r.text) {
            r.text = &p;
        } else if (p.data_type == DataType::Number && !r.number) {
            r.number = &p;
        } else if (p.data_type == DataType::Boolean && !r.boolean) {
            r.boolean = &p;
        }
    }
    // Profiles with a single TEXT property fall back to the searchable one.
    if (!r.text) r.text = r.search;
    return r;
}

const PropertySchema& need(const PropertySchema* p, const CollectionSchema& c, const char* kind) {
    if (!p) throw SchemaViolation(c.name, std::string("no ") + kind + " property for this combination");
    return *p;
}

double grid_value(Rng& rng, const PropertyValues& v) {
    const auto steps = static_cast<std::uint64_t>(std::floor((v.max - v.min) / v.step + 1e-9));
    const std::uint64_t lo = steps / 4;
    const std::uint64_t hi = steps - steps / 4;
    const std::uint64_t k = lo + rng.below(hi - lo + 1);
    return std::round((v.min + double(k) * v.step) * 1e6) / 1e6;
}

std::vector<std::string> words_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

std::string like_pattern(Rng& rng, const std::string& sample) {
    const auto words = words_of(sample);
    if (words.empty()) return "%";
    if (words.size() > 1 && rng.coin()) {
        auto longest = *std::max_element(words.begin(), words.end(),
                                         [](const auto& a, const auto& b) { return a.size() < b.size(); });
        return "%" + longest + "%";
    }
    const std::string& first = words.front();
    return (words.size() > 1 ? first : first.substr(0, std::min<std::size_t>(3, first.size()))) + "%";
}

template <typename E>
E pick_enum(Rng& rng, std::size_t count) {
    return static_cast<E>(rng.below(count));
}

}  // namespace

QueryRequest instantiate_ground_truth(const CombinationId& combo, const UseCase& use_case, std::uint64_t seed,
                                      const ValueCatalog* catalog_in) {
    const std::size_t index = combination_index(combo);
    if (use_case.collections.empty()) throw SchemaViolation(use_case.name, "use case has no collections");
    const ValueCatalog& catalog = catalog_in ? *catalog_in : catalog_for(use_case);
    const CollectionSchema& c = use_case.collections[(index + seed) % use_case.collections.size()];
    const Roles roles = roles_of(c);
    Rng rng(mix_seed(seed, use_case.name, index));

    QueryRequest q;
    q.collection_name = c.name;

    if (combo.search) {
        auto topics = catalog.search_topics(c.name);
        if (topics.empty()) {
            const auto samples = catalog.lookup(c.name, need(roles.search, c, "searchable")).samples;
            const auto words = words_of(samples.empty() ? std::string("results") : samples.front());
            topics.push_back(words.size() > 1 ? words[0] + " " + words[1] : words.front());
        }
        q.search_query = rng.pick(topics);
    }

    const PropertySchema* filtered = nullptr;
    switch (combo.filter) {
        case OperandKind::None: break;
        case OperandKind::Int: {
            const auto& p = need(roles.number, c, "NUMBER");
            q.integer_property_filter = IntPropertyFilter{p.name, pick_enum<IntOperator>(rng, 5),
                                                          grid_value(rng, catalog.lookup(c.name, p))};
            filtered = &p;
            break;
        }
        case OperandKind::Text: {
            const auto& p = need(roles.text, c, "TEXT");
            const auto samples = catalog.lookup(c.name, p).samples;
            const std::string sample = samples.empty() ? std::string("Alpha") : rng.pick(samples);
            if (rng.coin()) q.text_property_filter = TextPropertyFilter{p.name, TextOperator::Eq, sample};
            else q.text_property_filter = TextPropertyFilter{p.name, TextOperator::Like, like_pattern(rng, sample)};
            filtered = &p;
            break;
        }
        case OperandKind::Bool: {
            const auto& p = need(roles.boolean, c, "BOOLEAN");
            const auto op = rng.coin() ? BoolOperator::Eq : BoolOperator::Ne;
            q.boolean_property_filter = BooleanPropertyFilter{p.name, op, rng.coin()};
            filtered = &p;
            break;
        }
    }

    const PropertySchema* aggregated = nullptr;
    switch (combo.aggregation) {
        case OperandKind::None: break;
        case OperandKind::Int: {
            const auto& p = need(roles.number, c, "NUMBER");
            q.integer_property_aggregation = IntAggregation{p.name, pick_enum<IntMetric>(rng, 8)};
            aggregated = &p;
            break;
        }
        case OperandKind::Text: {
            const auto& p = need(roles.text, c, "TEXT");
            TextAggregation a{p.name, pick_enum<TextMetric>(rng, 3), std::nullopt};
            if (a.metric == TextMetric::TopOccurrences) {
                static const std::int64_t limits[] = {3, 5, 10};
                a.top_occurrences_limit = limits[rng.below(3)];
            }
            q.text_property_aggregation = a;
            aggregated = &p;
            break;
        }
        case OperandKind::Bool: {
            const auto& p = need(roles.boolean, c, "BOOLEAN");
            q.boolean_property_aggregation = BooleanAggregation{p.name, pick_enum<BoolMetric>(rng, 6)};
            aggregated = &p;
            break;
        }
    }

    if (combo.groupby) {
        // Prefer a non-searchable property that is neither aggregated nor filtered.
        std::vector<const PropertySchema*> candidates;
        for (const auto* p : {roles.text, roles.boolean})
            if (p && !p->searchable && p != aggregated && p != filtered) candidates.push_back(p);
        if (candidates.empty())
            for (const auto* p : {roles.text, roles.boolean, roles.number})
                if (p && !p->searchable && p != aggregated) candidates.push_back(p);
        if (candidates.empty()) throw SchemaViolation(c.name, "no property left to group by");
        q.groupby_property = rng.pick(candidates)->name;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string bool_word(bool v) { return v ? "true" : "false"; }

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

std::string like_core(const std::string& pattern) {
    std::string out;
    for (char c : pattern)
        if (c != '%' && c != '_') out += c;
    return out;
}

std::string describe_like(const std::string& prop, const std::string& pattern) {
    const bool lead = !pattern.empty() && pattern.front() == '%';
    const bool trail = !pattern.empty() && pattern.back() == '%';
    const std::string core = like_core(pattern);
    const bool simple = pattern.find('_') == std::string::npos &&
                        std::count(pattern.begin(), pattern.end(), '%') == int(lead) + int(trail) &&
                        !core.empty();
    if (simple && !lead && trail) return "whose " + prop + " starts with " + quoted(core);
    if (simple && lead && trail) return "whose " + prop + " contains " + quoted(core);
    if (simple && lead && !trail) return "whose " + prop + " ends with " + quoted(core);
    return "whose " + prop + " matches the pattern " + quoted(pattern);
}

std::string int_op_phrase(IntOperator op) {
    switch (op) {
        case IntOperator::Eq: return "equal to";
        case IntOperator::Lt: return "less than";
        case IntOperator::Gt: return "greater than";
        case IntOperator::Le: return "at most";
        case IntOperator::Ge: return "at least";
    }
    return "";
}

struct Opener {
    std::string text;
    bool question = true;
};

Opener opener(const QueryRequest& q, const std::string& noun, Rng& rng) {
    if (const auto& a = q.integer_property_aggregation) {
        const std::string p = humanize(a->property_name);
        switch (a->metric) {
            case IntMetric::Count: return {"How many " + noun + " have a " + p + " value"};
            case IntMetric::Type: return {"What is the data type of the " + p + " property for " + noun};
            case IntMetric::Min: return {"What is the lowest " + p + " among " + noun};
            case IntMetric::Max: return {"What is the highest " + p + " among " + noun};
            case IntMetric::Mean: return {"What is the average " + p + " of " + noun};
            case IntMetric::Median: return {"What is the median " + p + " of " + noun};
            case IntMetric::Mode: return {"What is the most common " + p + " among " + noun};
            case IntMetric::Sum: return {"What is the total " + p + " across " + noun};
        }
    }
    if (const auto& a = q.text_property_aggregation) {
        const std::string p = humanize(a->property_name);
        switch (a->metric) {
            case TextMetric::Count: return {"How many " + p + " entries exist for " + noun};
            case TextMetric::Type: return {"What is the data type of the " + p + " property for " + noun};
            case TextMetric::TopOccurrences:
                if (a->top_occurrences_limit)
                    return {"What are the top " + std::to_string(*a->top_occurrences_limit) + " most frequent " + p +
                            " values among " + noun};
                return {"What are the most frequent " + p + " values among " + noun};
        }
    }
    if (const auto& a = q.boolean_property_aggregation) {
        const std::string p = humanize(a->property_name);
        switch (a->metric) {
            case BoolMetric::Count: return {"How many " + noun + " have a " + p + " value recorded"};
            case BoolMetric::Type: return {"What is the data type of the " + p + " property for " + noun};
            case BoolMetric::TotalTrue: return {"How many " + noun + " have " + p + " set to true"};
            case BoolMetric::TotalFalse: return {"How many " + noun + " have " + p + " set to false"};
            case BoolMetric::PercentageTrue: return {"What percentage of " + noun + " have " + p + " set to true"};
            case BoolMetric::PercentageFalse: return {"What percentage of " + noun + " have " + p + " set to false"};
        }
    }
    static const char* verbs[] = {"Find", "Show me", "List"};
    return {std::string(verbs[rng.below(3)]) + " " + noun, false};
}

}  // namespace

std::string TemplateCommandGenerator::generate(const CommandRequest& req) {
    const QueryRequest& q = req.ground_truth;
    Rng rng(mix_seed(req.seed, to_string(req.combination)));
    const std::string noun = humanize(q.collection_name);
    Opener head = opener(q, noun, rng);

    std::vector<std::string> conditions;
    if (q.search_query) {
        static const char* forms[] = {"related to ", "matching the search ", "about "};
        conditions.push_back(forms[rng.below(3)] + quoted(*q.search_query));
    }
    if (const auto& f = q.integer_property_filter)
        conditions.push_back("with " + humanize(f->property_name) + " " + int_op_phrase(f->op) + " " +
                             engine::sql_number(f->value));
    if (const auto& f = q.text_property_filter)
        conditions.push_back(f->op == TextOperator::Eq
                                 ? "whose " + humanize(f->property_name) + " is exactly " + quoted(f->value)
                                 : describe_like(humanize(f->property_name), f->value));
    if (const auto& f = q.boolean_property_filter)
        conditions.push_back("where " + humanize(f->property_name) + (f->op == BoolOperator::Eq ? " is " : " is not ") +
                             bool_word(f->value));

    std::string out = head.text;
    for (std::size_t i = 0; i < conditions.size(); ++i) out += (i == 0 ? " " : " and ") + conditions[i];
    if (q.groupby_property) out += ", grouped by " + humanize(*q.groupby_property);
    out += head.question ? "?" : ".";
    return out;
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> operator_list(const QueryRequest& q) {
    std::vector<std::string> ops;
    if (q.search_query) ops.push_back("a semantic search for " + quoted(*q.search_query));
    if (const auto& f = q.integer_property_filter)
        ops.push_back("a numeric filter " + f->property_name + " " + std::string(to_string(f->op)) + " " +
                      engine::sql_number(f->value));
    if (const auto& f = q.text_property_filter)
        ops.push_back("a text filter " + f->property_name + " " + std::string(to_string(f->op)) + " " + quoted(f->value));
    if (const auto& f = q.boolean_property_filter)
        ops.push_back("a boolean filter " + f->property_name + " " + std::string(to_string(f->op)) + " " +
                      bool_word(f->value));
    if (const auto& a = q.integer_property_aggregation)
        ops.push_back("the " + std::string(to_string(a->metric)) + " of " + a->property_name);
    if (const auto& a = q.text_property_aggregation)
        ops.push_back("the " + std::string(to_string(a->metric)) + " of " + a->property_name +
                      (a->top_occurrences_limit ? " (limit " + std::to_string(*a->top_occurrences_limit) + ")" : ""));
    if (const auto& a = q.boolean_property_aggregation)
        ops.push_back("the " + std::string(to_string(a->metric)) + " of " + a->property_name);
    if (q.groupby_property) ops.push_back("grouping by " + *q.groupby_property);
    return ops;
}

}  // namespace

std::string LlmCommandGenerator::prompt_for(const CommandRequest& req) {
    std::ostringstream p;
    p << "Here is a database schema:\n\n"
      << render_description(*req.use_case, kDefaultToolBudget * 4) << "\n\n"
      << "Write one natural language question or request that a user of this application might ask, "
         "which can only be answered by running exactly this query against the "
      << req.ground_truth.collection_name << " collection:\n"
      << serialize(req.ground_truth) << "\n\n"
      << "The request must clearly require each of these operations:\n";
    for (const auto& op : operator_list(req.ground_truth)) p << "- " << op << "\n";
    p << "\nDo not mention property names verbatim unless natural, do not mention the query format. "
         "Reply with the request only.";
    return p.str();
}

std::string LlmCommandGenerator::generate(const CommandRequest& req) {
    const std::string system = "You write realistic user requests for a database question answering benchmark.";
    const std::string prompt = prompt_for(req);
    std::string last;
    for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
        std::string text = trim(llm_.generate(system, prompt));
        if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = trim(text.substr(1, text.size() - 2));
        if (!text.empty() && text.find('\n') == std::string::npos) return text;
        last = text.empty() ? "empty reply" : "multi-line reply";
    }
    throw GeneratorFailure("command generation failed after " + std::to_string(max_attempts_) + " attempts (" + last +
                           ")");
}

// ---------------------------------------------------------------------------
// Reflexion

namespace {

bool any_cue(const std::string& text, std::initializer_list<const char*> cues) {
    for (const char* c : cues)
        if (contains(text, c)) return true;
    return false;
}

bool metric_cue(const std::string& text, IntMetric m) {
    switch (m) {
        case IntMetric::Count: return any_cue(text, {"how many", "number of", "count"});
        case IntMetric::Type: return any_cue(text, {"data type", "type of"});
        case IntMetric::Min: return any_cue(text, {"lowest", "minimum", "smallest", "cheapest"});
        case IntMetric::Max: return any_cue(text, {"highest", "maximum", "largest", "most expensive"});
        case IntMetric::Mean: return any_cue(text, {"average", "mean"});
        case IntMetric::Median: return any_cue(text, {"median"});
        case IntMetric::Mode: return any_cue(text, {"most common", "mode", "most frequent"});
        case IntMetric::Sum: return any_cue(text, {"total", "sum"});
    }
    return false;
}

bool metric_cue(const std::string& text, TextMetric m) {
    switch (m) {
        case TextMetric::Count: return any_cue(text, {"how many", "number of", "count"});
        case TextMetric::Type: return any_cue(text, {"data type", "type of"});
        case TextMetric::TopOccurrences: return any_cue(text, {"most frequent", "most common", "top", "most mentioned"});
    }
    return false;
}

bool metric_cue(const std::string& text, BoolMetric m) {
    switch (m) {
        case BoolMetric::Count: return any_cue(text, {"how many", "number of", "count"});
        case BoolMetric::Type: return any_cue(text, {"data type", "type of"});
        case BoolMetric::TotalTrue:
        case BoolMetric::TotalFalse: return any_cue(text, {"how many", "number of", "count", "total"});
        case BoolMetric::PercentageTrue:
        case BoolMetric::PercentageFalse: return any_cue(text, {"percentage", "percent", "share", "proportion"});
    }
    return false;
}

}  // namespace

GenerationVerdict KeywordJudge::check(const DatasetRecord& record, const UseCase&) {
    const QueryRequest& q = record.ground_truth_query;
    const std::string& cmd = record.nl_command;
    std::vector<std::string> missing;
    if (q.search_query && !contains(cmd, *q.search_query)) missing.push_back("search query");
    if (const auto& f = q.integer_property_filter)
        if (!contains(cmd, humanize(f->property_name)) || !contains(cmd, engine::sql_number(f->value)))
            missing.push_back("integer filter");
    if (const auto& f = q.text_property_filter)
        if (!contains(cmd, humanize(f->property_name)) || !contains(cmd, f->op == TextOperator::Eq ? f->value : like_core(f->value)))
            missing.push_back("text filter");
    if (const auto& f = q.boolean_property_filter)
        if (!contains(cmd, humanize(f->property_name))) missing.push_back("boolean filter");
    if (const auto& a = q.integer_property_aggregation)
        if (!contains(cmd, humanize(a->property_name)) || !metric_cue(cmd, a->metric))
            missing.push_back("integer aggregation (" + std::string(to_string(a->metric)) + ")");
    if (const auto& a = q.text_property_aggregation)
        if (!contains(cmd, humanize(a->property_name)) || !metric_cue(cmd, a->metric))
            missing.push_back("text aggregation (" + std::string(to_string(a->metric)) + ")");
    if (const auto& a = q.boolean_property_aggregation)
        if (!contains(cmd, humanize(a->property_name)) || !metric_cue(cmd, a->metric))
            missing.push_back("boolean aggregation (" + std::string(to_string(a->metric)) + ")");
    if (q.groupby_property)
        if (!contains(cmd, humanize(*q.groupby_property)) || !any_cue(cmd, {"group", "for each", "per ", "broken down"}))
            missing.push_back("groupby");

    GenerationVerdict v;
    v.approved = missing.empty();
    if (!v.approved) {
        v.critique = "command does not express: ";
        for (std::size_t i = 0; i < missing.size(); ++i) v.critique += (i ? ", " : "") + missing[i];
    }
    return v;
}

namespace {

ojson extract_json_object(const std::string& text) {
    const auto b = text.find('{');
    const auto e = text.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) throw ParseError("no JSON object in reply");
    try {
        return ojson::parse(text.substr(b, e - b + 1));
    } catch (const nlohmann::json::parse_error& err) {
        throw ParseError(std::string("reply is not valid JSON: ") + err.what());
    }
}

}  // namespace

std::string LlmJudge::prompt_for(const DatasetRecord& record, const UseCase& use_case) {
    std::ostringstream p;
    p << "Database schema:\n\n" << render_description(use_case, kDefaultToolBudget * 4) << "\n\n"
      << "Natural language command:\n" << record.nl_command << "\n\n"
      << "Reference query:\n" << serialize(record.ground_truth_query) << "\n\n"
      << "Does the command require every one of these operations, and nothing else?\n";
    for (const auto& op : operator_list(record.ground_truth_query)) p << "- " << op << "\n";
    p << "\nReply with a JSON object {\"approved\": boolean, \"critique\": string, \"corrected_command\": string or "
         "null}. When not approved, the critique must name what is missing or wrong, and corrected_command may "
         "propose a fixed command.";
    return p.str();
}

GenerationVerdict LlmJudge::check(const DatasetRecord& record, const UseCase& use_case) {
    const std::string system = "You audit benchmark questions for a database querying tool.";
    const std::string prompt = prompt_for(record, use_case);
    std::string last;
    for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
        try {
            const ojson doc = extract_json_object(llm_.generate(system, prompt));
            if (!doc.contains("approved") || !doc["approved"].is_boolean()) throw ParseError("missing 'approved'");
            GenerationVerdict v;
            v.approved = doc["approved"].get<bool>();
            if (doc.contains("critique") && doc["critique"].is_string()) v.critique = doc["critique"].get<std::string>();
            if (doc.contains("corrected_command") && doc["corrected_command"].is_string()) {
                std::string c = trim(doc["corrected_command"].get<std::string>());
                if (!c.empty()) v.corrected_command = c;
            }
            if (!v.approved && v.critique.empty()) throw ParseError("rejection without critique");
            if (v.approved) v.corrected_command.reset();
            return v;
        } catch (const ParseError& e) {
            last = e.what();
        }
    }
    throw GeneratorFailure("reflexion judge failed after " + std::to_string(max_attempts_) + " attempts: " + last);
}

GenerationVerdict reflexion_check(DatasetRecord& record, const UseCase& use_case, ReflexionJudge& judge) {
    GenerationVerdict v = judge.check(record, use_case);
    if (!v.approved && v.critique.empty()) v.critique = "rejected without explanation";
    if (!v.approved && v.corrected_command) record.nl_command = *v.corrected_command;
    return v;
}

// ---------------------------------------------------------------------------
// Use cases

namespace {

std::string snake(const std::string& hint) {
    std::string out;
    for (char ch : hint) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
        else if (!out.empty() && out.back() != '_') out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "domain_" + out;
    return out;
}

std::string camel(const std::string& snake_name) {
    std::string out;
    bool up = true;
    for (char c : snake_name) {
        if (c == '_') {
            up = true;
            continue;
        }
        out += up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
        up = false;
    }
    return out;
}

}  // namespace

UseCase placeholder_use_case(const PropertyProfile& profile, const std::string& hint) {
    if (profile.text == 0) throw SchemaViolation("profile", "a searchable TEXT property needs at least one TEXT slot");
    UseCase u;
    u.name = snake(hint.empty() ? "placeholder" : hint);
    const std::string base = camel(u.name);
    u.use_case_overview = "Placeholder " + humanize(base) + " application with " + std::to_string(profile.collections) +
                          " collections.";
    static const char* suffixes[] = {"Items", "Records", "Events"};
    for (std::size_t k = 0; k < profile.collections; ++k) {
        CollectionSchema c;
        c.name = base + (k < 3 ? std::string(suffixes[k]) : "Collection" + std::to_string(k + 1));
        const std::string noun = humanize(c.name);
        for (std::size_t t = 0; t < profile.text; ++t) {
            if (t == 1 || profile.text == 1)
                c.properties.push_back({"details", DataType::Text, "Free-text details about the " + noun + ".", true});
            else
                c.properties.push_back({t == 0 ? std::string("title") : "label" + std::to_string(t), DataType::Text,
                                        "A short label for the " + noun + ".", false});
        }
        for (std::size_t n = 0; n < profile.number; ++n)
            c.properties.push_back({n == 0 ? std::string("amount") : "amount" + std::to_string(n + 1), DataType::Number,
                                    "A numeric measure of the " + noun + ".", false});
        for (std::size_t b = 0; b < profile.boolean; ++b)
            c.properties.push_back({b == 0 ? std::string("active") : "active" + std::to_string(b + 1),
                                    DataType::Boolean, "Whether the " + noun + " is active.", false});
        u.collections.push_back(std::move(c));
    }
    validate_use_case(u, profile);
    return u;
}

UseCase generate_use_case(const PropertyProfile& profile, const std::string& hint, TextGenerator* generator,
                          int max_attempts) {
    if (!generator) {
        if (profile == PropertyProfile{})
            if (const auto* d = find_builtin_domain(hint)) return d->use_case;
        return placeholder_use_case(profile, hint);
    }
    const std::string name = snake(hint.empty() ? "generated" : hint);
    std::ostringstream p;
    p << "Create a synthetic database schema for this application domain: " << hint << ".\n"
      << "It must contain exactly " << profile.collections << " meaningfully related collections with names in "
      << "camel case. Every collection has exactly " << profile.text << " TEXT properties (exactly one of them "
      << "holds rich searchable content and is marked searchable), " << profile.number << " NUMBER properties and "
      << profile.boolean << " BOOLEAN properties.\n"
      << "Reply with JSON only, in this shape:\n"
      << R"({"use_case_overview": "...", "collections": [{"name": "...", "properties": [{"name": "...", )"
      << R"("data_type": "TEXT", "description": "...", "searchable": true}]}]})";
    const std::string base_prompt = p.str();
    const std::string system = "You design realistic database schemas.";

    std::string prompt = base_prompt;
    std::string last_error = "no attempts made";
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        const std::string reply = generator->generate(system, prompt);
        try {
            return use_case_from_json(extract_json_object(reply), name, profile);
        } catch (const SchemaViolation& e) {
            if (attempt == max_attempts) throw;
            last_error = e.what();
        } catch (const ParseError& e) {
            last_error = e.what();
        }
        prompt = base_prompt + "\n\nYour previous reply was rejected: " + last_error + "\nTry again.";
    }
    throw GeneratorFailure("schema generation failed after " + std::to_string(max_attempts) +
                           " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// Dataset assembly

GeneratedBenchmark generate_benchmark(const GenerateOptions& options) {
    if (options.variants == 0) throw Error("variants must be at least 1");
    std::vector<std::string> hints = options.domains;
    if (hints.empty()) {
        for (std::size_t i = 0; i < options.schemas; ++i)
            hints.push_back(i < builtin_domains().size() ? builtin_domains()[i].use_case.name
                                                         : "synthetic_" + std::to_string(i + 1));
    }

    GeneratedBenchmark out;
    for (const auto& hint : hints) {
        UseCase u = generate_use_case(options.profile, hint, options.schema_generator);
        for (const auto& existing : out.dataset.use_cases)
            if (existing.name == u.name) throw Error("duplicate use case name '" + u.name + "'");
        out.dataset.use_cases.push_back(std::move(u));
    }

    struct Slot {
        std::size_t use_case;
        DatasetRecord record;
        std::uint64_t seed;
    };
    std::vector<Slot> slots;
    for (std::size_t ui = 0; ui < out.dataset.use_cases.size(); ++ui) {
        const UseCase& u = out.dataset.use_cases[ui];
        const auto& combos = enumerate_combinations();
        for (std::size_t ci = 0; ci < combos.size(); ++ci) {
            const QueryRequest truth = instantiate_ground_truth(combos[ci], u, options.seed);
            for (std::size_t v = 0; v < options.variants; ++v) {
                char id[32];
                std::snprintf(id, sizeof id, "-%02zu", ci + 1);
                DatasetRecord r;
                r.record_id = u.name + id + (options.variants > 1 ? "-v" + std::to_string(v + 1) : "");
                r.ground_truth_query = truth;
                r.schema_ref = u.name;
                r.combination = combos[ci];
                slots.push_back({ui, std::move(r), mix_seed(options.seed, u.name + "/command", ci * 1000 + v)});
            }
        }
    }

    TemplateCommandGenerator template_generator;
    KeywordJudge keyword_judge;
    CommandGenerator& commands = options.commands ? *options.commands : template_generator;
    ReflexionJudge& judge = options.judge ? *options.judge : keyword_judge;

    out.verdicts.resize(slots.size());
    parallel_for(slots.size(), options.concurrency, [&](std::size_t i) {
        Slot& s = slots[i];
        const UseCase& u = out.dataset.use_cases[s.use_case];
        CommandRequest req{&u, s.record.ground_truth_query, s.record.combination, s.seed};
        s.record.nl_command = commands.generate(req);
        if (s.record.nl_command.empty()) throw GeneratorFailure(s.record.record_id + ": empty command");
        out.verdicts[i] = {s.record.record_id, reflexion_check(s.record, u, judge)};
    });

    for (auto& s : slots) {
        check_record(s.record, out.dataset.use_cases[s.use_case]);
        out.dataset.records.push_back(std::move(s.record));
    }
    return out;
}

void write_verdicts(const std::vector<VerdictEntry>& verdicts, std::ostream& out) {
    for (const auto& e : verdicts) {
        ojson doc;
        doc["record_id"] = e.record_id;
        doc["approved"] = e.verdict.approved;
        doc["critique"] = e.verdict.critique;
        if (e.verdict.corrected_command) doc["corrected_command"] = *e.verdict.corrected_command;
        out << doc.dump() << '\n';
    }
}

std::vector<VerdictEntry> read_verdicts(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    std::vector<VerdictEntry> out;
    for (const auto& line : split_lines(ss.str())) {
        ojson doc;
        try {
            doc = ojson::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("verdict log: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("record_id") || !doc.contains("approved") ||
            !doc["record_id"].is_string() || !doc["approved"].is_boolean())
            throw ParseError("verdict log: each line needs record_id and approved");
        VerdictEntry e;
        e.record_id = doc["record_id"].get<std::string>();
        e.verdict.approved = doc["approved"].get<bool>();
        if (doc.contains("critique") && doc["critique"].is_string()) e.verdict.critique = doc["critique"].get<std::string>();
        if (doc.contains("corrected_command") && doc["corrected_command"].is_string())
            e.verdict.corrected_command = doc["corrected_command"].get<std::string>();
        out.push_back(std::move(e));
    }
    return out;
}

void write_benchmark(const GeneratedBenchmark& benchmark, const std::string& dir) {
    write_dataset_dir(benchmark.dataset, dir);
    std::ostringstream out;
    write_verdicts(benchmark.verdicts, out);
    write_text_file(dir + "/verdicts.jsonl", out.str());
}

}  // namespace dbgorilla::bench
