#include "dbgorilla/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dbgorilla/error.hpp"

namespace dbgorilla {

using ojson = nlohmann::ordered_json;

std::string_view to_string(DataType type) {
    switch (type) {
        case DataType::Text:
            return "TEXT";
        case DataType::Number:
            return "NUMBER";
        case DataType::Boolean:
            return "BOOLEAN";
    }
    return "TEXT";
}

std::optional<DataType> parse_data_type(std::string_view name) {
    if (name == "TEXT") return DataType::Text;
    if (name == "NUMBER") return DataType::Number;
    if (name == "BOOLEAN") return DataType::Boolean;
    return std::nullopt;
}

const PropertySchema* CollectionSchema::find_property(std::string_view property) const {
    for (const auto& p : properties)
        if (p.name == property) return &p;
    return nullptr;
}

const PropertySchema& CollectionSchema::searchable_property() const {
    for (const auto& p : properties)
        if (p.searchable) return p;
    throw SchemaViolation(name, "no searchable property");
}

std::optional<std::size_t> CollectionSchema::index_of(std::string_view property) const {
    for (std::size_t i = 0; i < properties.size(); ++i)
        if (properties[i].name == property) return i;
    return std::nullopt;
}

const CollectionSchema* UseCase::find_collection(std::string_view collection) const {
    for (const auto& c : collections)
        if (c.name == collection) return &c;
    return nullptr;
}

std::optional<std::size_t> UseCase::index_of(std::string_view collection) const {
    for (std::size_t i = 0; i < collections.size(); ++i)
        if (collections[i].name == collection) return i;
    return std::nullopt;
}

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(s.front())) return false;
    return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c); });
}

void validate_collection(const CollectionSchema& c, const PropertyProfile& profile) {
    if (!is_identifier(c.name))
        throw SchemaViolation(c.name.empty() ? "<unnamed>" : c.name,
                              "collection name must be an identifier");
    std::set<std::string> seen;
    std::size_t text = 0, number = 0, boolean = 0, searchable = 0;
    for (const auto& p : c.properties) {
        if (!is_identifier(p.name))
            throw SchemaViolation(c.name + "." + p.name, "property name must be an identifier");
        if (!seen.insert(p.name).second)
            throw SchemaViolation(c.name + "." + p.name, "duplicate property name");
        switch (p.data_type) {
            case DataType::Text: ++text; break;
            case DataType::Number: ++number; break;
            case DataType::Boolean: ++boolean; break;
        }
        if (p.searchable) {
            ++searchable;
            if (p.data_type != DataType::Text)
                throw SchemaViolation(c.name + "." + p.name, "searchable property must be TEXT");
        }
    }
    if (text != profile.text || number != profile.number || boolean != profile.boolean) {
        std::ostringstream msg;
        msg << "expected " << profile.text << " TEXT / " << profile.number << " NUMBER / "
            << profile.boolean << " BOOLEAN properties, found " << text << " / " << number
            << " / " << boolean;
        throw SchemaViolation(c.name, msg.str());
    }
    if (searchable != 1)
        throw SchemaViolation(c.name, "exactly one searchable property required, found " +
                                          std::to_string(searchable));
}

const ojson& require(const ojson& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError(where + ": missing key '" + key + "'");
    return *it;
}

std::string require_string(const ojson& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string()) throw ParseError(where + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

void validate_use_case(const UseCase& use_case, const PropertyProfile& profile) {
    if (use_case.collections.size() != profile.collections)
        throw SchemaViolation(use_case.name.empty() ? "<use case>" : use_case.name,
                              "expected " + std::to_string(profile.collections) +
                                  " collections, found " +
                                  std::to_string(use_case.collections.size()));
    std::set<std::string> names;
    for (const auto& c : use_case.collections) {
        validate_collection(c, profile);
        if (!names.insert(c.name).second)
            throw SchemaViolation(c.name, "duplicate collection name");
    }
}

UseCase use_case_from_json(const ojson& doc, std::string name, const PropertyProfile& profile) {
    if (!doc.is_object()) throw ParseError("use case document must be an object");
    UseCase uc;
    uc.name = std::move(name);
    uc.use_case_overview = require_string(doc, "use_case_overview", "use case");
    const auto& cols = require(doc, "collections", "use case");
    if (!cols.is_array()) throw ParseError("use case: 'collections' must be an array");
    for (const auto& c : cols) {
        if (!c.is_object()) throw ParseError("collection entries must be objects");
        CollectionSchema cs;
        cs.name = require_string(c, "name", "collection");
        const auto& props = require(c, "properties", cs.name);
        if (!props.is_array()) throw ParseError(cs.name + ": 'properties' must be an array");
        for (const auto& p : props) {
            if (!p.is_object()) throw ParseError(cs.name + ": property entries must be objects");
            PropertySchema ps;
            ps.name = require_string(p, "name", cs.name);
            const std::string where = cs.name + "." + ps.name;
            auto type = parse_data_type(require_string(p, "data_type", where));
            if (!type) throw ParseError(where + ": data_type must be TEXT, NUMBER or BOOLEAN");
            ps.data_type = *type;
            ps.description = require_string(p, "description", where);
            const auto& s = require(p, "searchable", where);
            if (!s.is_boolean()) throw ParseError(where + ": 'searchable' must be a boolean");
            ps.searchable = s.get<bool>();
            cs.properties.push_back(std::move(ps));
        }
        uc.collections.push_back(std::move(cs));
    }
    validate_use_case(uc, profile);
    return uc;
}

UseCase load_use_case(std::string_view document, std::string name, const PropertyProfile& profile) {
    ojson doc;
    try {
        doc = ojson::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("use case document: ") + e.what());
    }
    return use_case_from_json(doc, std::move(name), profile);
}

ojson to_json(const UseCase& use_case) {
    ojson cols = ojson::array();
    for (const auto& c : use_case.collections) {
        ojson props = ojson::array();
        for (const auto& p : c.properties) {
            props.push_back({{"name", p.name},
                             {"data_type", std::string(to_string(p.data_type))},
                             {"description", p.description},
                             {"searchable", p.searchable}});
        }
        cols.push_back({{"name", c.name}, {"properties", std::move(props)}});
    }
    return {{"use_case_overview", use_case.use_case_overview}, {"collections", std::move(cols)}};
}

std::string serialize(const UseCase& use_case) { return to_json(use_case).dump(2) + "\n"; }

UseCase load_use_case_file(const std::string& path, const PropertyProfile& profile) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open use case file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string stem = path;
    if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.rfind(".json"); dot != std::string::npos) stem = stem.substr(0, dot);
    return load_use_case(buf.str(), stem, profile);
}

void write_use_case_file(const UseCase& use_case, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << serialize(use_case);
}

std::vector<std::string> collection_names(const UseCase& use_case) {
    std::vector<std::string> names;
    names.reserve(use_case.collections.size());
    for (const auto& c : use_case.collections) names.push_back(c.name);
    return names;
}

std::size_t CharQuarterEstimator::estimate(std::string_view text) const {
    return (text.size() + 3) / 4;
}

const TokenEstimator& default_estimator() {
    static const CharQuarterEstimator estimator;
    return estimator;
}

namespace {

std::string render(std::string_view overview, std::span<const CollectionSchema> collections,
                   bool with_descriptions) {
    std::ostringstream out;
    if (!overview.empty()) out << overview << "\n\n";
    bool first = true;
    for (const auto& c : collections) {
        if (!first) out << "\n";
        first = false;
        out << "Collection: " << c.name << "\n";
        for (const auto& p : c.properties) {
            out << "  - " << p.name << " (" << to_string(p.data_type);
            if (p.searchable) out << ", searchable";
            out << ")";
            if (with_descriptions && !p.description.empty()) out << ": " << p.description;
            out << "\n";
        }
    }
    return out.str();
}

std::string fit(std::string_view overview, std::span<const CollectionSchema> collections,
                std::size_t budget, const TokenEstimator& estimator) {
    if (budget < kMinDescriptionBudget) throw BudgetExceeded(kMinDescriptionBudget, budget);
    std::string text = render(overview, collections, true);
    if (estimator.estimate(text) <= budget) return text;
    text = render(overview, collections, false);
    if (estimator.estimate(text) <= budget) return text;
    text = render({}, collections, false);
    const std::size_t estimated = estimator.estimate(text);
    if (estimated <= budget) return text;
    throw BudgetExceeded(estimated, budget);
}

}  // namespace

std::string render_description(const UseCase& use_case, std::size_t token_budget,
                               const TokenEstimator& estimator) {
    return fit(use_case.use_case_overview, use_case.collections, token_budget, estimator);
}

std::string render_collections(std::span<const CollectionSchema> collections,
                               std::size_t token_budget, const TokenEstimator& estimator) {
    return fit({}, collections, token_budget, estimator);
}

}  // namespace dbgorilla
