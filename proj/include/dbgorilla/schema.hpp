#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dbgorilla {

enum class DataType { Text, Number, Boolean };

std::string_view to_string(DataType type);
std::optional<DataType> parse_data_type(std::string_view name);

struct PropertySchema {
    std::string name;
    DataType data_type = DataType::Text;
    std::string description;
    bool searchable = false;

    bool operator==(const PropertySchema&) const = default;
};

struct CollectionSchema {
    std::string name;
    std::vector<PropertySchema> properties;

    const PropertySchema* find_property(std::string_view property) const;
    // The single rich-content text property; every validated collection has one.
    const PropertySchema& searchable_property() const;
    std::optional<std::size_t> index_of(std::string_view property) const;

    bool operator==(const CollectionSchema&) const = default;
};

// Property counts per collection and collections per use case. Data, not
// code: the default reproduces the 2 TEXT / 1 NUMBER / 1 BOOLEAN layout.
struct PropertyProfile {
    std::size_t collections = 3;
    std::size_t text = 2;
    std::size_t number = 1;
    std::size_t boolean = 1;

    std::size_t properties_per_collection() const { return text + number + boolean; }

    bool operator==(const PropertyProfile&) const = default;
};

struct UseCase {
    // Registry key (file stem); not part of the serialized document.
    std::string name;
    std::string use_case_overview;
    std::vector<CollectionSchema> collections;

    const CollectionSchema* find_collection(std::string_view collection) const;
    std::optional<std::size_t> index_of(std::string_view collection) const;

    // Equality covers the serialized content only.
    bool operator==(const UseCase& other) const {
        return use_case_overview == other.use_case_overview &&
               collections == other.collections;
    }
};

// Throws SchemaViolation naming the offending collection or property.
void validate_use_case(const UseCase& use_case, const PropertyProfile& profile = {});

UseCase load_use_case(std::string_view document, std::string name = {},
                      const PropertyProfile& profile = {});
UseCase use_case_from_json(const nlohmann::ordered_json& doc, std::string name = {},
                           const PropertyProfile& profile = {});
nlohmann::ordered_json to_json(const UseCase& use_case);
std::string serialize(const UseCase& use_case);

UseCase load_use_case_file(const std::string& path, const PropertyProfile& profile = {});
void write_use_case_file(const UseCase& use_case, const std::string& path);

std::vector<std::string> collection_names(const UseCase& use_case);

class TokenEstimator {
public:
    virtual ~TokenEstimator() = default;
    virtual std::size_t estimate(std::string_view text) const = 0;
};

// ceil(characters / 4).
class CharQuarterEstimator final : public TokenEstimator {
public:
    std::size_t estimate(std::string_view text) const override;
};

const TokenEstimator& default_estimator();

inline constexpr std::size_t kMinDescriptionBudget = 64;
inline constexpr std::size_t kDefaultToolBudget = 1024;

// Human-readable listing of the collections. Over budget, property
// descriptions are dropped first, then the overview; names and types are
// always kept. Throws BudgetExceeded when even that does not fit.
std::string render_description(const UseCase& use_case, std::size_t token_budget,
                               const TokenEstimator& estimator = default_estimator());

// Same rendering restricted to a subset of collections, without overview.
std::string render_collections(std::span<const CollectionSchema> collections,
                               std::size_t token_budget,
                               const TokenEstimator& estimator = default_estimator());

}  // namespace dbgorilla
