#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dbgorilla/schema.hpp"

namespace dbgorilla {

// Plausible literal values for one property. Numbers are drawn on the grid
// min, min+step, ..., max; text comes from `samples`.
struct PropertyValues {
    double min = 0.0;
    double max = 100.0;
    double step = 1.0;
    std::vector<std::string> samples;
};

// Value ranges and vocabulary used by data seeding and ground-truth
// instantiation. Lookups fall back to generic defaults per data type.
class ValueCatalog {
public:
    void set(const std::string& collection, const std::string& property, PropertyValues values);
    void set_search_topics(const std::string& collection, std::vector<std::string> topics);

    PropertyValues lookup(const std::string& collection, const PropertySchema& property) const;
    // Short phrases that occur in the searchable property's samples.
    std::vector<std::string> search_topics(const std::string& collection) const;

private:
    std::map<std::string, PropertyValues> values_;
    std::map<std::string, std::vector<std::string>> topics_;
};

struct BuiltinDomain {
    UseCase use_case;
    ValueCatalog catalog;
};

// Five reference domains. The first is the restaurant system
// (Restaurants / Menus / Reservations).
const std::vector<BuiltinDomain>& builtin_domains();
const BuiltinDomain* find_builtin_domain(std::string_view hint);

// Catalog for any use case: the built-in one when the name matches, else defaults.
const ValueCatalog& catalog_for(const UseCase& use_case);

}  // namespace dbgorilla
