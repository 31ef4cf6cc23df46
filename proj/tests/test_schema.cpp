#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dbgorilla/benchgen.hpp"
#include "dbgorilla/catalog.hpp"
#include "dbgorilla/error.hpp"
#include "dbgorilla/schema.hpp"

using namespace dbgorilla;
using ojson = nlohmann::ordered_json;

namespace {

const UseCase& restaurants() { return find_builtin_domain("restaurants")->use_case; }

ojson restaurant_doc() { return to_json(restaurants()); }

}  // namespace

TEST(Schema, RestaurantDocumentLoads) {
    const UseCase uc = load_use_case(restaurant_doc().dump(), "restaurants");
    ASSERT_EQ(uc.collections.size(), 3u);
    EXPECT_EQ(collection_names(uc), (std::vector<std::string>{"Restaurants", "Menus", "Reservations"}));
    const auto* r = uc.find_collection("Restaurants");
    ASSERT_NE(r, nullptr);
    ASSERT_NE(r->find_property("averageRating"), nullptr);
    EXPECT_EQ(r->find_property("averageRating")->data_type, DataType::Number);
    for (const auto& c : uc.collections) {
        std::size_t text = 0, number = 0, boolean = 0;
        for (const auto& p : c.properties) {
            text += p.data_type == DataType::Text;
            number += p.data_type == DataType::Number;
            boolean += p.data_type == DataType::Boolean;
        }
        EXPECT_EQ(text, 2u);
        EXPECT_EQ(number, 1u);
        EXPECT_EQ(boolean, 1u);
        EXPECT_EQ(c.searchable_property().data_type, DataType::Text);
    }
}

TEST(Schema, TwoNumberPropertiesNamesTheCollection) {
    ojson doc = restaurant_doc();
    auto& menus = doc["collections"][1];
    ASSERT_EQ(menus["name"], "Menus");
    menus["properties"][0]["data_type"] = "NUMBER";  // menuItem becomes a second number
    try {
        load_use_case(doc.dump());
        FAIL() << "expected SchemaViolation";
    } catch (const SchemaViolation& e) {
        EXPECT_EQ(e.where(), "Menus");
    }
}

TEST(Schema, MissingSearchableProperty) {
    ojson doc = restaurant_doc();
    for (auto& p : doc["collections"][2]["properties"]) p["searchable"] = false;
    try {
        load_use_case(doc.dump());
        FAIL();
    } catch (const SchemaViolation& e) {
        EXPECT_EQ(e.where(), "Reservations");
    }
}

TEST(Schema, SearchableMustBeText) {
    ojson doc = restaurant_doc();
    for (auto& p : doc["collections"][0]["properties"]) p["searchable"] = p["name"] == "openNow";
    try {
        load_use_case(doc.dump());
        FAIL();
    } catch (const SchemaViolation& e) {
        EXPECT_EQ(e.where(), "Restaurants.openNow");
    }
}

TEST(Schema, DuplicatePropertyAndCollectionNames) {
    ojson doc = restaurant_doc();
    doc["collections"][0]["properties"][1]["name"] = "name";
    EXPECT_THROW(load_use_case(doc.dump()), SchemaViolation);

    doc = restaurant_doc();
    doc["collections"][2]["name"] = "Menus";
    try {
        load_use_case(doc.dump());
        FAIL();
    } catch (const SchemaViolation& e) {
        EXPECT_EQ(e.where(), "Menus");
    }
}

TEST(Schema, MalformedDocuments) {
    EXPECT_THROW(load_use_case("{not json"), ParseError);
    EXPECT_THROW(load_use_case("[]"), ParseError);
    ojson doc = restaurant_doc();
    doc["collections"][0]["properties"][0].erase("data_type");
    EXPECT_THROW(load_use_case(doc.dump()), ParseError);
    doc = restaurant_doc();
    doc["collections"][0]["properties"][0]["data_type"] = "STRING";
    EXPECT_THROW(load_use_case(doc.dump()), ParseError);
    doc = restaurant_doc();
    doc["collections"][0]["properties"][0]["searchable"] = "yes";
    EXPECT_THROW(load_use_case(doc.dump()), ParseError);
}

TEST(Schema, WrongCollectionCount) {
    ojson doc = restaurant_doc();
    doc["collections"].erase(2);
    EXPECT_THROW(load_use_case(doc.dump()), SchemaViolation);
    PropertyProfile two;
    two.collections = 2;
    EXPECT_NO_THROW(load_use_case(doc.dump(), "x", two));
}

TEST(Schema, SingleCollectionProfile) {
    PropertyProfile one;
    one.collections = 1;
    ojson doc = restaurant_doc();
    doc["collections"].erase(1);
    doc["collections"].erase(1);
    const UseCase uc = load_use_case(doc.dump(), "one", one);
    EXPECT_EQ(collection_names(uc), std::vector<std::string>{"Restaurants"});
}

TEST(Schema, RoundTripIsIdentity) {
    for (const auto& d : builtin_domains()) {
        const UseCase again = load_use_case(serialize(d.use_case), d.use_case.name);
        EXPECT_EQ(again, d.use_case);
        EXPECT_EQ(serialize(again), serialize(d.use_case));
    }
}

TEST(Schema, SerializedKeysMatchFileFormat) {
    const ojson doc = restaurant_doc();
    std::vector<std::string> keys;
    for (const auto& [k, _] : doc.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"use_case_overview", "collections"}));
    std::vector<std::string> prop_keys;
    for (const auto& [k, _] : doc["collections"][0]["properties"][0].items()) prop_keys.push_back(k);
    EXPECT_EQ(prop_keys, (std::vector<std::string>{"name", "data_type", "description", "searchable"}));
    EXPECT_EQ(doc["collections"][0]["properties"][2]["data_type"], "NUMBER");
}

TEST(Schema, DescriptionAtDefaultBudgetListsEverything) {
    const std::string text = render_description(restaurants(), 1024);
    for (const auto& c : restaurants().collections) {
        EXPECT_NE(text.find(c.name), std::string::npos) << c.name;
        for (const auto& p : c.properties) {
            EXPECT_NE(text.find(p.name), std::string::npos) << p.name;
            EXPECT_NE(text.find(p.description), std::string::npos) << p.description;
        }
    }
    EXPECT_LE(CharQuarterEstimator().estimate(text), 1024u);
    EXPECT_EQ(render_description(restaurants(), 10'000), text);
    EXPECT_NE(text.find(restaurants().use_case_overview), std::string::npos);
}

TEST(Schema, SmallBudgetTruncatesOrThrows) {
    const CharQuarterEstimator est;
    try {
        const std::string text = render_description(restaurants(), 80);
        EXPECT_LE(est.estimate(text), 80u);
    } catch (const BudgetExceeded& e) {
        EXPECT_EQ(e.budget(), 80u);
        EXPECT_GT(e.estimated(), 80u);
    }
    // Find the truncation steps by measuring the renderings directly.
    const std::string full = render_description(restaurants(), 10'000);
    const std::size_t full_tokens = est.estimate(full);
    const std::string cut = render_description(restaurants(), full_tokens - 1);
    EXPECT_LE(est.estimate(cut), full_tokens - 1);
    // Descriptions go first; names, types and the overview stay.
    EXPECT_EQ(cut.find("The price of the menu item"), std::string::npos);
    EXPECT_NE(cut.find(restaurants().use_case_overview), std::string::npos);
    EXPECT_NE(cut.find("price (NUMBER)"), std::string::npos);
    const std::size_t cut_tokens = est.estimate(cut);
    const std::string bare = render_description(restaurants(), cut_tokens - 1);
    EXPECT_EQ(bare.find(restaurants().use_case_overview), std::string::npos);
    for (const auto& c : restaurants().collections)
        for (const auto& p : c.properties) EXPECT_NE(bare.find(p.name), std::string::npos);
    EXPECT_THROW(render_description(restaurants(), est.estimate(bare) - 1), BudgetExceeded);
    EXPECT_THROW(render_description(restaurants(), 10), BudgetExceeded);
}

TEST(Schema, BudgetPropertyOverAllDomainsAndBudgets) {
    const CharQuarterEstimator est;
    for (const auto& d : builtin_domains()) {
        for (std::size_t b = 64; b <= 1200; b += 7) {
            try {
                EXPECT_LE(est.estimate(render_description(d.use_case, b)), b);
            } catch (const BudgetExceeded&) {
            }
        }
    }
}

TEST(Schema, CollectionNamesOverRandomUseCases) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        PropertyProfile profile;
        profile.collections = 1 + rng() % 5;
        profile.text = 1 + rng() % 3;
        profile.number = rng() % 3;
        profile.boolean = rng() % 3;
        const UseCase uc = bench::placeholder_use_case(profile, "domain" + std::to_string(i));
        EXPECT_NO_THROW(validate_use_case(uc, profile));
        const auto names = collection_names(uc);
        EXPECT_EQ(names.size(), uc.collections.size());
        EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
        EXPECT_EQ(names, collection_names(uc));
    }
}

TEST(Schema, EstimatorRoundsUp) {
    const CharQuarterEstimator est;
    EXPECT_EQ(est.estimate(""), 0u);
    EXPECT_EQ(est.estimate("a"), 1u);
    EXPECT_EQ(est.estimate("abcd"), 1u);
    EXPECT_EQ(est.estimate("abcde"), 2u);
}

TEST(Schema, FileRoundTrip) {
    const std::string path = ::testing::TempDir() + "/restaurants.json";
    write_use_case_file(restaurants(), path);
    const UseCase back = load_use_case_file(path);
    EXPECT_EQ(back, restaurants());
    EXPECT_EQ(back.name, "restaurants");
}
