#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dbgorilla/benchgen.hpp"
#include "dbgorilla/catalog.hpp"
#include "dbgorilla/error.hpp"
#include "dbgorilla/eval.hpp"
#include "oracle.hpp"
#include "random_cases.hpp"

using namespace dbgorilla;
using namespace dbgorilla::eval;

namespace {

QueryRequest menus_under_20() {
    QueryRequest q;
    q.collection_name = "Menus";
    q.integer_property_filter = IntPropertyFilter{"price", IntOperator::Lt, 20};
    return q;
}

const std::vector<DatasetRecord>& five_schema_records() {
    static const std::vector<DatasetRecord> records = bench::generate_benchmark({}).dataset.records;
    return records;
}

Prediction tool_call(const QueryRequest& q) { return {Prediction::Kind::ToolCall, {q}}; }
Prediction no_tool() { return {Prediction::Kind::NoTool, {}}; }

// A prediction that keeps the collection but drops the groupby or adds one.
QueryRequest near_miss(const QueryRequest& truth) {
    QueryRequest q = truth;
    q.groupby_property = q.groupby_property ? std::nullopt : std::optional<std::string>("never");
    return q;
}

const LeaderboardRow& row_for(const Reports& r, const std::string& model) {
    for (const auto& row : r.leaderboard)
        if (row.model == model) return row;
    throw std::runtime_error("no row " + model);
}

}  // namespace

TEST(Eval, ExactMatchExamples) {
    EXPECT_TRUE(exact_match(menus_under_20(), menus_under_20()));
    QueryRequest a = menus_under_20(), b = menus_under_20();
    a.search_query = "Seasonal Specialties";
    b.search_query = "seasonal specialties";
    EXPECT_TRUE(exact_match(a, b));
    EXPECT_FALSE(exact_match(a, b, true));
    QueryRequest le = menus_under_20();
    le.integer_property_filter->op = IntOperator::Le;
    EXPECT_FALSE(exact_match(le, menus_under_20()));
}

TEST(Eval, AstExamples) {
    EXPECT_EQ(ast_score(menus_under_20(), menus_under_20()), 1.0);
    QueryRequest wrong = menus_under_20();
    wrong.collection_name = "Reservations";
    EXPECT_EQ(ast_score(wrong, menus_under_20()), 0.0);
    QueryRequest bare;
    bare.collection_name = "Menus";
    EXPECT_EQ(ast_score(bare, menus_under_20()), 0.85);
    QueryRequest s1, s2;
    s1.collection_name = s2.collection_name = "Menus";
    s1.search_query = "pizza";
    s2.search_query = "healthy salad";
    EXPECT_EQ(ast_score(s1, s2), 1.0);
    EXPECT_FALSE(exact_match(s1, s2));
    EXPECT_EQ(ast_score(std::nullopt, menus_under_20()), 0.0);
}

TEST(Eval, Routing) {
    EXPECT_TRUE(collection_routing(menus_under_20(), menus_under_20()));
    QueryRequest r = menus_under_20();
    r.collection_name = "Reservations";
    EXPECT_FALSE(collection_routing(r, menus_under_20()));
    EXPECT_FALSE(collection_routing(std::nullopt, menus_under_20()));
}

TEST(Eval, WeightsMustSumToOne) {
    EXPECT_NO_THROW(AstWeights{}.check());
    EXPECT_THROW((AstWeights{0.5, 0.15}.check()), Error);
}

TEST(Eval, AstLatticeOnRandomPairs) {
    cases::Generator gen(77);
    const std::set<double> lattice{0.0, 0.40, 0.55, 0.70, 0.85, 1.00};
    std::set<double> seen;
    for (int i = 0; i < 3000; ++i) {
        const auto pair = gen.scoring_pair();
        const double s = ast_score(pair.prediction, pair.truth);
        ASSERT_TRUE(lattice.count(s)) << s;
        EXPECT_EQ(s, oracle::reference_ast(pair.prediction, pair.truth));
        seen.insert(s);
        if (!pair.prediction) continue;
        if (exact_match(*pair.prediction, pair.truth)) EXPECT_EQ(s, 1.0);
        EXPECT_EQ(collection_routing(pair.prediction, pair.truth), s >= 0.40);
        EXPECT_EQ(ast_score(pair.truth, *pair.prediction), s);
    }
    EXPECT_EQ(seen, lattice);
}

TEST(Eval, ScorePredictionTakesBestCall) {
    DatasetRecord rec{"restaurants-01", "cmd", menus_under_20(), "restaurants", operator_signature(menus_under_20())};
    QueryRequest bare;
    bare.collection_name = "Menus";
    const auto o = score_prediction("m", rec, {Prediction::Kind::ToolCall, {bare, menus_under_20()}});
    EXPECT_TRUE(o.exact_match);
    EXPECT_EQ(o.ast_score, 1.0);
    EXPECT_EQ(o.calls, 2u);
    EXPECT_EQ(o.best_call, menus_under_20());

    const auto n = score_prediction("m", rec, no_tool());
    EXPECT_TRUE(n.no_tool);
    EXPECT_FALSE(n.exact_match);
    EXPECT_EQ(n.ast_score, 0.0);
    EXPECT_FALSE(n.routed_correctly);

    const auto bad = score_prediction("m", rec, {Prediction::Kind::Malformed, {}});
    EXPECT_FALSE(bad.no_tool);
    EXPECT_EQ(bad.ast_score, 0.0);

    QueryRequest two = menus_under_20();
    two.boolean_property_filter = BooleanPropertyFilter{"isVegetarian", BoolOperator::Eq, true};
    EXPECT_TRUE(score_prediction("m", rec, tool_call(two)).multi_slot);
}

TEST(Eval, PreferenceWeights) {
    const PreferenceWeights w;
    const int expected[] = {100, 70, 50, 35, 25, 20, 15, 10, 5, 0};
    for (int rank = 1; rank <= 10; ++rank) EXPECT_EQ(w.points_for(rank), expected[rank - 1]);
    EXPECT_EQ(w.points_for(14), 0);

    const auto two = preference_score({{"a", {1, 1}}}, 2);
    EXPECT_EQ(two[0].weighted_score, 200);
    EXPECT_EQ(two[0].first_place_pct(), 100.0);
    EXPECT_EQ(preference_score({{"a", {1, 3, 5}}}, 5)[0].weighted_score, 175);
    EXPECT_EQ(preference_score({{"a", {10, 12}}}, 12)[0].weighted_score, 0);
    EXPECT_THROW(preference_score({{"a", {0}}}, 3), RankOutOfRange);
    EXPECT_THROW(preference_score({{"a", {4}}}, 3), RankOutOfRange);

    const auto tie = preference_score({{"b", {1, 2}}, {"a", {1, 1}}}, 2);
    EXPECT_EQ(tie[0].model, "a");
    EXPECT_EQ(tie[0].first_places, 2u);
    EXPECT_EQ(tie[1].weighted_score, 170);
    EXPECT_EQ(tie[1].first_place_pct(), 50.0);
}

TEST(Eval, SimpleBucketEightySevenPointFive) {
    const auto& records = five_schema_records();
    ASSERT_EQ(records.size(), 315u);
    std::vector<EvalOutcome> outcomes;
    int simple_seen = 0;
    for (const auto& r : records) {
        bool hit = true;
        if (complexity(r.combination) == ComplexityBucket::Simple) hit = simple_seen++ >= 5;
        outcomes.push_back(score_prediction("gpt", r, tool_call(hit ? r.ground_truth_query : near_miss(r.ground_truth_query))));
    }
    ASSERT_EQ(simple_seen, 40);
    const Reports reports = build_reports(outcomes, records);
    const auto& row = row_for(reports, "gpt");
    EXPECT_EQ(*row.simple_pct, 87.5);
    EXPECT_EQ(*row.moderate_pct, 100.0);
    EXPECT_EQ(row.routing_pct, 100.0);
    EXPECT_EQ(render_markdown(leaderboard_table(reports)).find("87.5") != std::string::npos, true);
}

TEST(Eval, NoToolRateFivePointFour) {
    const auto& records = five_schema_records();
    std::vector<EvalOutcome> outcomes;
    for (std::size_t i = 0; i < records.size(); ++i)
        outcomes.push_back(score_prediction("gemini", records[i], i % 18 == 0 ? no_tool() : tool_call(records[i].ground_truth_query)));
    const Reports reports = build_reports(outcomes, records);
    ASSERT_EQ(reports.no_tool[0].no_tool, 18u);  // 0, 18, ..., 306
    std::vector<EvalOutcome> seventeen = outcomes;
    seventeen[0] = score_prediction("gemini", records[0], tool_call(records[0].ground_truth_query));
    const Reports r17 = build_reports(seventeen, records);
    EXPECT_EQ(r17.no_tool[0].no_tool, 17u);
    EXPECT_EQ(format_fixed(r17.no_tool[0].no_tool_pct(), 2), "5.40");
    EXPECT_NE(render_markdown(no_tool_table(r17)).find("5.40"), std::string::npos);
}

TEST(Eval, AllExactGivesHundredEverywhere) {
    const auto& records = five_schema_records();
    std::vector<EvalOutcome> outcomes;
    for (const auto& r : records) outcomes.push_back(score_prediction("m", r, tool_call(r.ground_truth_query)));
    const Reports reports = build_reports(outcomes, records);
    for (const auto& row : reports.components.cells)
        for (const auto& cell : row) EXPECT_EQ(cell, 100.0);
    for (const auto& row : reports.per_schema.cells)
        for (const auto& cell : row) EXPECT_EQ(cell, 100.0);
    EXPECT_EQ(reports.leaderboard[0].exact_match_pct, 100.0);
    EXPECT_EQ(reports.leaderboard[0].ast_mean, 1.0);
    EXPECT_EQ(reports.components.row_labels.size(), 8u);
    EXPECT_EQ(reports.per_schema.row_labels.size(), 5u);
}

TEST(Eval, BucketWeightedMeanIdentity) {
    const auto& records = five_schema_records();
    cases::Generator gen(3);
    std::vector<EvalOutcome> outcomes;
    for (const auto& r : records)
        outcomes.push_back(score_prediction(
            "m", r, tool_call(gen.rng()() % 3 ? r.ground_truth_query : near_miss(r.ground_truth_query))));
    const auto& row = build_reports(outcomes, records).leaderboard[0];
    const double mixed = (40 * *row.simple_pct + 110 * *row.moderate_pct + 165 * *row.complex_pct) / 315;
    EXPECT_NEAR(row.exact_match_pct, mixed, 1e-9);
}

TEST(Eval, ComponentTableCountsOnlyQualifyingRecords) {
    const auto& records = five_schema_records();
    std::vector<EvalOutcome> outcomes;
    // Miss every record whose truth groups; everything else exact.
    for (const auto& r : records)
        outcomes.push_back(score_prediction(
            "m", r, tool_call(r.combination.groupby ? near_miss(r.ground_truth_query) : r.ground_truth_query)));
    const Reports reports = build_reports(outcomes, records);
    const auto& labels = reports.components.row_labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Component c = all_components()[i];
        std::size_t qualifying = 0, hits = 0;
        for (const auto& r : records)
            if (uses_component(r.combination, c)) {
                ++qualifying;
                hits += !r.combination.groupby;
            }
        EXPECT_NEAR(*reports.components.cells[i][0], 100.0 * double(hits) / double(qualifying), 1e-9) << labels[i];
    }
}

TEST(Eval, ReportErrors) {
    const auto& records = five_schema_records();
    EXPECT_THROW(build_reports({}, records), Error);
    EvalOutcome ghost = score_prediction("m", records[0], no_tool());
    ghost.record_id = "nope-99";
    EXPECT_THROW(build_reports({ghost}, records), MissingRecord);
}

TEST(Eval, LeaderboardOrderAndRendering) {
    const auto& records = five_schema_records();
    std::vector<EvalOutcome> outcomes;
    for (const auto& r : records) {
        outcomes.push_back(score_prediction("b-model", r, tool_call(r.ground_truth_query)));
        outcomes.push_back(score_prediction("a-model", r, no_tool()));
    }
    const Reports reports = build_reports(outcomes, records);
    EXPECT_EQ(reports.leaderboard[0].model, "b-model");
    EXPECT_EQ(reports.leaderboard[1].model, "a-model");
    const std::string md = render_markdown(leaderboard_table(reports));
    EXPECT_EQ(md.rfind("### ", 0), 0u);
    EXPECT_NE(md.find("\n| Rank | Model |"), std::string::npos) << md;
    EXPECT_NE(md.find("b-model"), std::string::npos);
    const std::string csv = render_csv(leaderboard_table(reports));
    EXPECT_EQ(csv, render_csv(leaderboard_table(build_reports(outcomes, records))));

    const std::string html = render_html(reports, outcomes, records);
    EXPECT_NE(html.find("id=\"rec-" + records[0].record_id + "\""), std::string::npos);
    const std::string rows = outcomes_csv(outcomes);
    EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 631);
}

TEST(Eval, CsvQuoting) {
    TextTable t{"T", {"a", "b"}, {{"x,y", "say \"hi\""}}};
    EXPECT_EQ(render_csv(t), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
}
