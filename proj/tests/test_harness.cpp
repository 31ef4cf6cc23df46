#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "dbgorilla/benchgen.hpp"
#include "dbgorilla/catalog.hpp"
#include "dbgorilla/error.hpp"
#include "dbgorilla/harness.hpp"
#include "fake_provider.hpp"

using namespace dbgorilla;
using namespace dbgorilla::harness;
using fakes::Call;
using ojson = nlohmann::ordered_json;

namespace {

const UseCase& restaurants() { return find_builtin_domain("restaurants")->use_case; }

const Dataset& restaurant_dataset() {
    static const Dataset d = [] {
        bench::GenerateOptions o;
        o.schemas = 1;
        return bench::generate_benchmark(o).dataset;
    }();
    return d;
}

const DatasetRecord& record(const std::string& id) { return *restaurant_dataset().find(id); }

QueryRequest menus_under_20() {
    QueryRequest q;
    q.collection_name = "Menus";
    q.integer_property_filter = IntPropertyFilter{"price", IntOperator::Lt, 20};
    return q;
}

DatasetRecord price_record() {
    return {"restaurants-99", "Which menu items cost less than 20?", menus_under_20(), "restaurants",
            operator_signature(menus_under_20())};
}

// Truth as a unified tool call, looked up by record id.
fakes::ScriptedProvider echo_truth(const std::string& model) {
    return fakes::ScriptedProvider(model, [](const ChatRequest& r) {
        return fakes::openai_reply({{"query_database", fakes::unified_args(record(r.key).ground_truth_query)}});
    });
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto p = std::filesystem::path(::testing::TempDir()) / name;
    std::filesystem::remove_all(p);
    return p;
}

ProviderConfig quick_config(Mode mode = Mode::Unified) {
    ProviderConfig c;
    c.model = "m";
    c.mode = ModeFlags::from(mode);
    c.backoff = std::chrono::milliseconds(1);
    c.pricing = Pricing::per_million(2.5, 10);
    return c;
}

// Serves scripted HTTP statuses on a loopback port.
class MockServer {
public:
    explicit MockServer(std::vector<std::pair<int, std::string>> script) : script_(std::move(script)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const std::size_t i = hits_++;
            bodies_.push_back(req.body);
            auth_ = req.get_header_value("Authorization");
            const auto& [status, body] = script_[std::min(i, script_.size() - 1)];
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    std::size_t hits() const { return hits_; }
    const std::vector<std::string>& bodies() const { return bodies_; }
    const std::string& auth() const { return auth_; }

private:
    httplib::Server server_;
    std::vector<std::pair<int, std::string>> script_;
    std::atomic<std::size_t> hits_{0};
    std::vector<std::string> bodies_;
    std::string auth_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST(Harness, ModesAndFlags) {
    for (Mode m : {Mode::Unified, Mode::PerCollectionTools, Mode::Structured, Mode::Rationale, Mode::Parallel})
        EXPECT_EQ(parse_mode(to_string(m)), m);
    EXPECT_FALSE(parse_mode("turbo"));
    EXPECT_TRUE(ModeFlags::from(Mode::Parallel).parallel_tool_calls);
    EXPECT_TRUE(ModeFlags::from(Mode::Structured).structured_generation);
    ModeFlags bad;
    bad.structured_generation = bad.per_collection_tools = true;
    EXPECT_THROW(bad.check(), Error);
    bad.per_collection_tools = false;
    bad.rationale_required = true;
    EXPECT_THROW(bad.check(), Error);
}

TEST(Harness, ToolsetsPerMode) {
    EXPECT_EQ(build_toolset(restaurants(), ModeFlags::from(Mode::Unified)).tools.size(), 1u);
    EXPECT_EQ(build_toolset(restaurants(), ModeFlags::from(Mode::PerCollectionTools)).tools.size(), 3u);
    const ToolSet s = build_toolset(restaurants(), ModeFlags::from(Mode::Structured));
    EXPECT_TRUE(s.tools.empty());
    ASSERT_TRUE(s.response_schema);
    EXPECT_TRUE(build_toolset(restaurants(), ModeFlags::from(Mode::Rationale)).tools[0].has_parameter("rationale"));
    EXPECT_TRUE(build_toolset(restaurants(), ModeFlags::from(Mode::Parallel)).parallel_tool_calls);
}

TEST(Harness, ModeParityAcrossDeliveryPaths) {
    const DatasetRecord rec = price_record();
    const QueryRequest truth = menus_under_20();
    const auto unified = interpret_reply(rec, restaurants(), ModeFlags::from(Mode::Unified),
                                         fakes::openai_reply({{"query_database", fakes::unified_args(truth)}}), "m");
    const auto per = interpret_reply(rec, restaurants(), ModeFlags::from(Mode::PerCollectionTools),
                                     fakes::openai_reply({{"query_Menus", fakes::per_collection_args(truth)}}), "m");
    const auto structured = interpret_reply(rec, restaurants(), ModeFlags::from(Mode::Structured),
                                            fakes::structured_reply({{"query_database", fakes::unified_args(truth)}}),
                                            "m");
    const auto anthropic = interpret_reply(rec, restaurants(), ModeFlags::from(Mode::Unified),
                                           fakes::anthropic_reply({{"query_database", fakes::unified_args(truth)}}),
                                           "m");
    for (const auto* o : {&unified, &per, &structured, &anthropic}) {
        EXPECT_EQ(o->kind, eval::Prediction::Kind::ToolCall) << o->diagnostics.size();
        ASSERT_EQ(o->queries.size(), 1u);
        EXPECT_EQ(o->queries[0], truth);
    }
    EXPECT_EQ(structured.rationale, "needs data");
}

TEST(Harness, NoToolAndMalformed) {
    const DatasetRecord rec = price_record();
    const ModeFlags unified = ModeFlags::from(Mode::Unified);
    const auto prose = interpret_reply(rec, restaurants(), unified, fakes::openai_reply({}, "Try the pizza."), "m");
    EXPECT_EQ(prose.kind, eval::Prediction::Kind::NoTool);
    EXPECT_EQ(prose.response_text, "Try the pizza.");

    const auto structured_prose =
        interpret_reply(rec, restaurants(), ModeFlags::from(Mode::Structured), fakes::structured_reply({}), "m");
    EXPECT_EQ(structured_prose.kind, eval::Prediction::Kind::NoTool);
    EXPECT_EQ(structured_prose.response_text, "I can answer without the database.");

    ChatResponse broken = fakes::openai_reply({});
    broken.payload["choices"][0]["message"]["tool_calls"] =
        ojson::array({{{"type", "function"}, {"function", {{"name", "query_database"}, {"arguments", "{oops"}}}}});
    const auto bad_json = interpret_reply(rec, restaurants(), unified, broken, "m");
    EXPECT_EQ(bad_json.kind, eval::Prediction::Kind::Malformed);
    EXPECT_FALSE(bad_json.diagnostics.empty());

    QueryRequest wrong = menus_under_20();
    wrong.integer_property_filter->property_name = "isVegetarian";
    const auto invalid =
        interpret_reply(rec, restaurants(), unified, fakes::openai_reply({{"query_database", fakes::unified_args(wrong)}}), "m");
    EXPECT_EQ(invalid.kind, eval::Prediction::Kind::Malformed);
    ASSERT_EQ(invalid.queries.size(), 1u);
    EXPECT_NE(invalid.diagnostics[0].find("TypeMismatch(isVegetarian, NUMBER, BOOLEAN)"), std::string::npos);

    const auto no_rationale = interpret_reply(
        rec, restaurants(), ModeFlags::from(Mode::Rationale),
        fakes::openai_reply({{"query_database", fakes::unified_args(menus_under_20())}}), "m");
    EXPECT_EQ(no_rationale.kind, eval::Prediction::Kind::Malformed);
    const auto with_rationale = interpret_reply(
        rec, restaurants(), ModeFlags::from(Mode::Rationale),
        fakes::openai_reply({{"query_database", fakes::unified_args(menus_under_20(), "filter on price")}}), "m");
    EXPECT_EQ(with_rationale.kind, eval::Prediction::Kind::ToolCall);
    EXPECT_EQ(with_rationale.rationale, "filter on price");

    ChatResponse garbage;
    garbage.envelope = "openai";
    garbage.payload = {{"nothing", 1}};
    EXPECT_EQ(interpret_reply(rec, restaurants(), unified, garbage, "m").kind, eval::Prediction::Kind::Malformed);

    ChatResponse bad_structured = fakes::openai_reply({}, "{\"use_tools\": true}");
    EXPECT_EQ(interpret_reply(rec, restaurants(), ModeFlags::from(Mode::Structured), bad_structured, "m").kind,
              eval::Prediction::Kind::Malformed);
}

TEST(Harness, ParallelCallsOnlyWhenEnabled) {
    const DatasetRecord rec = price_record();
    QueryRequest other = menus_under_20();
    other.integer_property_filter->op = IntOperator::Le;
    const auto reply = fakes::openai_reply(
        {{"query_database", fakes::unified_args(other)}, {"query_database", fakes::unified_args(menus_under_20())}});
    const auto single = interpret_reply(rec, restaurants(), ModeFlags::from(Mode::Unified), reply, "m");
    EXPECT_EQ(single.queries.size(), 1u);
    EXPECT_EQ(single.diagnostics.size(), 1u);
    const auto multi = interpret_reply(rec, restaurants(), ModeFlags::from(Mode::Parallel), reply, "m");
    ASSERT_EQ(multi.queries.size(), 2u);
    EXPECT_FALSE(score_parallel(single, rec).exact_match);
    EXPECT_TRUE(score_parallel(multi, rec).exact_match);
}

TEST(Harness, MeanCallsPerQuery) {
    // 21 of 100 tool-calling records issue two calls.
    Dataset d = restaurant_dataset();
    while (d.records.size() < 100) {
        DatasetRecord extra = d.records[d.records.size() % 63];
        extra.record_id = "restaurants-x" + std::to_string(d.records.size());
        d.records.push_back(extra);
    }
    d.records.resize(100);
    std::map<std::string, std::size_t> order;
    std::vector<std::string> ids;
    for (const auto& r : d.records) ids.push_back(r.record_id);
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) order[ids[i]] = i;
    std::map<std::string, QueryRequest> truth;
    for (const auto& r : d.records) truth[r.record_id] = r.ground_truth_query;

    fakes::ScriptedProvider p("m", [&](const ChatRequest& r) {
        const ojson args = fakes::unified_args(truth.at(r.key));
        if (order.at(r.key) < 21) return fakes::openai_reply({{"query_database", args}, {"query_database", args}});
        return fakes::openai_reply({{"query_database", args}});
    });
    const RunResult run = run_benchmark(d, p, quick_config(Mode::Parallel));
    EXPECT_DOUBLE_EQ(run.mean_calls, 1.21);
    EXPECT_EQ(run.outcomes.size(), 100u);
}

TEST(Harness, RunIsDeterministicAndSorted) {
    auto a = echo_truth("m");
    auto b = echo_truth("m");
    ProviderConfig c = quick_config();
    c.max_in_flight = 8;
    const RunResult r1 = run_benchmark(restaurant_dataset(), a, c);
    const RunResult r2 = run_benchmark(restaurant_dataset(), b, c);
    EXPECT_EQ(outcomes_jsonl(r1.outcomes), outcomes_jsonl(r2.outcomes));
    EXPECT_TRUE(std::is_sorted(r1.outcomes.begin(), r1.outcomes.end(),
                               [](const auto& x, const auto& y) { return x.record_id < y.record_id; }));
    EXPECT_EQ(a.calls(), 63u);
    for (const auto& o : r1.outcomes) EXPECT_EQ(o.kind, eval::Prediction::Kind::ToolCall);
    EXPECT_EQ(read_outcomes_jsonl(outcomes_jsonl(r1.outcomes)), r1.outcomes);
    ASSERT_EQ(r1.ledger.entries().size(), 1u);
    EXPECT_EQ(r1.ledger.entries()[0].usage, (Usage{6300, 1260}));
}

TEST(Harness, RecordThenReplay) {
    const auto dir = fresh_dir("archive_rt");
    auto live = echo_truth("model-a");
    RecordingProvider recorder(live, dir.string());
    const RunResult recorded = run_benchmark(restaurant_dataset(), recorder, quick_config());
    EXPECT_TRUE(std::filesystem::exists(archive_path(dir.string(), "model-a", "restaurants-01")));

    ReplayProvider replay(dir.string(), "model-a");
    const RunResult replayed = run_benchmark(restaurant_dataset(), replay, quick_config());
    EXPECT_EQ(outcomes_jsonl(replayed.outcomes), outcomes_jsonl(recorded.outcomes));

    EXPECT_THROW(ReplayProvider(dir.string(), "model-b"), ProviderError);
    ChatRequest req;
    req.key = "restaurants-64";
    EXPECT_THROW(replay.complete(req), ProviderError);

    ProviderConfig c;
    c.provider = "replay";
    c.model = "model-a";
    c.endpoint = dir.string();
    EXPECT_EQ(make_provider(c)->complete({"restaurants-02"}).payload,
              ReplayProvider(dir.string(), "model-a").complete({"restaurants-02"}).payload);
    c.provider = "carrier-pigeon";
    EXPECT_THROW(make_provider(c), Error);
}

TEST(Harness, ArchiveEntryRoundTrip) {
    const ChatResponse r = fakes::anthropic_reply({{"query_Menus", fakes::per_collection_args(menus_under_20())}});
    const ChatResponse back = response_from_archive(archive_entry(r));
    EXPECT_EQ(back.envelope, r.envelope);
    EXPECT_EQ(back.payload, r.payload);
    EXPECT_EQ(back.usage, r.usage);
    EXPECT_EQ(usage_from_payload("anthropic", r.payload), (Usage{100, 20}));
    ojson bad = archive_entry(r);
    bad["envelope"] = "smoke-signals";
    EXPECT_THROW(response_from_archive(bad), Error);
}

TEST(Harness, AbortAfterRepeatedFailures) {
    fakes::ScriptedProvider down("m", [](const ChatRequest&) -> ChatResponse { throw TransportError("down"); });
    ProviderConfig c = quick_config();
    c.max_attempts = 1;
    c.abort_after = 3;
    c.max_in_flight = 1;
    EXPECT_THROW(run_benchmark(restaurant_dataset(), down, c), AbortAfterNFailures);
    EXPECT_EQ(down.calls(), 3u);

    // Below the threshold failures become MALFORMED outcomes.
    std::atomic<int> n{0};
    fakes::ScriptedProvider flaky("m", [&](const ChatRequest& r) -> ChatResponse {
        if (r.key == "restaurants-05") throw ProviderError("refused");
        ++n;
        return fakes::openai_reply({{"query_database", fakes::unified_args(record(r.key).ground_truth_query)}});
    });
    const RunResult run = run_benchmark(restaurant_dataset(), flaky, c);
    const auto& o = run.outcomes[4];
    EXPECT_EQ(o.record_id, "restaurants-05");
    EXPECT_EQ(o.kind, eval::Prediction::Kind::Malformed);
    EXPECT_EQ(o.diagnostics[0].rfind("provider: ", 0), 0u);
}

TEST(Harness, HttpRetriesThenSucceeds) {
    const std::string ok = fakes::openai_reply({{"query_database", fakes::unified_args(menus_under_20())}}).payload.dump();
    MockServer server({{429, "{}"}, {503, "{}"}, {200, ok}});
    ProviderConfig c = quick_config();
    c.provider = "openai-compatible";
    c.endpoint = server.url();
    c.credential_env = "DBGORILLA_TEST_UNSET_KEY";
    auto provider = make_provider(c);
    const DatasetRecord rec = price_record();
    const auto o = run_single_step(rec, restaurants(), *provider, c, build_toolset(restaurants(), c.mode));
    EXPECT_EQ(server.hits(), 3u);
    EXPECT_EQ(o.kind, eval::Prediction::Kind::ToolCall);
    EXPECT_EQ(o.queries[0], menus_under_20());
    EXPECT_EQ(o.usage, (Usage{100, 20}));
    const ojson body = ojson::parse(server.bodies().back());
    EXPECT_EQ(body["model"], "m");
    EXPECT_EQ(body["tools"][0]["function"]["name"], "query_database");
    EXPECT_EQ(body["parallel_tool_calls"], false);
    EXPECT_EQ(body["messages"][1]["content"], rec.nl_command);
    EXPECT_FALSE(body.contains("temperature"));
    EXPECT_TRUE(server.auth().empty());
}

TEST(Harness, HttpGivesUpAndClassifiesErrors) {
    {
        MockServer server({{500, "{}"}});
        ProviderConfig c = quick_config();
        c.provider = "openai-compatible";
        c.endpoint = server.url();
        c.max_attempts = 2;
        auto provider = make_provider(c);
        EXPECT_THROW(run_single_step(price_record(), restaurants(), *provider, c, build_toolset(restaurants(), c.mode)),
                     TransportError);
        EXPECT_EQ(server.hits(), 2u);
    }
    {
        MockServer server({{401, "{\"error\":\"bad key\"}"}});
        ProviderConfig c = quick_config();
        c.provider = "openai-compatible";
        c.endpoint = server.url();
        ::setenv("DBGORILLA_TEST_KEY", "sk-test", 1);
        c.credential_env = "DBGORILLA_TEST_KEY";
        auto provider = make_provider(c);
        EXPECT_THROW(run_single_step(price_record(), restaurants(), *provider, c, build_toolset(restaurants(), c.mode)),
                     ProviderError);
        EXPECT_EQ(server.hits(), 1u);
        EXPECT_EQ(server.auth(), "Bearer sk-test");
    }
    ProviderConfig c = quick_config();
    c.provider = "openai";
    c.credential_env = "DBGORILLA_TEST_SURELY_UNSET";
    EXPECT_THROW(make_provider(c), ProviderError);
    c.provider = "openai-compatible";
    c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    c.max_attempts = 1;
    auto provider = make_provider(c);
    EXPECT_THROW(provider->complete({"x"}), TransportError);
}

TEST(Harness, RequestBodies) {
    ChatRequest req;
    req.key = "k";
    req.system = "sys";
    req.user = "hello";
    req.tools = build_toolset(restaurants(), ModeFlags::from(Mode::Parallel)).tools;
    req.parallel_tool_calls = true;
    req.temperature = 0.0;
    const ojson a = anthropic_request_body(req, "claude");
    EXPECT_EQ(a["system"], "sys");
    EXPECT_EQ(a["tools"][0]["input_schema"]["required"], ojson::array({"collection_name"}));
    EXPECT_EQ(a["tool_choice"]["disable_parallel_tool_use"], false);
    EXPECT_EQ(a["temperature"], 0.0);

    ChatRequest s;
    s.user = "hello";
    s.response_schema = build_toolset(restaurants(), ModeFlags::from(Mode::Structured)).response_schema;
    const ojson o = openai_request_body(s, "gpt");
    EXPECT_EQ(o["response_format"]["json_schema"]["name"], "ResponseOrToolCall");
    EXPECT_FALSE(o.contains("tools"));
    EXPECT_NE(anthropic_request_body(s, "claude")["messages"][0]["content"].get<std::string>().find("use_tools"),
              std::string::npos);
}

TEST(Harness, CostTableFigures) {
    const Usage bench{245'000, 140'000};
    const std::map<std::string, std::string> expected{
        {"Claude 3.5 Sonnet", "2.84"}, {"GPT-4o", "2.01"},         {"Command R+", "2.01"},
        {"Gemini 1.5 Pro", "1.01"},    {"GPT-4o Mini", "0.12"},    {"Llama 3.1 8B Instruct", "0.03"},
        {"Gemini 1.5 Flash", "0.06"},  {"Command R7B", "0.03"},    {"gemini-2.0-flash-exp", "0.06"}};
    for (const auto& [model, dollars] : expected) {
        const PricingEntry* e = find_pricing(model);
        ASSERT_NE(e, nullptr) << model;
        ModelCost m{model, e->pricing, bench};
        EXPECT_EQ(format_dollars(m.total_cents()), dollars) << model;
    }
    const PricingEntry* gpt = find_pricing("gpt-4o");
    ModelCost gen{"GPT-4o", gpt->pricing, {413'516, 86'457}};
    EXPECT_EQ(gen.input_cents(), 103);
    EXPECT_EQ(gen.output_cents(), 86);
    EXPECT_EQ(format_dollars(gen.total_cents()), "1.89");
    EXPECT_FALSE(find_pricing("Gemini 2.0 Flash (exp)")->note.empty());
    EXPECT_EQ(find_pricing("maybe-gpt-5"), nullptr);
}

TEST(Harness, CostArithmetic) {
    EXPECT_EQ(cost_cents(0, 3'000'000), 0);
    EXPECT_EQ(cost_cents(1'000'000, 3'000'000), 300);
    EXPECT_EQ(cost_cents(5'000, 1'000'000), 1);  // half a cent rounds up
    EXPECT_EQ(cost_cents(4'999, 1'000'000), 0);
    EXPECT_EQ(format_dollars(0), "0.00");
    EXPECT_EQ(format_dollars(123456), "1234.56");
    EXPECT_THROW(Pricing::per_million(-1, 1), Error);

    CostLedger ledger;
    const Pricing p = Pricing::per_million(3, 15);
    ledger.add("claude", {100'000, 40'000}, p);
    ledger.add("claude", {145'000, 100'000}, p);
    ledger.add("mini", {245'000, 140'000}, Pricing::per_million(0.15, 0.6));
    EXPECT_EQ(ledger.find("claude")->usage, (Usage{245'000, 140'000}));
    EXPECT_EQ(ledger.find("claude")->total_cents(), 284);
    EXPECT_EQ(ledger.grand_total_cents(), 284 + 12);
    EXPECT_THROW(ledger.add("claude", {1, 1}, Pricing::per_million(2, 15)), Error);
    const auto table = ledger.table();
    EXPECT_EQ(table.rows.back()[0], "Total");
    EXPECT_EQ(table.rows.back().size(), table.header.size());
}

TEST(Harness, TextGeneratorAdapterIsKeyedByPrompt) {
    fakes::ScriptedProvider p("writer", [](const ChatRequest& r) { return fakes::openai_reply({}, "echo " + r.user); });
    ProviderTextGenerator gen(p, "cmd");
    EXPECT_EQ(gen.generate("sys", "one"), "echo one");
    gen.generate("sys", "two");
    gen.generate("sys", "one");
    const auto reqs = p.requests();
    EXPECT_EQ(reqs[0].key, reqs[2].key);
    EXPECT_NE(reqs[0].key, reqs[1].key);
    EXPECT_EQ(reqs[0].key.rfind("cmd-", 0), 0u);
}

TEST(Harness, JudgeRanksAnonymizedPredictions) {
    const DatasetRecord rec = price_record();
    QueryRequest off = menus_under_20();
    off.integer_property_filter->value = 25;
    auto outcome = [&](const std::string& model, std::optional<QueryRequest> q) {
        PredictionOutcome o;
        o.record_id = rec.record_id;
        o.model = model;
        if (q) {
            o.kind = eval::Prediction::Kind::ToolCall;
            o.queries = {*q};
        } else {
            o.response_text = "Sorry.";
        }
        return o;
    };
    const std::vector<PredictionOutcome> per_model{outcome("zeta", menus_under_20()), outcome("alpha", off),
                                                   outcome("beta", menus_under_20()), outcome("gamma", std::nullopt)};
    fakes::ScriptedProvider judge("judge", [](const ChatRequest& r) {
        EXPECT_EQ(r.user.find("zeta"), std::string::npos);
        EXPECT_EQ(r.user.find("alpha"), std::string::npos);
        const ojson body = {{"ranking", {{{"prediction", "P1"}, {"rank", 2}}, {{"prediction", "P2"}, {"rank", 1}},
                                         {{"prediction", "P3"}, {"rank", 3}}}},
                            {"explanation", "P2 uses the stated bound"}};
        return fakes::openai_reply({}, body.dump());
    });
    const Judgment j = judge_predictions(rec, restaurants(), per_model, judge);
    EXPECT_EQ(judge.calls(), 1u);
    ASSERT_EQ(j.predictions.size(), 3u);  // zeta and beta share one text
    EXPECT_EQ(j.ranks.at("zeta"), j.ranks.at("beta"));
    EXPECT_EQ(j.record_id, rec.record_id);
    EXPECT_EQ(judgment_from_json(to_json(j)), j);
    EXPECT_EQ(read_judgments_jsonl(judgments_jsonl({j})), std::vector<Judgment>{j});
    std::set<int> ranks;
    for (const auto& [m, r] : j.ranks) ranks.insert(r);
    EXPECT_EQ(ranks, (std::set<int>{1, 2, 3}));

    const auto lists = rank_lists({j, j});
    EXPECT_EQ(lists.at("gamma").size(), 2u);
}

TEST(Harness, JudgeShortcutsAndRejections) {
    const DatasetRecord rec = price_record();
    PredictionOutcome same;
    same.record_id = rec.record_id;
    same.kind = eval::Prediction::Kind::ToolCall;
    same.queries = {menus_under_20()};
    PredictionOutcome a = same, b = same;
    a.model = "a";
    b.model = "b";
    fakes::ScriptedProvider unused("judge", [](const ChatRequest&) -> ChatResponse { throw ProviderError("no"); });
    const Judgment j = judge_predictions(rec, restaurants(), {a, b}, unused);
    EXPECT_EQ(unused.calls(), 0u);
    EXPECT_EQ(j.ranks.at("a"), 1);
    EXPECT_EQ(j.ranks.at("b"), 1);

    PredictionOutcome c = same;
    c.model = "c";
    c.queries[0].integer_property_filter->value = 30;
    fakes::ScriptedProvider sloppy("judge", [](const ChatRequest&) {
        return fakes::openai_reply({}, R"({"ranking":[{"prediction":"P1","rank":1}],"explanation":""})");
    });
    EXPECT_THROW(judge_predictions(rec, restaurants(), {a, c}, sloppy), GeneratorFailure);
    fakes::ScriptedProvider out_of_range("judge", [](const ChatRequest&) {
        return fakes::openai_reply(
            {}, R"({"ranking":[{"prediction":"P1","rank":1},{"prediction":"P2","rank":7}],"explanation":""})");
    });
    EXPECT_THROW(judge_predictions(rec, restaurants(), {a, c}, out_of_range), GeneratorFailure);
}

TEST(Harness, MetadataRecordsRunSettings) {
    ProviderConfig c = quick_config(Mode::Structured);
    c.provider = "replay";
    const ojson m = run_metadata(c, 42, "data/", "2026-01-01T00:00:00Z", "2026-01-01T00:01:00Z", 63);
    EXPECT_EQ(m["seed"], 42);
    EXPECT_EQ(m["model"], "m");
    EXPECT_EQ(m["temperature"], "provider default");
    EXPECT_EQ(m["mode"]["structured_generation"], true);
    EXPECT_EQ(utc_timestamp().size(), 20u);
    EXPECT_NE(system_prompt(ModeFlags::from(Mode::Structured)).find("ResponseOrToolCall"), std::string::npos);
}
