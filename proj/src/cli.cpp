#include "dbgorilla/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "dbgorilla/benchgen.hpp"
#include "dbgorilla/catalog.hpp"
#include "dbgorilla/engine.hpp"
#include "dbgorilla/error.hpp"
#include "dbgorilla/eval.hpp"
#include "dbgorilla/harness.hpp"
#include "dbgorilla/io.hpp"

namespace dbgorilla::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string model_slug(const std::string& model) {
    std::string s;
    for (char c : model) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
        s += keep ? c : '_';
    }
    return s.empty() ? "model" : s;
}

namespace {

const std::vector<std::string> kModes{"unified", "per-collection-tools", "structured", "rationale", "parallel"};
const std::vector<std::string> kProviders{"replay", "openai", "anthropic", "openai-compatible"};

const char* kCredentialHelp =
    "Credentials are read from the environment only: OPENAI_API_KEY (openai), ANTHROPIC_API_KEY (anthropic), "
    "or the variable named by --credential-env.";

// Connection flags shared by the commands that talk to a model.
struct ProviderFlags {
    std::string provider = "replay";
    std::string endpoint;
    std::string credential_env;
    std::string archive;

    void add(CLI::App& app) {
        app.add_option("--provider", provider, "Model provider")->check(CLI::IsMember(kProviders));
        app.add_option("--endpoint", endpoint, "Chat-completions URL for HTTP providers");
        app.add_option("--credential-env", credential_env, "Environment variable holding the API key");
        app.add_option("--archive", archive,
                       "Replay archive to read (replay) or to record into (HTTP providers)");
    }

    harness::ProviderConfig config(const std::string& model) const {
        harness::ProviderConfig c;
        c.provider = provider;
        c.model = model;
        c.credential_env = credential_env;
        c.endpoint = provider == "replay" ? archive : endpoint;
        if (provider == "replay" && archive.empty()) throw CLI::ValidationError("--archive", "replay needs --archive");
        return c;
    }
};

// Owns a provider plus the optional recorder wrapped around it.
struct ProviderHandle {
    std::unique_ptr<harness::ChatProvider> base;
    std::unique_ptr<harness::RecordingProvider> recorder;
    harness::ChatProvider& get() { return recorder ? *recorder : *base; }
};

ProviderHandle open_provider(const ProviderFlags& flags, const harness::ProviderConfig& config) {
    ProviderHandle h;
    h.base = harness::make_provider(config);
    if (flags.provider != "replay" && !flags.archive.empty())
        h.recorder = std::make_unique<harness::RecordingProvider>(*h.base, flags.archive);
    return h;
}

void write_table(const std::string& dir, const std::string& stem, const eval::TextTable& table) {
    write_text_file((fs::path(dir) / (stem + ".md")).string(), eval::render_markdown(table));
    write_text_file((fs::path(dir) / (stem + ".csv")).string(), eval::render_csv(table));
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::size_t schemas = 5;
    std::uint64_t seed = 42;
    std::string generator = "template";
    std::string judge = "keyword";
    std::size_t variants = 1;
    std::size_t concurrency = 4;
    std::vector<std::string> domains;
    std::string model;
    std::string out;
    ProviderFlags provider;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    bench::GenerateOptions opt;
    opt.schemas = a.schemas;
    opt.seed = a.seed;
    opt.variants = a.variants;
    opt.concurrency = a.concurrency;
    opt.domains = a.domains;

    ProviderHandle handle;
    std::unique_ptr<harness::ProviderTextGenerator> text;
    std::unique_ptr<bench::LlmCommandGenerator> commands;
    std::unique_ptr<bench::ReflexionJudge> judge;
    if (a.generator == "llm" || a.judge == "llm") {
        if (a.model.empty()) throw CLI::ValidationError("--model", "the llm generator needs --model");
        handle = open_provider(a.provider, a.provider.config(a.model));
        text = std::make_unique<harness::ProviderTextGenerator>(handle.get());
    }
    if (a.generator == "llm") {
        commands = std::make_unique<bench::LlmCommandGenerator>(*text);
        opt.commands = commands.get();
        opt.schema_generator = text.get();
    }
    if (a.judge == "llm") judge = std::make_unique<bench::LlmJudge>(*text);
    else judge = std::make_unique<bench::KeywordJudge>();
    opt.judge = judge.get();

    const auto bench_out = bench::generate_benchmark(opt);
    bench::write_benchmark(bench_out, a.out);

    std::map<std::string, std::array<std::size_t, 3>> buckets;
    for (const auto& r : bench_out.dataset.records)
        ++buckets[r.schema_ref][static_cast<std::size_t>(complexity(r.combination))];
    std::size_t rejected = 0;
    for (const auto& v : bench_out.verdicts) rejected += v.verdict.approved ? 0 : 1;

    eval::TextTable t;
    t.title = "Generated records";
    t.header = {"Schema", "Records", "Simple", "Moderate", "Complex"};
    for (const auto& u : bench_out.dataset.use_cases) {
        const auto& b = buckets[u.name];
        t.rows.push_back({u.name, std::to_string(b[0] + b[1] + b[2]), std::to_string(b[0]), std::to_string(b[1]),
                          std::to_string(b[2])});
    }
    out << eval::render_markdown(t);
    out << "records: " << bench_out.dataset.records.size() << "\n"
        << "rejected by reflexion: " << rejected << "\n"
        << "written to " << a.out << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
    std::string dataset;
    std::vector<std::string> models;
    std::string mode = "unified";
    std::string out;
    std::uint64_t seed = 42;
    std::size_t concurrency = 4;
    int attempts = 3;
    std::size_t abort_after = 5;
    std::optional<double> temperature;
    std::optional<double> input_price;
    std::optional<double> output_price;
    std::size_t budget = kDefaultToolBudget;
    ProviderFlags provider;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    const Dataset dataset = load_dataset_dir(a.dataset);
    const auto mode = harness::ModeFlags::from(*harness::parse_mode(a.mode));
    mode.check();

    harness::CostLedger ledger;
    eval::TextTable summary;
    summary.title = "Run";
    summary.header = {"Model", "Records", "Tool calls", "No tool", "Malformed", "Mean calls"};
    for (const auto& model : a.models) {
        auto config = a.provider.config(model);
        config.mode = mode;
        config.max_in_flight = a.concurrency;
        config.max_attempts = a.attempts;
        config.abort_after = a.abort_after;
        config.temperature = a.temperature;
        config.description_budget = a.budget;
        if (a.input_price || a.output_price) {
            config.pricing = harness::Pricing::per_million(a.input_price.value_or(0), a.output_price.value_or(0));
        } else if (const auto* p = harness::find_pricing(model)) {
            config.pricing = p->pricing;
        } else {
            err << "warning: no pricing known for '" << model << "'; costs are reported as zero\n";
        }

        const std::string started = harness::utc_timestamp();
        auto handle = open_provider(a.provider, config);
        auto result = harness::run_benchmark(dataset, handle.get(), config);
        const std::string finished = harness::utc_timestamp();

        const std::string slug = model_slug(model);
        write_text_file((fs::path(a.out) / "outcomes" / (slug + ".jsonl")).string(),
                        harness::outcomes_jsonl(result.outcomes));
        write_text_file((fs::path(a.out) / "metadata" / (slug + ".json")).string(),
                        harness::run_metadata(config, a.seed, a.dataset, started, finished, result.outcomes.size())
                                .dump(2) + "\n");
        std::size_t calls = 0, none = 0, bad = 0;
        for (const auto& o : result.outcomes) {
            if (o.kind == eval::Prediction::Kind::ToolCall) ++calls;
            else if (o.kind == eval::Prediction::Kind::NoTool) ++none;
            else ++bad;
        }
        summary.rows.push_back({model, std::to_string(result.outcomes.size()), std::to_string(calls),
                                std::to_string(none), std::to_string(bad), eval::format_fixed(result.mean_calls, 2)});
        for (const auto& e : result.ledger.entries()) ledger.add(e.model, e.usage, e.pricing);
    }
    write_table(a.out, "cost", ledger.table());
    write_text_file((fs::path(a.out) / "cost.json").string(), ledger.to_json().dump(2) + "\n");
    out << eval::render_markdown(summary) << "\n" << eval::render_markdown(ledger.table());
    return kOk;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
    std::string dataset;
    std::vector<std::string> outcomes;
    std::string out;
    std::string judgments;
    std::string judge_model = "judge";
    bool strict_text = false;
    ProviderFlags judge;
    bool use_judge = false;
};

std::vector<std::string> outcome_files(const std::vector<std::string>& inputs) {
    std::vector<std::string> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && e.path().extension() == ".jsonl") found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(in);
        }
    }
    return files;
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
    const Dataset dataset = load_dataset_dir(a.dataset);
    std::vector<harness::PredictionOutcome> predictions;
    for (const auto& f : outcome_files(a.outcomes)) {
        auto part = harness::read_outcomes_jsonl(read_text_file(f));
        predictions.insert(predictions.end(), part.begin(), part.end());
    }
    if (predictions.empty()) throw Error("no outcomes to score");

    eval::CompareOptions opts;
    opts.strict_text = a.strict_text;
    std::vector<eval::EvalOutcome> scored;
    std::set<std::string> models;
    for (const auto& p : predictions) {
        const DatasetRecord* rec = dataset.find(p.record_id);
        if (!rec) throw MissingRecord(p.record_id);
        scored.push_back(harness::score_parallel(p, *rec, opts));
        models.insert(p.model);
    }
    auto reports = eval::build_reports(scored, dataset.records);

    std::vector<harness::Judgment> judgments;
    if (!a.judgments.empty()) {
        judgments = harness::read_judgments_jsonl(read_text_file(a.judgments));
    } else if (a.use_judge && models.size() >= 2) {
        auto handle = open_provider(a.judge, a.judge.config(a.judge_model));
        std::map<std::string, std::vector<harness::PredictionOutcome>> by_record;
        for (const auto& p : predictions) by_record[p.record_id].push_back(p);
        for (const auto& [id, per_model] : by_record) {
            if (per_model.size() < 2) continue;
            const DatasetRecord& rec = *dataset.find(id);
            judgments.push_back(
                harness::judge_predictions(rec, dataset.use_case(rec.schema_ref), per_model, handle.get()));
        }
        write_text_file((fs::path(a.out) / "judgments.jsonl").string(), harness::judgments_jsonl(judgments));
    }
    if (!judgments.empty())
        reports.preference = eval::preference_score(harness::rank_lists(judgments), int(models.size()));

    std::vector<std::pair<std::string, eval::TextTable>> tables{
        {"leaderboard", eval::leaderboard_table(reports)},
        {"components", eval::component_table(reports)},
        {"per_schema", eval::per_schema_table(reports)},
        {"no_tool", eval::no_tool_table(reports)},
    };
    if (!reports.preference.empty()) tables.emplace_back("preference", eval::preference_table(reports));
    tables.emplace_back("rankings", eval::rankings_table(reports));

    std::string all;
    for (const auto& [stem, table] : tables) {
        write_table(a.out, stem, table);
        all += eval::render_markdown(table) + "\n";
    }
    write_text_file((fs::path(a.out) / "report.md").string(), all);
    write_text_file((fs::path(a.out) / "report.html").string(), eval::render_html(reports, scored, dataset.records));
    write_text_file((fs::path(a.out) / "outcomes.csv").string(), eval::outcomes_csv(scored));
    out << all;
    return kOk;
}

// ---------------------------------------------------------------------------

struct DemoArgs {
    std::string schema = "restaurants";
    std::uint64_t seed = 42;
    std::size_t rows = 50;
    std::string query;
    std::string query_file;
    std::string combination;
};

UseCase demo_use_case(const std::string& schema) {
    if (fs::exists(schema)) return load_use_case_file(schema);
    if (const auto* d = find_builtin_domain(schema)) return d->use_case;
    throw Error("unknown schema '" + schema + "': not a file and not a built-in domain");
}

int cmd_demo(const DemoArgs& a, std::ostream& out, std::ostream& err) {
    const UseCase uc = demo_use_case(a.schema);
    QueryRequest q;
    if (!a.query.empty()) {
        q = parse_query(a.query);
    } else if (!a.query_file.empty()) {
        q = parse_query(read_text_file(a.query_file));
    } else {
        const std::string wanted = a.combination.empty() ? "0-none-int-0" : a.combination;
        std::optional<CombinationId> combo;
        for (const auto& c : bench::enumerate_combinations())
            if (to_string(c) == wanted) combo = c;
        if (!combo) throw CLI::ValidationError("--combination", "unknown combination '" + wanted + "'");
        q = bench::instantiate_ground_truth(*combo, uc, a.seed, &catalog_for(uc));
    }
    out << "query: " << serialize(canonicalize(q)) << "\n";
    const auto v = validate(q, uc);
    if (!v.ok()) {
        err << "invalid query:\n" << v.summary() << "\n";
        return kDataError;
    }
    const auto db = engine::seed_database(uc, a.seed, a.rows);
    const auto result = engine::execute(*v.validated, db);
    out << "result:\n" << engine::to_json(result, v.validated->collection()).dump(2) << "\n";
    try {
        const std::string sql = engine::compile_to_sql(*v.validated);
        out << "sql: " << sql << "\n";
    } catch (const SearchNotCompilable& e) {
        out << "sql: not compilable (" << e.what() << ")\n";
    } catch (const UnsupportedMetricForDialect& e) {
        out << "sql: not compilable (" << e.what() << ")\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct CostArgs {
    std::uint64_t input_tokens = 245'000;
    std::uint64_t output_tokens = 140'000;
    std::vector<std::string> models;
    std::string format = "md";
};

int cmd_cost(const CostArgs& a, std::ostream& out) {
    harness::CostLedger ledger;
    std::vector<std::string> notes;
    auto add = [&](const harness::PricingEntry& p) {
        ledger.add(p.model, {a.input_tokens, a.output_tokens}, p.pricing);
        if (!p.note.empty()) notes.push_back(p.model + ": " + p.note);
    };
    if (a.models.empty()) {
        for (const auto& p : harness::pricing_registry()) add(p);
    } else {
        for (const auto& m : a.models) {
            const auto* p = harness::find_pricing(m);
            if (!p) throw Error("no pricing known for '" + m + "'");
            add(*p);
        }
    }
    if (a.format == "json") out << ledger.to_json().dump(2) << "\n";
    else if (a.format == "csv") out << eval::render_csv(ledger.table());
    else out << eval::render_markdown(ledger.table());
    if (a.format == "md")
        for (const auto& n : notes) out << "\nnote: " << n << "\n";
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Benchmark for database query function calling"};
    app.require_subcommand(1);
    app.footer(kCredentialHelp);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate use-case schemas and benchmark records");
    g->add_option("--schemas", gen.schemas, "Number of use cases")->check(CLI::PositiveNumber);
    g->add_option("--seed", gen.seed, "Seed for every random choice");
    g->add_option("--generator", gen.generator, "Command generator")->check(CLI::IsMember({"template", "llm"}));
    g->add_option("--judge", gen.judge, "Reflexion judge")->check(CLI::IsMember({"keyword", "llm"}));
    g->add_option("--variants", gen.variants, "Commands per combination")->check(CLI::PositiveNumber);
    g->add_option("--concurrency", gen.concurrency, "Parallel generation workers")->check(CLI::PositiveNumber);
    g->add_option("--domains", gen.domains, "Domain hints, one use case each");
    g->add_option("--model", gen.model, "Model for --generator llm / --judge llm");
    g->add_option("--out", gen.out, "Output dataset directory")->required();
    gen.provider.add(*g);

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run models over a dataset");
    r->add_option("--dataset", run.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    r->add_option("--model", run.models, "Model name (repeatable)")->required();
    r->add_option("--mode", run.mode, "Evaluation mode")->check(CLI::IsMember(kModes));
    r->add_option("--out", run.out, "Run output directory")->required();
    r->add_option("--seed", run.seed, "Seed recorded in run metadata");
    r->add_option("--concurrency", run.concurrency, "Requests in flight")->check(CLI::PositiveNumber);
    r->add_option("--attempts", run.attempts, "Attempts per request on transport errors")->check(CLI::PositiveNumber);
    r->add_option("--abort-after", run.abort_after, "Stop after this many failed requests (0: never)");
    r->add_option("--temperature", run.temperature, "Sampling temperature (default: provider default)");
    r->add_option("--input-price", run.input_price, "Override input price, $ per 1M tokens");
    r->add_option("--output-price", run.output_price, "Override output price, $ per 1M tokens");
    r->add_option("--budget", run.budget, "Token budget for tool descriptions")->check(CLI::PositiveNumber);
    run.provider.add(*r);

    ScoreArgs score;
    auto* s = app.add_subcommand("score", "Score outcomes and write reports");
    s->add_option("--dataset", score.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    s->add_option("--outcomes", score.outcomes, "Outcome files or directories")->required()->check(CLI::ExistingPath);
    s->add_option("--out", score.out, "Report directory")->required();
    s->add_option("--judgments", score.judgments, "Precomputed judgments (JSONL)")->check(CLI::ExistingFile);
    auto* judge_flag = s->add_option("--judge", score.judge.provider, "Provider for preference judging")
                           ->check(CLI::IsMember(kProviders));
    s->add_option("--judge-model", score.judge_model, "Judge model name");
    s->add_option("--judge-archive", score.judge.archive, "Judge replay archive, or where to record judge replies");
    s->add_option("--judge-endpoint", score.judge.endpoint, "Judge chat-completions URL");
    s->add_option("--judge-credential-env", score.judge.credential_env, "Judge API key variable");
    s->add_flag("--strict-text", score.strict_text, "Exact match compares text values case-sensitively");

    DemoArgs demo;
    auto* d = app.add_subcommand("demo", "Execute one query over seeded data");
    d->add_option("--schema", demo.schema, "Built-in domain or schema file");
    d->add_option("--seed", demo.seed, "Seed for the synthetic rows");
    d->add_option("--rows", demo.rows, "Rows per collection")->check(CLI::PositiveNumber);
    d->add_option("--query", demo.query, "Query as JSON arguments");
    d->add_option("--query-file", demo.query_file, "File holding the query JSON")->check(CLI::ExistingFile);
    d->add_option("--combination", demo.combination, "Instantiate a ground truth, e.g. 1-int-none-0");

    CostArgs cost;
    auto* c = app.add_subcommand("cost", "Price token usage with the pricing registry");
    c->add_option("--input-tokens", cost.input_tokens, "Input tokens");
    c->add_option("--output-tokens", cost.output_tokens, "Output tokens");
    c->add_option("--model", cost.models, "Models to price (default: all)");
    c->add_option("--format", cost.format, "Output format")->check(CLI::IsMember({"md", "csv", "json"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    score.use_judge = judge_flag->count() > 0;

    try {
        if (*g) return cmd_generate(gen, out);
        if (*r) return cmd_run(run, out, err);
        if (*s) return cmd_score(score, out);
        if (*d) return cmd_demo(demo, out, err);
        if (*c) return cmd_cost(cost, out);
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ProviderError& e) {
        err << "provider error: " << e.what() << "\n";
        return kProviderError;
    } catch (const TransportError& e) {
        err << "provider error: " << e.what() << "\n";
        return kProviderError;
    } catch (const GeneratorFailure& e) {
        err << "generation failed: " << e.what() << "\n";
        return kProviderError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}

}  // namespace dbgorilla::cli
