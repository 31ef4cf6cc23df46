#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dbgorilla/catalog.hpp"
#include "dbgorilla/dataset.hpp"
#include "dbgorilla/query.hpp"
#include "dbgorilla/schema.hpp"

namespace dbgorilla::bench {

// The 63 non-empty points of {0,1} x {none,int,text,bool}^2 x {0,1}, in
// lexicographic tuple order.
const std::vector<CombinationId>& enumerate_combinations();
// Position in enumerate_combinations(). Throws DegenerateQuery for the empty id.
std::size_t combination_index(const CombinationId& id);

// Deterministic in (combo, use case name, seed). The target collection
// rotates with the combination index and the seed.
QueryRequest instantiate_ground_truth(const CombinationId& combo, const UseCase& use_case, std::uint64_t seed,
                                      const ValueCatalog* catalog = nullptr);

// Plain prompt-in, text-out model access, so this module never depends on a
// particular provider implementation.
class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    // Throws GeneratorFailure.
    virtual std::string generate(const std::string& system, const std::string& prompt) = 0;
};

struct CommandRequest {
    const UseCase* use_case = nullptr;
    QueryRequest ground_truth;
    CombinationId combination;
    // Distinguishes phrasings when several commands share one ground truth.
    std::uint64_t seed = 0;
};

class CommandGenerator {
public:
    virtual ~CommandGenerator() = default;
    // Non-empty command. Throws GeneratorFailure.
    virtual std::string generate(const CommandRequest& request) = 0;
};

// Rule-based English phrasing; every operator in the query gets an explicit
// cue. Deterministic per (request, seed).
class TemplateCommandGenerator final : public CommandGenerator {
public:
    std::string generate(const CommandRequest& request) override;
};

// Self-Instruct style prompt; retries empty or unusable output.
class LlmCommandGenerator final : public CommandGenerator {
public:
    explicit LlmCommandGenerator(TextGenerator& llm, int max_attempts = 3) : llm_(llm), max_attempts_(max_attempts) {}
    std::string generate(const CommandRequest& request) override;

    static std::string prompt_for(const CommandRequest& request);

private:
    TextGenerator& llm_;
    int max_attempts_;
};

struct GenerationVerdict {
    bool approved = true;
    std::string critique;
    std::optional<std::string> corrected_command;
    bool operator==(const GenerationVerdict&) const = default;
};

class ReflexionJudge {
public:
    virtual ~ReflexionJudge() = default;
    virtual GenerationVerdict check(const DatasetRecord& record, const UseCase& use_case) = 0;
};

// Offline judge: checks that the command carries a cue for every operator
// in the combination (search topic, filter property and value, metric,
// grouping). Never proposes corrections.
class KeywordJudge final : public ReflexionJudge {
public:
    GenerationVerdict check(const DatasetRecord& record, const UseCase& use_case) override;
};

// Model-backed judge expecting {"approved", "critique", "corrected_command"}.
class LlmJudge final : public ReflexionJudge {
public:
    explicit LlmJudge(TextGenerator& llm, int max_attempts = 3) : llm_(llm), max_attempts_(max_attempts) {}
    GenerationVerdict check(const DatasetRecord& record, const UseCase& use_case) override;

    static std::string prompt_for(const DatasetRecord& record, const UseCase& use_case);

private:
    TextGenerator& llm_;
    int max_attempts_;
};

// Runs the judge and applies a correction when one is offered for a
// rejected command. Throws GeneratorFailure.
GenerationVerdict reflexion_check(DatasetRecord& record, const UseCase& use_case, ReflexionJudge& judge);

// Without a generator: the matching built-in domain when the profile is the
// default one, otherwise a deterministic placeholder schema. With one: asks
// the model for a schema document and retries rejected output, feeding the
// diagnostics back. Throws GeneratorFailure or the last SchemaViolation.
UseCase generate_use_case(const PropertyProfile& profile, const std::string& domain_hint,
                          TextGenerator* generator = nullptr, int max_attempts = 3);
UseCase placeholder_use_case(const PropertyProfile& profile, const std::string& domain_hint);

struct GenerateOptions {
    // Domain hints, one use case each. Empty: the first `schemas` built-ins.
    std::vector<std::string> domains;
    std::size_t schemas = 5;
    std::uint64_t seed = 42;
    std::size_t variants = 1;
    std::size_t concurrency = 4;
    PropertyProfile profile;
    CommandGenerator* commands = nullptr;  // null: template generator
    ReflexionJudge* judge = nullptr;       // null: keyword judge
    TextGenerator* schema_generator = nullptr;
};

struct VerdictEntry {
    std::string record_id;
    GenerationVerdict verdict;
};

struct GeneratedBenchmark {
    Dataset dataset;
    std::vector<VerdictEntry> verdicts;
};

// Records ordered by (use case, combination, variant). Ids are
// "<schema>-NN" (1-based combination index), with "-vK" appended when
// variants > 1.
GeneratedBenchmark generate_benchmark(const GenerateOptions& options);

void write_verdicts(const std::vector<VerdictEntry>& verdicts, std::ostream& out);
std::vector<VerdictEntry> read_verdicts(std::istream& in);

// Writes the dataset directory plus verdicts.jsonl.
void write_benchmark(const GeneratedBenchmark& benchmark, const std::string& dir);

// "averageRating" -> "average rating", "ArtPieces" -> "art pieces".
std::string humanize(std::string_view identifier);

}  // namespace dbgorilla::bench
