#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbgorilla/query.hpp"
#include "dbgorilla/schema.hpp"

namespace dbgorilla {

struct DatasetRecord {
    std::string record_id;
    std::string nl_command;
    QueryRequest ground_truth_query;
    // Name of the use case this record was generated against.
    std::string schema_ref;
    CombinationId combination;

    bool operator==(const DatasetRecord&) const = default;
};

nlohmann::ordered_json to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const nlohmann::ordered_json& doc);

// One JSON object per line.
void write_dataset(const std::vector<DatasetRecord>& records, std::ostream& out);
std::vector<DatasetRecord> read_dataset(std::istream& in);

// A dataset directory: dataset.jsonl plus schemas/<schema_ref>.json.
struct Dataset {
    std::vector<UseCase> use_cases;
    std::vector<DatasetRecord> records;

    const UseCase& use_case(const std::string& name) const;
    const DatasetRecord* find(const std::string& record_id) const;
};

void write_dataset_dir(const Dataset& dataset, const std::string& dir);
// Re-validates every record: the ground truth must validate against its
// schema and carry the recorded combination. Throws ParseError/SchemaViolation.
Dataset load_dataset_dir(const std::string& dir, const PropertyProfile& profile = {});

// Throws SchemaViolation when a record disagrees with its use case.
void check_record(const DatasetRecord& record, const UseCase& use_case);

}  // namespace dbgorilla
