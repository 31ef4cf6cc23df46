#include "dbgorilla/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "dbgorilla/error.hpp"
#include "dbgorilla/io.hpp"

namespace dbgorilla {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

ojson to_json(const DatasetRecord& r) {
    ojson doc;
    doc["record_id"] = r.record_id;
    doc["nl_command"] = r.nl_command;
    doc["ground_truth_query"] = to_json(r.ground_truth_query);
    doc["schema_ref"] = r.schema_ref;
    doc["combination"] = to_json(r.combination);
    return doc;
}

DatasetRecord record_from_json(const ojson& doc) {
    if (!doc.is_object()) throw ParseError("dataset record must be an object");
    auto text = [&](const char* key) {
        auto it = doc.find(key);
        if (it == doc.end() || !it->is_string())
            throw ParseError(std::string("dataset record: '") + key + "' must be a string");
        return it->get<std::string>();
    };
    for (const auto& [key, _] : doc.items())
        if (key != "record_id" && key != "nl_command" && key != "ground_truth_query" && key != "schema_ref" &&
            key != "combination")
            throw ParseError("dataset record: unknown key '" + key + "'");
    DatasetRecord r;
    r.record_id = text("record_id");
    r.nl_command = text("nl_command");
    r.schema_ref = text("schema_ref");
    if (!doc.contains("ground_truth_query")) throw ParseError(r.record_id + ": missing ground_truth_query");
    if (!doc.contains("combination")) throw ParseError(r.record_id + ": missing combination");
    try {
        r.ground_truth_query = query_from_json(doc.at("ground_truth_query"));
        r.combination = combination_from_json(doc.at("combination"));
    } catch (const ParseError& e) {
        throw ParseError(r.record_id + ": " + e.what());
    }
    return r;
}

void write_dataset(const std::vector<DatasetRecord>& records, std::ostream& out) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<DatasetRecord> read_dataset(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    std::vector<DatasetRecord> records;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(ss.str())) {
        ++line_no;
        ojson doc;
        try {
            doc = ojson::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(record_from_json(doc));
    }
    return records;
}

const UseCase& Dataset::use_case(const std::string& name) const {
    for (const auto& u : use_cases)
        if (u.name == name) return u;
    throw ParseError("dataset references unknown schema '" + name + "'");
}

const DatasetRecord* Dataset::find(const std::string& record_id) const {
    for (const auto& r : records)
        if (r.record_id == record_id) return &r;
    return nullptr;
}

void check_record(const DatasetRecord& record, const UseCase& use_case) {
    auto result = validate(record.ground_truth_query, use_case);
    if (!result.ok()) throw SchemaViolation(record.record_id, "ground truth does not validate: " + result.summary());
    CombinationId sig;
    try {
        sig = operator_signature(record.ground_truth_query);
    } catch (const Error& e) {
        throw SchemaViolation(record.record_id, e.what());
    }
    if (sig != record.combination)
        throw SchemaViolation(record.record_id, "ground truth signature " + to_string(sig) +
                                                    " differs from recorded combination " +
                                                    to_string(record.combination));
}

void write_dataset_dir(const Dataset& dataset, const std::string& dir) {
    for (const auto& u : dataset.use_cases)
        write_text_file((fs::path(dir) / "schemas" / (u.name + ".json")).string(), serialize(u));
    std::ostringstream out;
    write_dataset(dataset.records, out);
    write_text_file((fs::path(dir) / "dataset.jsonl").string(), out.str());
}

Dataset load_dataset_dir(const std::string& dir, const PropertyProfile& profile) {
    Dataset dataset;
    const fs::path schemas = fs::path(dir) / "schemas";
    if (!fs::is_directory(schemas)) throw ParseError(dir + ": no schemas/ directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(schemas))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) dataset.use_cases.push_back(load_use_case_file(f.string(), profile));

    std::istringstream in(read_text_file((fs::path(dir) / "dataset.jsonl").string()));
    dataset.records = read_dataset(in);
    std::set<std::string> seen;
    for (const auto& r : dataset.records) {
        if (!seen.insert(r.record_id).second) throw ParseError("duplicate record id '" + r.record_id + "'");
        check_record(r, dataset.use_case(r.schema_ref));
    }
    return dataset;
}

}  // namespace dbgorilla
