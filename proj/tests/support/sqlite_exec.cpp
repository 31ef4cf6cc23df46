#include "sqlite_exec.hpp"

#include <stdexcept>

namespace sqlexec {

using namespace dbgorilla;
using engine::AggregateValue;
using engine::Row;
using engine::Value;

namespace {

std::string quoted(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

struct Statement {
    sqlite3_stmt* stmt = nullptr;
    Statement(sqlite3* db, const std::string& sql) {
        if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
            throw std::runtime_error("sqlite prepare failed: " + std::string(sqlite3_errmsg(db)) + "\n" + sql);
    }
    ~Statement() { sqlite3_finalize(stmt); }
};

Value read_value(sqlite3_stmt* st, int col, DataType type) {
    switch (type) {
        case DataType::Number: return sqlite3_column_double(st, col);
        case DataType::Boolean: return sqlite3_column_int64(st, col) != 0;
        case DataType::Text: {
            const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(st, col));
            return std::string(p ? p : "", static_cast<std::size_t>(sqlite3_column_bytes(st, col)));
        }
    }
    return 0.0;
}

const PropertySchema& property(const CollectionSchema& s, const std::string& name) {
    for (const auto& p : s.properties)
        if (p.name == name) return p;
    throw std::runtime_error("no property " + name);
}

enum class Shape { Rows, Count, Number, Percentage, Top };

Shape shape_of(const QueryRequest& q) {
    if (const auto& a = q.integer_property_aggregation)
        return a->metric == IntMetric::Count ? Shape::Count : Shape::Number;
    if (const auto& a = q.text_property_aggregation)
        return a->metric == TextMetric::Count ? Shape::Count : Shape::Top;
    if (const auto& a = q.boolean_property_aggregation) {
        switch (a->metric) {
            case BoolMetric::PercentageTrue:
            case BoolMetric::PercentageFalse: return Shape::Percentage;
            default: return Shape::Count;
        }
    }
    return Shape::Rows;
}

// Reads one scalar; nullopt for SQL NULL.
std::optional<AggregateValue> scalar(sqlite3_stmt* st, int col, Shape shape) {
    if (sqlite3_column_type(st, col) == SQLITE_NULL) return std::nullopt;
    switch (shape) {
        case Shape::Count: return AggregateValue::of_count(static_cast<std::uint64_t>(sqlite3_column_int64(st, col)));
        case Shape::Number: return AggregateValue::of_number(sqlite3_column_double(st, col));
        case Shape::Percentage: return AggregateValue::of_percentage(sqlite3_column_double(st, col));
        default: break;
    }
    throw std::logic_error("not a scalar shape");
}

}  // namespace

Database::Database() {
    if (sqlite3_open(":memory:", &db_) != SQLITE_OK) throw std::runtime_error("cannot open sqlite");
    exec("PRAGMA case_sensitive_like = ON");
}

Database::~Database() { sqlite3_close(db_); }

void Database::exec(const std::string& sql) {
    char* msg = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &msg) != SQLITE_OK) {
        std::string m = msg ? msg : "?";
        sqlite3_free(msg);
        throw std::runtime_error("sqlite: " + m + "\n" + sql);
    }
}

void Database::load(const engine::Table& table) {
    const auto& s = table.schema;
    exec("DROP TABLE IF EXISTS " + quoted(s.name));
    std::string create = "CREATE TABLE " + quoted(s.name) + " (";
    std::string insert = "INSERT INTO " + quoted(s.name) + " VALUES (";
    for (std::size_t i = 0; i < s.properties.size(); ++i) {
        const auto& p = s.properties[i];
        const char* type = p.data_type == DataType::Number ? "REAL" : p.data_type == DataType::Text ? "TEXT" : "INTEGER";
        create += (i ? ", " : "") + quoted(p.name) + " " + type;
        insert += i ? ", ?" : "?";
    }
    exec(create + ")");
    exec("BEGIN");
    Statement ins(db_, insert + ")");
    for (const auto& row : table.rows) {
        sqlite3_reset(ins.stmt);
        for (std::size_t i = 0; i < row.size(); ++i) {
            const int idx = int(i) + 1;
            if (const auto* d = std::get_if<double>(&row[i])) sqlite3_bind_double(ins.stmt, idx, *d);
            else if (const auto* b = std::get_if<bool>(&row[i])) sqlite3_bind_int(ins.stmt, idx, *b ? 1 : 0);
            else {
                const auto& t = std::get<std::string>(row[i]);
                sqlite3_bind_text(ins.stmt, idx, t.data(), int(t.size()), SQLITE_TRANSIENT);
            }
        }
        if (sqlite3_step(ins.stmt) != SQLITE_DONE) throw std::runtime_error("sqlite insert failed");
    }
    exec("COMMIT");
}

oracle::Answer Database::run(const std::string& sql, const QueryRequest& q, const CollectionSchema& schema) {
    Statement st(db_, sql);
    const Shape shape = shape_of(q);
    const bool grouped = q.groupby_property.has_value();
    const DataType key_type = grouped ? property(schema, *q.groupby_property).data_type : DataType::Text;

    oracle::Answer out;
    std::vector<Row> rows;
    std::vector<engine::Group> groups;
    engine::TopOccurrences top;
    std::optional<AggregateValue> single;

    auto group_for = [&](const Value& key) -> engine::Group& {
        if (groups.empty() || !(groups.back().key == key)) {
            engine::Group g{key, {}};
            if (shape == Shape::Rows) g.result = std::vector<Row>{};
            if (shape == Shape::Top) g.result = engine::TopOccurrences{};
            groups.push_back(std::move(g));
        }
        return groups.back();
    };

    int rc;
    while ((rc = sqlite3_step(st.stmt)) == SQLITE_ROW) {
        if (shape == Shape::Rows) {
            Row r;
            for (std::size_t i = 0; i < schema.properties.size(); ++i)
                r.push_back(read_value(st.stmt, int(i), schema.properties[i].data_type));
            if (!grouped) {
                rows.push_back(std::move(r));
            } else {
                const std::size_t k = *schema.index_of(*q.groupby_property);
                std::get<std::vector<Row>>(group_for(r[k]).result).push_back(r);
            }
            continue;
        }
        if (shape == Shape::Top) {
            const int base = grouped ? 1 : 0;
            engine::TopOccurrence t{std::get<std::string>(read_value(st.stmt, base, DataType::Text)),
                                    static_cast<std::uint64_t>(sqlite3_column_int64(st.stmt, base + 1))};
            if (!grouped) top.push_back(t);
            else std::get<engine::TopOccurrences>(group_for(read_value(st.stmt, 0, key_type)).result).push_back(t);
            continue;
        }
        if (!grouped) {
            single = scalar(st.stmt, 0, shape);
        } else {
            auto v = scalar(st.stmt, 1, shape);
            if (!v) throw std::runtime_error("NULL aggregate inside a group");
            group_for(read_value(st.stmt, 0, key_type)).result = *v;
        }
    }
    if (rc != SQLITE_DONE) throw std::runtime_error("sqlite step failed: " + std::string(sqlite3_errmsg(db_)));

    if (grouped) {
        out.result.value = std::move(groups);
    } else if (shape == Shape::Rows) {
        out.result.value = std::move(rows);
    } else if (shape == Shape::Top) {
        out.result.value = std::move(top);
    } else if (!single) {
        // NULL or no row at all: the aggregate had nothing to work on.
        out.empty_aggregate = true;
    } else {
        out.result.value = *single;
    }
    return out;
}

}  // namespace sqlexec
