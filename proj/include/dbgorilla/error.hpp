#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace dbgorilla {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes (data errors -> 2, provider errors -> 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class SchemaViolation : public Error {
public:
    SchemaViolation(std::string where, const std::string& what)
        : Error(where + ": " + what), where_(std::move(where)) {}

    // Offending collection (or "collection.property").
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(std::size_t estimated, std::size_t budget)
        : Error("description needs ~" + std::to_string(estimated) +
                " tokens, budget is " + std::to_string(budget)),
          estimated_(estimated), budget_(budget) {}

    std::size_t estimated() const noexcept { return estimated_; }
    std::size_t budget() const noexcept { return budget_; }

private:
    std::size_t estimated_;
    std::size_t budget_;
};

class DegenerateQuery : public Error {
public:
    DegenerateQuery() : Error("query carries no optional arguments") {}
};

class MultipleFiltersPresent : public Error {
public:
    MultipleFiltersPresent() : Error("query carries more than one filter kind") {}
};

class MultipleAggregationsPresent : public Error {
public:
    MultipleAggregationsPresent()
        : Error("query carries more than one aggregation kind") {}
};

class AlreadyPresent : public Error {
public:
    explicit AlreadyPresent(const std::string& param)
        : Error("tool already has parameter '" + param + "'") {}
};

class EmptyAggregate : public Error {
public:
    explicit EmptyAggregate(const std::string& metric)
        : Error(metric + " over zero rows") {}
};

class SearchNotCompilable : public Error {
public:
    SearchNotCompilable() : Error("search_query has no SQL translation") {}
};

class UnsupportedMetricForDialect : public Error {
public:
    explicit UnsupportedMetricForDialect(const std::string& metric)
        : Error("metric " + metric + " is not expressible in the target dialect") {}
};

class RankOutOfRange : public Error {
public:
    RankOutOfRange(int rank, int max_rank)
        : Error("rank " + std::to_string(rank) + " outside 1.." + std::to_string(max_rank)) {}
};

class MissingRecord : public Error {
public:
    explicit MissingRecord(const std::string& record_id)
        : Error("no dataset record with id '" + record_id + "'") {}
};

class GeneratorFailure : public Error {
public:
    using Error::Error;
};

// Retryable: connection failures, timeouts, rate limiting, 5xx.
class TransportError : public Error {
public:
    using Error::Error;
};

// Non-retryable provider failure (bad credentials, 4xx, missing replay entry).
class ProviderError : public Error {
public:
    using Error::Error;
};

class AbortAfterNFailures : public ProviderError {
public:
    explicit AbortAfterNFailures(std::size_t failures)
        : ProviderError("aborting run after " + std::to_string(failures) +
                        " provider failures") {}
};

}  // namespace dbgorilla
