// Relational materialization of an AlignedDataset plus a read-only SQL
// sandbox: SELECT-only validation, row/time limits, and table checksums.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lifebench/lifelog/types.hpp"

struct sqlite3;

namespace lifebench {

// One result cell: number, text, or NULL.
using Cell = std::variant<std::monostate, double, std::string>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::string render_text(size_t max_rows = 50) const;  // compact table for prompts
};

enum class SqlVerdict { Valid, NotSelect, MultiStatement, ParseError, ExecError };

const char* to_string(SqlVerdict v);

struct SqlDiagnostic {
    SqlVerdict verdict = SqlVerdict::Valid;
    std::string message;
    bool valid() const { return verdict == SqlVerdict::Valid; }
};

// Statement-shape guard; never touches a database. Valid here means
// "single SELECT/WITH statement", execution can still fail.
SqlDiagnostic validate_sql(const std::string& sql);

enum class ExecStatus { Ok, ExecError, Timeout, RowLimitExceeded };

struct ExecLimits {
    int max_rows = 10000;
    int timeout_ms = 10000;
};

struct ExecResult {
    ExecStatus status = ExecStatus::Ok;
    ResultTable table;
    std::string message;
    bool ok() const { return status == ExecStatus::Ok; }
};

class RelationalStore {
public:
    RelationalStore() = default;
    ~RelationalStore();
    RelationalStore(RelationalStore&&) noexcept;
    RelationalStore& operator=(RelationalStore&&) noexcept;
    RelationalStore(const RelationalStore&) = delete;
    RelationalStore& operator=(const RelationalStore&) = delete;

    // Builds the fixed three-table schema from a dataset. path ":memory:"
    // keeps the store in RAM; otherwise the file is created/overwritten.
    static RelationalStore build(const AlignedDataset& ds, const std::string& path = ":memory:");

    // Opens an existing database file read-only.
    static RelationalStore open(const std::string& path);

    // Executes pre-validated SQL under limits. Callers that skip
    // validate_sql simply get ExecError for invalid input.
    ExecResult execute_select(const std::string& sql, const ExecLimits& limits = {}) const;

    // validate + execute in one step, with exact VA semantics: the returned
    // diagnostic is Valid iff the text is a single SELECT that ran cleanly.
    std::pair<SqlDiagnostic, ResultTable> run(const std::string& sql,
                                              const ExecLimits& limits = {}) const;

    // Order-insensitive content hash over all three tables.
    std::uint64_t checksum() const;

    std::int64_t row_count(const std::string& table) const;

    bool valid() const { return db_ != nullptr; }

private:
    sqlite3* db_ = nullptr;
};

// The published DDL, byte-identical to data/schema.sql (embedded in DP prompts).
const std::string& schema_ddl();

// Rebuilds the aligned dataset from a materialized store. The reference date
// is the span end — the synthesizer's convention. Throws std::runtime_error
// on malformed rows.
AlignedDataset dataset_from_store(const RelationalStore& store);

}  // namespace lifebench
