#include "lifebench/store/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lifebench/core/date.hpp"
#include "lifebench/core/num.hpp"
#include "lifebench/core/rng.hpp"
#include "lifebench/lifelog/csv_io.hpp"
#include "lifebench/lifelog/registry.hpp"

namespace lifebench {

namespace {

constexpr const char* kSchemaDdl = R"sql(CREATE TABLE users (
  user_id TEXT PRIMARY KEY
);

CREATE TABLE daily_metrics (
  user_id    TEXT NOT NULL REFERENCES users(user_id),
  domain     TEXT NOT NULL,   -- 'diet' | 'sleep' | 'activity' | 'emotion'
  date       TEXT NOT NULL,   -- ISO-8601 calendar date, e.g. '2021-03-01'
  metric     TEXT NOT NULL,   -- metric registry name, e.g. 'sleep.total_minutes'
  value_num  REAL,            -- set for numeric metrics
  value_text TEXT,            -- set for category metrics
  unit       TEXT NOT NULL,
  PRIMARY KEY (user_id, date, metric)
);

CREATE TABLE events (
  event_id   INTEGER PRIMARY KEY,
  user_id    TEXT NOT NULL REFERENCES users(user_id),
  domain     TEXT NOT NULL,
  date       TEXT NOT NULL,   -- civil date of start_time
  start_time TEXT NOT NULL,   -- ISO-8601 UTC timestamp
  end_time   TEXT,
  metric     TEXT NOT NULL,
  value_num  REAL,
  value_text TEXT,
  unit       TEXT NOT NULL
);

CREATE INDEX idx_daily_user_metric_date ON daily_metrics(user_id, metric, date);
CREATE INDEX idx_daily_metric_date ON daily_metrics(metric, date);
CREATE INDEX idx_events_user_metric_date ON events(user_id, metric, date);
CREATE INDEX idx_events_metric_date ON events(metric, date);
)sql";

void throw_sqlite(sqlite3* db, const std::string& what) {
    throw std::runtime_error(what + ": " + (db ? sqlite3_errmsg(db) : "null db"));
}

void exec_or_throw(sqlite3* db, const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown";
        sqlite3_free(err);
        throw std::runtime_error("sqlite exec failed: " + msg);
    }
}

// Denies everything except reads once the store is frozen.
int readonly_authorizer(void*, int action, const char*, const char*, const char*, const char*) {
    switch (action) {
        case SQLITE_SELECT:
        case SQLITE_READ:
        case SQLITE_FUNCTION:
        case SQLITE_RECURSIVE:
            return SQLITE_OK;
        default:
            return SQLITE_DENY;
    }
}

void freeze(sqlite3* db) {
    exec_or_throw(db, "PRAGMA query_only = ON;");
    sqlite3_set_authorizer(db, readonly_authorizer, nullptr);
}

// Strips leading whitespace and SQL comments; returns offset of first token.
size_t skip_ws_comments(const std::string& s, size_t i) {
    while (i < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        } else if (s[i] == '-' && i + 1 < s.size() && s[i + 1] == '-') {
            while (i < s.size() && s[i] != '\n') ++i;
        } else if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            i += 2;
            while (i + 1 < s.size() && !(s[i] == '*' && s[i + 1] == '/')) ++i;
            i = (i + 1 < s.size()) ? i + 2 : s.size();
        } else {
            break;
        }
    }
    return i;
}

struct TimeoutState {
    std::chrono::steady_clock::time_point deadline;
};

int progress_cb(void* p) {
    auto* st = static_cast<TimeoutState*>(p);
    return std::chrono::steady_clock::now() > st->deadline ? 1 : 0;
}

}  // namespace

const std::string& schema_ddl() {
    static const std::string ddl = kSchemaDdl;
    return ddl;
}

const char* to_string(SqlVerdict v) {
    switch (v) {
        case SqlVerdict::Valid: return "valid";
        case SqlVerdict::NotSelect: return "not_select";
        case SqlVerdict::MultiStatement: return "multi_statement";
        case SqlVerdict::ParseError: return "parse_error";
        case SqlVerdict::ExecError: return "exec_error";
    }
    return "?";
}

SqlDiagnostic validate_sql(const std::string& sql) {
    size_t i = skip_ws_comments(sql, 0);
    if (i >= sql.size()) return {SqlVerdict::NotSelect, "empty statement"};

    // First keyword must be SELECT or WITH (CTEs are read-only here).
    size_t j = i;
    while (j < sql.size() && std::isalpha(static_cast<unsigned char>(sql[j]))) ++j;
    std::string kw = sql.substr(i, j - i);
    std::transform(kw.begin(), kw.end(), kw.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (kw != "SELECT" && kw != "WITH")
        return {SqlVerdict::NotSelect, "first keyword is '" + kw + "'"};

    // Scan for a second statement, respecting quotes and comments.
    bool in_squote = false, in_dquote = false;
    for (size_t k = i; k < sql.size(); ++k) {
        char c = sql[k];
        if (in_squote) {
            if (c == '\'') in_squote = false;
        } else if (in_dquote) {
            if (c == '"') in_dquote = false;
        } else if (c == '\'') {
            in_squote = true;
        } else if (c == '"') {
            in_dquote = true;
        } else if (c == '-' && k + 1 < sql.size() && sql[k + 1] == '-') {
            while (k < sql.size() && sql[k] != '\n') ++k;
        } else if (c == '/' && k + 1 < sql.size() && sql[k + 1] == '*') {
            k = skip_ws_comments(sql, k) - 1;
        } else if (c == ';') {
            if (skip_ws_comments(sql, k + 1) < sql.size())
                return {SqlVerdict::MultiStatement, "content after ';'"};
        }
    }
    return {SqlVerdict::Valid, ""};
}

RelationalStore::~RelationalStore() {
    if (db_) sqlite3_close(db_);
}

RelationalStore::RelationalStore(RelationalStore&& o) noexcept : db_(o.db_) { o.db_ = nullptr; }

RelationalStore& RelationalStore::operator=(RelationalStore&& o) noexcept {
    if (this != &o) {
        if (db_) sqlite3_close(db_);
        db_ = o.db_;
        o.db_ = nullptr;
    }
    return *this;
}

RelationalStore RelationalStore::build(const AlignedDataset& ds, const std::string& path) {
    RelationalStore store;
    if (path != ":memory:") std::remove(path.c_str());  // rebuild from scratch
    if (sqlite3_open_v2(path.c_str(), &store.db_,
                        SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK)
        throw_sqlite(store.db_, "cannot open database");
    sqlite3* db = store.db_;
    exec_or_throw(db, "PRAGMA journal_mode = MEMORY; PRAGMA synchronous = OFF;");
    exec_or_throw(db, kSchemaDdl);
    exec_or_throw(db, "BEGIN;");

    sqlite3_stmt* stmt = nullptr;
    auto prep = [&](const char* sql) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt, nullptr) != SQLITE_OK)
            throw_sqlite(db, "prepare failed");
    };
    auto bind_text = [&](int idx, const std::string& s) {
        sqlite3_bind_text(stmt, idx, s.c_str(), -1, SQLITE_TRANSIENT);
    };
    auto bind_value = [&](int num_idx, const MetricValue& v) {
        if (is_numeric(v)) {
            sqlite3_bind_double(stmt, num_idx, std::get<double>(v));
            sqlite3_bind_null(stmt, num_idx + 1);
        } else {
            sqlite3_bind_null(stmt, num_idx);
            bind_text(num_idx + 1, std::get<std::string>(v));
        }
    };
    auto step_reset = [&] {
        if (sqlite3_step(stmt) != SQLITE_DONE) throw_sqlite(db, "insert failed");
        sqlite3_reset(stmt);
    };

    prep("INSERT INTO users (user_id) VALUES (?);");
    for (const auto& u : ds.users) {
        bind_text(1, u);
        step_reset();
    }
    sqlite3_finalize(stmt);

    prep("INSERT INTO daily_metrics (user_id, domain, date, metric, value_num, value_text, unit)"
         " VALUES (?,?,?,?,?,?,?);");
    for (const auto& r : ds.daily) {
        bind_text(1, r.user);
        bind_text(2, to_string(r.domain));
        bind_text(3, format_date(r.date));
        bind_text(4, r.metric);
        bind_value(5, r.value);
        bind_text(7, r.unit);
        step_reset();
    }
    sqlite3_finalize(stmt);

    prep("INSERT INTO events (user_id, domain, date, start_time, end_time, metric, value_num,"
         " value_text, unit) VALUES (?,?,?,?,?,?,?,?,?);");
    for (const auto& e : ds.events) {
        bind_text(1, e.user);
        bind_text(2, to_string(e.domain));
        bind_text(3, format_date(e.date()));
        bind_text(4, format_timestamp(e.start));
        if (e.end)
            bind_text(5, format_timestamp(*e.end));
        else
            sqlite3_bind_null(stmt, 5);
        bind_text(6, e.metric);
        bind_value(7, e.value);
        bind_text(9, e.unit);
        step_reset();
    }
    sqlite3_finalize(stmt);

    exec_or_throw(db, "COMMIT;");
    freeze(db);
    return store;
}

RelationalStore RelationalStore::open(const std::string& path) {
    RelationalStore store;
    if (sqlite3_open_v2(path.c_str(), &store.db_, SQLITE_OPEN_READONLY | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK)
        throw_sqlite(store.db_, "cannot open database");
    freeze(store.db_);
    return store;
}

ExecResult RelationalStore::execute_select(const std::string& sql,
                                           const ExecLimits& limits) const {
    ExecResult res;
    sqlite3_stmt* stmt = nullptr;
    const char* tail = nullptr;
    if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, &tail) != SQLITE_OK) {
        res.status = ExecStatus::ExecError;
        res.message = sqlite3_errmsg(db_);
        return res;
    }
    if (tail) {
        const std::string rest = tail;
        if (skip_ws_comments(rest, 0) < rest.size()) {
            sqlite3_finalize(stmt);
            res.status = ExecStatus::ExecError;
            res.message = "multiple statements are not allowed";
            return res;
        }
    }
    if (!stmt) {
        res.status = ExecStatus::ExecError;
        res.message = "empty statement";
        return res;
    }

    TimeoutState ts{std::chrono::steady_clock::now() + std::chrono::milliseconds(limits.timeout_ms)};
    sqlite3_progress_handler(db_, 1000, progress_cb, &ts);

    const int ncols = sqlite3_column_count(stmt);
    for (int c = 0; c < ncols; ++c) res.table.columns.push_back(sqlite3_column_name(stmt, c));

    int rc;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
        if (static_cast<int>(res.table.rows.size()) >= limits.max_rows) {
            res.status = ExecStatus::RowLimitExceeded;
            res.message = "row limit " + std::to_string(limits.max_rows) + " exceeded";
            break;
        }
        std::vector<Cell> row;
        row.reserve(ncols);
        for (int c = 0; c < ncols; ++c) {
            switch (sqlite3_column_type(stmt, c)) {
                case SQLITE_NULL:
                    row.emplace_back(std::monostate{});
                    break;
                case SQLITE_INTEGER:
                case SQLITE_FLOAT:
                    row.emplace_back(sqlite3_column_double(stmt, c));
                    break;
                default:
                    row.emplace_back(std::string(
                        reinterpret_cast<const char*>(sqlite3_column_text(stmt, c))));
            }
        }
        res.table.rows.push_back(std::move(row));
    }
    if (rc != SQLITE_DONE && res.status == ExecStatus::Ok) {
        if (rc == SQLITE_INTERRUPT ||
            std::chrono::steady_clock::now() > ts.deadline) {
            res.status = ExecStatus::Timeout;
            res.message = "timeout after " + std::to_string(limits.timeout_ms) + " ms";
        } else {
            res.status = ExecStatus::ExecError;
            res.message = sqlite3_errmsg(db_);
        }
    }
    sqlite3_progress_handler(db_, 0, nullptr, nullptr);
    sqlite3_finalize(stmt);
    return res;
}

std::pair<SqlDiagnostic, ResultTable> RelationalStore::run(const std::string& sql,
                                                           const ExecLimits& limits) const {
    SqlDiagnostic diag = validate_sql(sql);
    if (!diag.valid()) return {diag, {}};
    ExecResult res = execute_select(sql, limits);
    if (!res.ok()) {
        SqlVerdict verdict = SqlVerdict::ExecError;
        if (res.message.find("syntax error") != std::string::npos)
            verdict = SqlVerdict::ParseError;
        return {{verdict, res.message}, {}};
    }
    return {{SqlVerdict::Valid, ""}, std::move(res.table)};
}

std::uint64_t RelationalStore::checksum() const {
    std::uint64_t h = 0;
    for (const char* table : {"users", "daily_metrics", "events"}) {
        ExecResult res =
            execute_select(std::string("SELECT * FROM ") + table, {1000000, 60000});
        if (!res.ok()) throw std::runtime_error("checksum query failed: " + res.message);
        for (const auto& row : res.table.rows) {
            std::uint64_t rh = fnv1a(table);
            for (const auto& cell : row) {
                if (std::holds_alternative<std::monostate>(cell))
                    rh = fnv1a("\x01", rh);
                else if (std::holds_alternative<double>(cell))
                    rh = fnv1a(format_number(std::get<double>(cell)), fnv1a("\x02", rh));
                else
                    rh = fnv1a(std::get<std::string>(cell), fnv1a("\x03", rh));
            }
            h += rh;  // order-insensitive fold
        }
    }
    return h;
}

std::int64_t RelationalStore::row_count(const std::string& table) const {
    ExecResult res = execute_select("SELECT COUNT(*) FROM " + table);
    if (!res.ok() || res.table.rows.size() != 1)
        throw std::runtime_error("row_count failed: " + res.message);
    return static_cast<std::int64_t>(std::get<double>(res.table.rows[0][0]));
}

AlignedDataset dataset_from_store(const RelationalStore& store) {
    ExecLimits limits;
    limits.max_rows = std::numeric_limits<int>::max();
    limits.timeout_ms = 600000;
    auto fetch = [&](const std::string& sql) {
        ExecResult res = store.execute_select(sql, limits);
        if (!res.ok()) throw std::runtime_error("dataset_from_store: " + res.message);
        return std::move(res.table);
    };
    auto text_of = [](const Cell& c, const char* what) {
        const std::string* s = std::get_if<std::string>(&c);
        if (s == nullptr) throw std::runtime_error(std::string("dataset_from_store: bad ") + what);
        return *s;
    };
    auto domain_of = [&](const Cell& c) {
        auto d = domain_from_string(text_of(c, "domain"));
        if (!d) throw std::runtime_error("dataset_from_store: unknown domain");
        return *d;
    };
    auto value_of = [&](const Cell& num, const Cell& text) -> MetricValue {
        if (const double* v = std::get_if<double>(&num)) return *v;
        return text_of(text, "value");
    };

    std::vector<DailyMetric> daily;
    for (const auto& row : fetch("SELECT user_id, domain, date, metric, value_num, value_text, "
                                 "unit FROM daily_metrics")
                               .rows) {
        auto date = parse_date(text_of(row[2], "date"));
        if (!date) throw std::runtime_error("dataset_from_store: bad date");
        daily.push_back({text_of(row[0], "user_id"), domain_of(row[1]), *date,
                         text_of(row[3], "metric"), value_of(row[4], row[5]),
                         text_of(row[6], "unit")});
    }
    std::vector<EventRecord> events;
    for (const auto& row : fetch("SELECT user_id, domain, start_time, end_time, metric, "
                                 "value_num, value_text, unit FROM events")
                               .rows) {
        auto start = parse_timestamp(text_of(row[2], "start_time"));
        if (!start) throw std::runtime_error("dataset_from_store: bad start_time");
        std::optional<std::int64_t> end;
        if (const std::string* e = std::get_if<std::string>(&row[3])) end = parse_timestamp(*e);
        events.push_back({text_of(row[0], "user_id"), domain_of(row[1]), *start, end,
                          text_of(row[4], "metric"), value_of(row[5], row[6]),
                          text_of(row[7], "unit")});
    }
    if (daily.empty() && events.empty())
        throw std::runtime_error("dataset_from_store: the store is empty");
    Date ref{std::numeric_limits<std::int32_t>::min()};
    for (const auto& r : daily) ref = std::max(ref, r.date);
    for (const auto& e : events) ref = std::max(ref, e.date());
    return align(std::move(events), std::move(daily), ref);
}

std::string ResultTable::render_text(size_t max_rows) const {
    std::ostringstream os;
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? " | " : "") << columns[i];
    os << '\n';
    size_t n = std::min(rows.size(), max_rows);
    for (size_t r = 0; r < n; ++r) {
        for (size_t c = 0; c < rows[r].size(); ++c) {
            if (c) os << " | ";
            const Cell& cell = rows[r][c];
            if (std::holds_alternative<std::monostate>(cell))
                os << "NULL";
            else if (std::holds_alternative<double>(cell))
                os << format_number(std::get<double>(cell));
            else
                os << std::get<std::string>(cell);
        }
        os << '\n';
    }
    if (rows.size() > n) os << "... (" << rows.size() - n << " more rows)\n";
    return os.str();
}

}  // namespace lifebench
