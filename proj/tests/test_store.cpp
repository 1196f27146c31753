#include <map>

#include "doctest.h"
#include "lifebench/lifelog/synth.hpp"
#include "lifebench/store/store.hpp"

using namespace lifebench;

namespace {

AlignedDataset small_dataset() {
    SynthSpec spec;
    spec.seed = 42;
    spec.n_users = 20;
    spec.n_days = 28;
    return synthesize_dataset(spec);
}

}  // namespace

TEST_CASE("validate_sql statement-shape guard") {
    CHECK(validate_sql("SELECT 1").verdict == SqlVerdict::Valid);
    CHECK(validate_sql("  -- comment\n select * from users").verdict == SqlVerdict::Valid);
    CHECK(validate_sql("WITH t AS (SELECT 1) SELECT * FROM t").verdict == SqlVerdict::Valid);
    CHECK(validate_sql("SELECT 1;").verdict == SqlVerdict::Valid);
    CHECK(validate_sql("SELECT 1; -- trailing comment").verdict == SqlVerdict::Valid);
    CHECK(validate_sql("DELETE FROM events").verdict == SqlVerdict::NotSelect);
    CHECK(validate_sql("DROP TABLE users").verdict == SqlVerdict::NotSelect);
    CHECK(validate_sql("").verdict == SqlVerdict::NotSelect);
    CHECK(validate_sql("/* hi */").verdict == SqlVerdict::NotSelect);
    CHECK(validate_sql("SELECT 1; SELECT 2").verdict == SqlVerdict::MultiStatement);
    CHECK(validate_sql("SELECT 1; DROP TABLE users").verdict == SqlVerdict::MultiStatement);
    // Semicolon inside a string literal is not a statement separator.
    CHECK(validate_sql("SELECT 'a; b'").verdict == SqlVerdict::Valid);
}

TEST_CASE("build_database preserves row counts deterministically") {
    auto ds = small_dataset();
    auto store = RelationalStore::build(ds);
    CHECK(store.row_count("users") == 20);
    CHECK(store.row_count("daily_metrics") == static_cast<std::int64_t>(ds.daily.size()));
    CHECK(store.row_count("events") == static_cast<std::int64_t>(ds.events.size()));

    auto store2 = RelationalStore::build(ds);
    CHECK(store.checksum() == store2.checksum());

    // Empty-event dataset -> events table with 0 rows.
    AlignedDataset tiny;
    tiny.users.insert("u1");
    tiny.daily.push_back({"u1", DomainTag::Sleep, date_from_ymd(2021, 3, 1),
                          "sleep.total_minutes", 400.0, "minutes"});
    tiny.finalize();
    tiny.reference_date = tiny.date_span.end;
    auto tiny_store = RelationalStore::build(tiny);
    CHECK(tiny_store.row_count("events") == 0);
}

TEST_CASE("execute_select basics and error classes") {
    auto ds = small_dataset();
    auto store = RelationalStore::build(ds);

    auto res = store.execute_select("SELECT COUNT(*) FROM users");
    REQUIRE(res.ok());
    CHECK(std::get<double>(res.table.rows[0][0]) == 20.0);

    CHECK(store.execute_select("SELECT * FROM no_such_table").status == ExecStatus::ExecError);

    // Daily sleep query for one user over 7 days: count matches the dataset.
    TimeWindow w{ds.date_span.start, ds.date_span.start + 6};
    auto expect = ds.series("u001", "sleep.total_minutes", w).size();
    auto rows = store.execute_select(
        "SELECT date, value_num FROM daily_metrics WHERE user_id='u001' "
        "AND metric='sleep.total_minutes' AND date BETWEEN '" +
        format_date(w.start) + "' AND '" + format_date(w.end) + "' ORDER BY date");
    REQUIRE(rows.ok());
    CHECK(rows.table.rows.size() == expect);

    // Row limit is its own status.
    auto lim = store.execute_select("SELECT * FROM daily_metrics", {10, 10000});
    CHECK(lim.status == ExecStatus::RowLimitExceeded);
}

TEST_CASE("store is immutable under validate/execute sequences") {
    auto ds = small_dataset();
    auto store = RelationalStore::build(ds);
    auto before = store.checksum();

    const char* attempts[] = {
        "DELETE FROM events",
        "DROP TABLE users",
        "INSERT INTO users VALUES ('evil')",
        "UPDATE daily_metrics SET value_num = 0",
        "SELECT 1; DELETE FROM events",
        "PRAGMA query_only = OFF",
        "CREATE TABLE hack (x)",
    };
    for (const char* sql : attempts) {
        auto [diag, table] = store.run(sql);
        CHECK(!diag.valid());
        // Even bypassing the guard, the engine refuses writes.
        auto forced = store.execute_select(sql);
        CHECK(!forced.ok());
    }
    CHECK(store.checksum() == before);
}

TEST_CASE("run() gives exact VA semantics") {
    auto store = RelationalStore::build(small_dataset());
    CHECK(store.run("SELECT COUNT(*) FROM events").first.valid());
    CHECK(store.run("DELETE FROM events").first.verdict == SqlVerdict::NotSelect);
    CHECK(store.run("SELECT * FROM nope").first.verdict == SqlVerdict::ExecError);
    CHECK(store.run("SELECT FROM WHERE").first.verdict == SqlVerdict::ParseError);
    CHECK(store.run("SELECT 1; SELECT 2").first.verdict == SqlVerdict::MultiStatement);
}

TEST_CASE("schema ddl names the three tables") {
    const auto& ddl = schema_ddl();
    CHECK(ddl.find("CREATE TABLE users") != std::string::npos);
    CHECK(ddl.find("CREATE TABLE daily_metrics") != std::string::npos);
    CHECK(ddl.find("CREATE TABLE events") != std::string::npos);
}
