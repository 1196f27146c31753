#include <set>
#include <sstream>

#include "doctest.h"
#include "lifebench/baselines/baselines.hpp"
#include "lifebench/lifelog/synth.hpp"

using namespace lifebench;
using namespace lifebench::baselines;
using benchgen::QAInstance;

namespace {

struct Fixture {
    AlignedDataset ds;
    RelationalStore store;
    std::vector<QAInstance> bench;
    Fixture() : ds(make_ds()), store(RelationalStore::build(ds)) {
        benchgen::GenConfig cfg;
        cfg.seed = 21;
        cfg.total = 40;
        cfg.single_count = 24;
        bench = benchgen::generate_benchmark(ds, store, cfg);
    }
    static AlignedDataset make_ds() {
        SynthSpec spec;
        spec.seed = 42;
        spec.n_users = 12;
        spec.n_days = 28;
        return synthesize_dataset(spec);
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

// replies served in call order; lets tests script multi-turn flows without
// committing to exact prompt bytes
struct FixedBackend : llm::Backend {
    std::vector<std::string> replies;
    size_t next = 0;

protected:
    std::string do_complete(const std::vector<llm::ChatMessage>&) override {
        if (next >= replies.size()) throw llm::BackendError("out of scripted replies");
        return replies[next++];
    }
};

}  // namespace

TEST_CASE("cp context contains only the instance's users and window") {
    auto& f = fixture();
    for (const auto& inst : f.bench) {
        CpContext ctx = build_cp_context(inst, f.ds, 1 << 20);
        const std::set<UserId> allowed(inst.user_ids.begin(), inst.user_ids.end());
        const bool multi = allowed.size() > 1;
        std::stringstream ss(ctx.text);
        std::string line;
        while (std::getline(ss, line)) {
            REQUIRE(!line.empty());
            std::string rest = line;
            if (multi) {
                std::string user = line.substr(0, line.find(' '));
                CHECK(allowed.count(user) == 1);
                rest = line.substr(user.size() + 1);
            }
            auto d = parse_date(rest.substr(0, 10));
            REQUIRE(d.has_value());
            CHECK(inst.window.contains(*d));
        }
    }
}

TEST_CASE("cp context truncates oldest records first under a tiny budget") {
    auto& f = fixture();
    // the widest instance available: multi-user with the longest window
    const QAInstance* widest = nullptr;
    for (const auto& inst : f.bench)
        if (inst.scope == benchgen::Scope::MultiUser &&
            (widest == nullptr || inst.window.length() > widest->window.length()))
            widest = &inst;
    REQUIRE(widest != nullptr);

    CpContext full = build_cp_context(*widest, f.ds, 1 << 20);
    CHECK_FALSE(full.truncated);

    CpContext tiny = build_cp_context(*widest, f.ds, 50);
    CHECK(tiny.truncated);
    CHECK(tiny.token_estimate <= 50);
    // the survivors are the newest records
    std::string first_line = tiny.text.substr(0, tiny.text.find('\n'));
    std::string date_part = first_line.substr(widest->user_ids.size() > 1
                                                  ? first_line.find(' ') + 1
                                                  : 0, 10);
    auto d = parse_date(date_part);
    REQUIRE(d.has_value());
    CHECK(*d > widest->window.start);
}

TEST_CASE("run_cp parses a scripted oracle answer") {
    auto& f = fixture();
    // single-user windows comfortably fit the default budget
    const QAInstance* pick = nullptr;
    for (const auto& i : f.bench)
        if (i.scope == benchgen::Scope::SingleUser) {
            pick = &i;
            break;
        }
    REQUIRE(pick != nullptr);
    const auto& inst = *pick;
    llm::ScriptedBackend backend;
    CpContext ctx = build_cp_context(inst, f.ds, 8000);
    backend.add(cp_messages(inst, ctx), "ANSWER: " + qlang::format_answer(inst.ground_truth));

    CpContext seen;
    auto pred = run_cp(inst, f.ds, backend, {}, &seen);
    CHECK_FALSE(seen.truncated);
    REQUIRE(pred.parsed.has_value());
    CHECK(evalkit::score_accuracy(*pred.parsed, inst.ground_truth));
    CHECK_FALSE(pred.dp_diag.has_value());

    auto v = score_prediction(pred, inst, f.ds);
    CHECK(v.acc);
    CHECK_FALSE(v.va.has_value());  // no SQL stage under context prompting
}

TEST_CASE("run_cp folds backend errors into the prediction") {
    auto& f = fixture();
    llm::ScriptedBackend empty;  // every call is a ScriptMiss
    auto pred = run_cp(f.bench.front(), f.ds, empty);
    CHECK_FALSE(pred.parsed.has_value());
    CHECK(pred.parse_error.find("backend error") == 0);
    CHECK_FALSE(score_prediction(pred, f.bench.front(), f.ds).acc);
}

TEST_CASE("run_dp happy path: own SQL then oracle answer scores perfectly") {
    auto& f = fixture();
    const auto before = f.store.checksum();
    int n = 0;
    for (const auto& inst : f.bench) {
        FixedBackend backend;
        backend.replies = {"```sql\n" + inst.sql + "\n```",
                           "ANSWER: " + qlang::format_answer(inst.ground_truth)};
        auto pred = run_dp(inst, f.store, backend);
        auto v = score_prediction(pred, inst, f.ds);
        CHECK(v.acc);
        REQUIRE(v.va.has_value());
        CHECK(*v.va);
        REQUIRE(v.ex.has_value());
        CHECK(*v.ex);
        CHECK(pred.dp_sql == inst.sql);
        ++n;
    }
    CHECK(n == 40);
    CHECK(f.store.checksum() == before);
}

TEST_CASE("run_dp rejects non-SELECT statements and keeps the store intact") {
    auto& f = fixture();
    const auto& inst = f.bench.front();
    const auto before = f.store.checksum();
    FixedBackend backend;
    backend.replies = {"```sql\nDROP TABLE daily_metrics\n```", "ANSWER: 0"};
    auto pred = run_dp(inst, f.store, backend);
    REQUIRE(pred.dp_diag.has_value());
    CHECK_FALSE(pred.dp_diag->valid());
    CHECK_FALSE(pred.dp_result.has_value());
    auto v = score_prediction(pred, inst, f.ds);
    REQUIRE(v.va.has_value());
    CHECK_FALSE(*v.va);
    CHECK_FALSE(v.ex.has_value());  // undefined without a valid execution
    CHECK(f.store.checksum() == before);
    // the best-effort answer was still requested and parsed
    CHECK(pred.raw_text == "ANSWER: 0");
}

TEST_CASE("run_dp marks wrong-evidence queries as va without ex") {
    auto& f = fixture();
    // a numeric single-user instance whose evidence is a specific value
    const QAInstance* target = nullptr;
    for (const auto& inst : f.bench)
        if (inst.answer_type == qlang::AnswerValue::Kind::Number &&
            inst.ground_truth.num > 20.0)
            target = &inst;
    REQUIRE(target != nullptr);
    FixedBackend backend;
    backend.replies = {"```sql\nSELECT -1.0 AS value\n```",
                       "ANSWER: " + qlang::format_answer(target->ground_truth)};
    auto pred = run_dp(*target, f.store, backend);
    auto v = score_prediction(pred, *target, f.ds);
    CHECK(v.acc);  // the model happened to answer correctly anyway
    REQUIRE(v.va.has_value());
    CHECK(*v.va);
    REQUIRE(v.ex.has_value());
    CHECK_FALSE(*v.ex);  // but the executed evidence does not support it
}

TEST_CASE("extract_sql prefers the last fenced block") {
    CHECK(extract_sql("```sql\nSELECT 1\n```") == "SELECT 1");
    CHECK(extract_sql("first\n```\nSELECT 1\n```\nthen\n```sql\nSELECT 2\n```") == "SELECT 2");
    CHECK(extract_sql("SELECT 3") == "SELECT 3");
    CHECK(extract_sql("  SELECT 4\n") == "SELECT 4");
    CHECK(extract_sql("") == "");
}
