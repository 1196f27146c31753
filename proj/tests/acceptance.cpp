// End-to-end acceptance suite. Runs the release criteria in order and prints
// one [PASS]/[FAIL] line per criterion; the exit code gates on criteria 1-9.
// Criterion 10 (live-endpoint smoke) runs only when LIFEBENCH_LIVE_BASE_URL
// is set and never affects the exit code.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lifebench/agent/agent.hpp"
#include "lifebench/baselines/baselines.hpp"
#include "lifebench/benchgen/benchgen.hpp"
#include "lifebench/core/num.hpp"
#include "lifebench/lifelog/synth.hpp"
#include "oracle.hpp"
#include "program_sampler.hpp"

using namespace lifebench;

namespace {

bool g_failed = false;

void line(int n, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
    if (!pass) g_failed = true;
}

void skip(int n, const std::string& detail) {
    std::printf("[SKIP] criterion %d: %s\n", n, detail.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string secs(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1fs", s);
    return buf;
}

// replies served in call order, independent of prompt content
struct FixedBackend : llm::Backend {
    std::vector<std::string> replies;
    size_t next = 0;
    explicit FixedBackend(std::vector<std::string> r = {}) : replies(std::move(r)) {}

protected:
    std::string do_complete(const std::vector<llm::ChatMessage>&) override {
        if (next >= replies.size()) throw llm::BackendError("out of scripted replies");
        return replies[next++];
    }
};

struct Ctx {
    AlignedDataset ds;
    RelationalStore store;
    std::vector<benchgen::QAInstance> bench;  // the 5,000-instance benchmark
    std::string bench_jsonl;
};

benchgen::GenConfig config_5k() {
    benchgen::GenConfig cfg;
    cfg.seed = 7;
    cfg.total = 5000;
    cfg.single_count = 2980;
    return cfg;
}

benchgen::GenConfig config_paper_scale() {
    benchgen::GenConfig cfg;
    cfg.seed = 7;
    cfg.total = 22573;
    cfg.single_count = 13452;
    return cfg;
}

int verify_all(const std::vector<benchgen::QAInstance>& bench, const AlignedDataset& ds,
               const RelationalStore& store) {
    int ok = 0;
    for (const auto& inst : bench)
        if (benchgen::verify_instance(inst, ds, store)) ++ok;
    return ok;
}

// --- criterion 1: dual-execution verification at benchmark scale ------------

Ctx criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    SynthSpec spec;
    spec.seed = 42;
    spec.n_users = 20;
    spec.n_days = 28;
    Ctx ctx{synthesize_dataset(spec), {}, {}, {}};
    ctx.store = RelationalStore::build(ctx.ds);
    ctx.bench = benchgen::generate_benchmark(ctx.ds, ctx.store, config_5k());
    ctx.bench_jsonl = benchgen::to_jsonl(ctx.bench);
    const int ok = verify_all(ctx.bench, ctx.ds, ctx.store);
    const double el = seconds_since(t0);
    line(1, ok == 5000 && static_cast<int>(ctx.bench.size()) == 5000 && el < 300.0,
         std::to_string(ok) + "/" + std::to_string(ctx.bench.size()) +
             " instances verified by dual execution in " + secs(el));
    return ctx;
}

// --- criterion 2: interpreter vs brute-force oracle --------------------------

void criterion_2(const Ctx& ctx) {
    std::vector<std::string> users(ctx.ds.users.begin(), ctx.ds.users.end());
    Rng rng(20240817);
    int evaluated = 0, mismatched = 0, error_path_splits = 0;
    for (int t = 0; t < 1300; ++t) {
        auto prog = testing::random_program(rng, users, ctx.ds.date_span.start);
        qlang::AnswerValue a, b;
        bool a_err = false, b_err = false;
        try {
            a = qlang::interpret(*prog, ctx.ds);
        } catch (const qlang::EvalError&) {
            a_err = true;
        }
        try {
            b = testing::oracle_eval(*prog, ctx.ds);
        } catch (const std::runtime_error&) {
            b_err = true;
        }
        if (a_err != b_err) {
            ++error_path_splits;
            continue;
        }
        if (a_err) continue;
        ++evaluated;
        if (!qlang::answers_equal(a, b, 1e-9)) ++mismatched;
    }
    line(2, evaluated >= 1000 && mismatched == 0 && error_path_splits == 0,
         std::to_string(evaluated) + " random programs evaluated, " +
             std::to_string(mismatched) + " interpreter/oracle mismatches, " +
             std::to_string(error_path_splits) + " error-path disagreements");
}

// --- criterion 3: numeric tolerance and cardinality boundaries ---------------

void criterion_3() {
    using qlang::AnswerItem;
    using qlang::AnswerValue;
    bool ok = true;
    ok &= evalkit::number_matches(11.0, 10.0);    // integer gt <= 14: +-1
    ok &= evalkit::number_matches(15.0, 14.0);
    ok &= !evalkit::number_matches(16.0, 15.0);   // 15 falls under the relative rule
    ok &= evalkit::number_matches(201.0, 200.0);  // 0.5% of 200 = 1
    ok &= !evalkit::number_matches(201.5, 200.0);
    const auto gt = AnswerValue::list(
        {AnswerItem::number(1), AnswerItem::number(2), AnswerItem::number(3)});
    const auto short_pred = AnswerValue::list({AnswerItem::number(1), AnswerItem::number(2)});
    ok &= evalkit::score_accuracy(gt, gt);
    ok &= !evalkit::score_accuracy(short_pred, gt);  // cardinality mismatch
    ok &= !evalkit::score_accuracy(
        AnswerValue::pair(AnswerItem::number(1), AnswerItem::number(2)), gt);
    line(3, ok, "tolerance boundaries (10/11, 14/15, 15/16, 200/201, 200/201.5) and "
                "multi-item cardinality rules hold");
}

// --- criterion 4 + 5: paper-scale generation and determinism -----------------

void criteria_4_and_5(const Ctx& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<benchgen::QAInstance> big;
    std::string big_jsonl;
    int single = 0, multi = 0, ok = 0;
    bool generated = false;
    try {
        big = benchgen::generate_benchmark(ctx.ds, ctx.store, config_paper_scale());
        big_jsonl = benchgen::to_jsonl(big);
        generated = true;
        for (const auto& inst : big)
            (inst.scope == benchgen::Scope::SingleUser ? single : multi)++;
        ok = verify_all(big, ctx.ds, ctx.store);
    } catch (const std::exception& e) {
        line(4, false, std::string("generation failed: ") + e.what());
        line(5, false, "skipped (criterion 4 did not produce a benchmark)");
        return;
    }
    const double el = seconds_since(t0);
    line(4, generated && single == 13452 && multi == 9121 && ok == 22573 && el < 1800.0,
         std::to_string(ok) + "/22573 verified with a " + std::to_string(single) + "/" +
             std::to_string(multi) + " single/multi split in " + secs(el));

    const bool small_same =
        benchgen::to_jsonl(benchgen::generate_benchmark(ctx.ds, ctx.store, config_5k())) ==
        ctx.bench_jsonl;
    const bool big_same =
        benchgen::to_jsonl(benchgen::generate_benchmark(ctx.ds, ctx.store,
                                                        config_paper_scale())) == big_jsonl;
    line(5, small_same && big_same,
         std::string("regeneration byte-identical: 5000-instance ") +
             (small_same ? "yes" : "NO") + ", 22573-instance " + (big_same ? "yes" : "NO"));
}

// --- criterion 6: SQL sandbox fuzzing + scripted DP oracle run ----------------

std::vector<std::string> adversarial_sql() {
    const std::vector<std::string> tables = {"daily_metrics", "events", "users",
                                             "sqlite_master", "daily_metrics AS d"};
    std::vector<std::string> out;
    for (const auto& t : tables) {
        out.push_back("DROP TABLE " + t);
        out.push_back("DELETE FROM " + t);
        out.push_back("UPDATE " + t + " SET value = 0");
        out.push_back("INSERT INTO " + t + " VALUES (1)");
        out.push_back("ALTER TABLE " + t + " ADD COLUMN x INT");
        out.push_back("CREATE TABLE x AS SELECT * FROM " + t);
        out.push_back("SELECT * FROM " + t + "; DROP TABLE " + t);
        out.push_back("SELECT * FROM " + t + "; SELECT 1");
        out.push_back("WITH w AS (SELECT 1) INSERT INTO " + t + " SELECT * FROM w");
        out.push_back("REPLACE INTO " + t + " VALUES (1)");
        out.push_back("SELEC value FROM " + t);                 // typo mutation
        out.push_back("SELECT value FROM " + t + " WHERE '");   // unbalanced quote
        out.push_back("SELECT no_such_column FROM " + t);
        out.push_back("SELECT * FROM " + t + " WHERE date > (");
        out.push_back("VACUUM; SELECT * FROM " + t);
    }
    for (int i = 0; i < 25; ++i) {
        out.push_back("PRAGMA writable_schema = " + std::to_string(i % 2));
        out.push_back("ATTACH DATABASE '/tmp/x" + std::to_string(i) + ".db' AS evil");
        out.push_back("BEGIN; DELETE FROM events; COMMIT; -- " + std::to_string(i));
        out.push_back("SELECT load_extension('evil" + std::to_string(i) + "')");
        out.push_back("DETACH DATABASE main; -- " + std::to_string(i));
    }
    out.resize(200);
    return out;
}

void criterion_6(const Ctx& ctx) {
    const auto corpus = adversarial_sql();
    const auto checksum_before = ctx.store.checksum();
    int accepted = 0, va_true = 0;
    const auto& probe = ctx.bench.front();
    for (const auto& sql : corpus) {
        auto [diag, table] = ctx.store.run(sql);
        if (diag.valid()) ++accepted;
        // full DP accounting: the backend emits the adversarial SQL, the
        // verdict must come back with va defined and false
        FixedBackend backend({"```sql\n" + sql + "\n```", "ANSWER: 0"});
        auto pred = baselines::run_dp(probe, ctx.store, backend);
        auto verdict = baselines::score_prediction(pred, probe, ctx.ds);
        if (!verdict.va.has_value() || *verdict.va) ++va_true;
    }
    const bool stable = ctx.store.checksum() == checksum_before;

    // scripted DP over a 100-instance slice: each instance answered with its
    // own verified SQL and ground truth must score 100% on all four metrics
    std::vector<benchgen::QAInstance> slice(ctx.bench.begin(), ctx.bench.begin() + 100);
    llm::ScriptedBackend oracle;
    for (const auto& inst : slice) {
        const std::string sql_reply = "```sql\n" + inst.sql + "\n```";
        oracle.add(baselines::dp_sql_messages(inst), sql_reply);
        auto [diag, table] = ctx.store.run(inst.sql);
        oracle.add(baselines::dp_answer_messages(inst, sql_reply,
                                                 "Query results:\n" + table.render_text()),
                   "ANSWER: " + qlang::format_answer(inst.ground_truth));
    }
    std::vector<evalkit::Verdict> verdicts;
    for (const auto& inst : slice)
        verdicts.push_back(
            baselines::score_prediction(baselines::run_dp(inst, ctx.store, oracle), inst, ctx.ds));
    auto report = evalkit::aggregate_report(verdicts, slice);
    const bool perfect = report.acc_pct == 100.0 && report.va_pct == 100.0 &&
                         report.ex_pct == 100.0 && report.accex_pct == 100.0;

    line(6, stable && accepted == 0 && va_true == 0 && perfect,
         "200 adversarial statements rejected (store checksum stable, all VA=false); "
         "scripted DP oracle run scores Acc=VA=EX=Acc|EX=100%");
}

// --- criterion 7: scripted agent end-to-end -----------------------------------

std::vector<std::string> agent_plan(const benchgen::QAInstance& inst, const AlignedDataset& ds) {
    const UserId user = inst.user_ids.empty() ? *ds.users.begin() : inst.user_ids.front();
    const std::string start = format_date(inst.window.start);
    const std::string end = format_date(inst.window.end);
    return {
        std::string("task: ") + benchgen::to_string(inst.task_type) +
            "\ndomains: all\nwindow: " + start + " " + end +
            "\nanswer: " + qlang::to_string(inst.answer_type),
        "1. retrieve the relevant records | domains: all | granularity: daily",
        "```\nTOOL(retrieve, {\"kind\": \"daily_series\", \"user\": \"" + user +
            "\", \"metric\": \"sleep.total_minutes\", \"start\": \"" + start +
            "\", \"end\": \"" + end + "\", \"stat\": \"count\", \"name\": \"n\"})\n```",
        "```\nTOOL(compute, {\"expression\": \"n * 1\", \"name\": \"check\"})\n```",
        "```\nSTOP\n```",
        "Derived from the retrieved evidence.\nANSWER: " +
            qlang::format_answer(inst.ground_truth),
    };
}

void criterion_7(const Ctx& ctx) {
    // a 200-instance slice covering all five task types and both scopes,
    // filled round-robin across the (task, scope) buckets
    std::map<std::pair<benchgen::TaskType, benchgen::Scope>,
             std::vector<const benchgen::QAInstance*>>
        buckets;
    for (const auto& inst : ctx.bench) buckets[{inst.task_type, inst.scope}].push_back(&inst);
    std::vector<const benchgen::QAInstance*> slice;
    for (size_t round = 0; slice.size() < 200; ++round) {
        bool any = false;
        for (auto& [key, v] : buckets)
            if (round < v.size() && slice.size() < 200) {
                slice.push_back(v[round]);
                any = true;
            }
        if (!any) break;
    }
    std::set<std::string> tasks, scopes;
    int correct = 0, over_budget = 0, replay_diffs = 0;
    const int budget = 12;
    for (size_t i = 0; i < slice.size(); ++i) {
        const auto& inst = *slice[i];
        tasks.insert(benchgen::to_string(inst.task_type));
        scopes.insert(benchgen::to_string(inst.scope));
        FixedBackend backend(agent_plan(inst, ctx.ds));
        auto result = agent::run_agent_on(inst, ctx.ds, ctx.store, backend, budget);
        if (result.backend_calls > budget + 3) ++over_budget;
        if (result.prediction.parsed &&
            evalkit::score_accuracy(*result.prediction.parsed, inst.ground_truth))
            ++correct;
        if (i < 20) {  // replays must be byte-identical
            FixedBackend again(agent_plan(inst, ctx.ds));
            auto replay = agent::run_agent_on(inst, ctx.ds, ctx.store, again, budget);
            if (replay.trace_jsonl() != result.trace_jsonl() ||
                replay.prediction.raw_text != result.prediction.raw_text)
                ++replay_diffs;
        }
    }
    line(7,
         slice.size() == 200 && correct == 200 && over_budget == 0 && replay_diffs == 0 &&
             tasks.size() == 5 && scopes.size() == 2,
         std::to_string(correct) + "/" + std::to_string(slice.size()) +
             " scripted tool-driven runs correct across " + std::to_string(tasks.size()) +
             " task types and " + std::to_string(scopes.size()) +
             " scopes; calls within budget+3; 20 replays byte-identical");
}

// --- criterion 8: context-prompt isolation and truncation ---------------------

void criterion_8(const Ctx& ctx) {
    int scanned = 0, violations = 0;
    for (const auto& inst : ctx.bench) {
        if (scanned == 1000) break;
        ++scanned;
        baselines::CpContext cp = baselines::build_cp_context(inst, ctx.ds, 1 << 20);
        const std::set<UserId> allowed(inst.user_ids.begin(), inst.user_ids.end());
        const bool multi = allowed.size() > 1;
        std::stringstream ss(cp.text);
        std::string record;
        while (std::getline(ss, record)) {
            std::string rest = record;
            if (multi) {
                const std::string user = record.substr(0, record.find(' '));
                if (!allowed.count(user)) ++violations;
                rest = record.substr(user.size() + 1);
            }
            auto d = parse_date(rest.substr(0, 10));
            if (!d || !inst.window.contains(*d)) ++violations;
        }
    }

    int wide = 0, truncated = 0;
    for (const auto& inst : ctx.bench) {
        if (inst.scope != benchgen::Scope::MultiUser || inst.domains.size() != 4) continue;
        ++wide;
        if (baselines::build_cp_context(inst, ctx.ds, 50).truncated) ++truncated;
    }
    line(8, violations == 0 && wide > 0 && truncated == wide,
         std::to_string(scanned) + " prompts scanned with " + std::to_string(violations) +
             " out-of-scope records; tiny budget truncates all " + std::to_string(wide) +
             " multi-user four-domain contexts");
}

// --- criterion 9: weakened backend reproduces the aggregation bottleneck ------

void criterion_9(const Ctx& ctx) {
    // stride-sample so every template block (the file is sorted by
    // instance_id) contributes to the slice
    std::vector<benchgen::QAInstance> slice;
    for (size_t i = 0; i < ctx.bench.size() && slice.size() < 300; i += 16)
        slice.push_back(ctx.bench[i]);
    std::vector<evalkit::Verdict> verdicts;
    for (const auto& inst : slice) {
        const bool weakened = inst.task_type == benchgen::TaskType::AS ||
                              inst.answer_type == qlang::AnswerValue::Kind::Pair ||
                              inst.answer_type == qlang::AnswerValue::Kind::List;
        FixedBackend backend({weakened
                                  ? std::string("The records could not be aggregated.")
                                  : "ANSWER: " + qlang::format_answer(inst.ground_truth)});
        auto pred = baselines::run_cp(inst, ctx.ds, backend);
        verdicts.push_back(baselines::score_prediction(pred, inst, ctx.ds));
    }
    auto report = evalkit::aggregate_report(verdicts, slice);
    auto facet = [](const std::vector<evalkit::FacetRow>& rows,
                    const std::string& key) -> const evalkit::FacetRow* {
        for (const auto& r : rows)
            if (r.key == key) return &r;
        return nullptr;
    };
    const auto* fq = facet(report.by_task, "FQ");
    const auto* as = facet(report.by_task, "AS");
    const auto* yn = facet(report.by_answer, "yesno");
    const auto* pr = facet(report.by_answer, "pair");
    const auto* ls = facet(report.by_answer, "list");
    const bool ok = fq && as && yn && pr && ls && as->acc_pct < fq->acc_pct &&
                    pr->acc_pct < yn->acc_pct && ls->acc_pct < yn->acc_pct;
    std::string detail = "facets missing from the slice";
    if (fq && as && yn && pr && ls) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "AS %.1f%% < FQ %.1f%%; pair %.1f%% and list %.1f%% < yesno %.1f%%",
                      as->acc_pct, fq->acc_pct, pr->acc_pct, ls->acc_pct, yn->acc_pct);
        detail = buf;
    }
    line(9, ok, detail);
}

// --- criterion 10: live-endpoint smoke (optional, never gating) ---------------

void criterion_10(const Ctx& ctx) {
    const char* base_url = std::getenv("LIFEBENCH_LIVE_BASE_URL");
    if (!base_url || !*base_url) {
        skip(10, "live-endpoint smoke (set LIFEBENCH_LIVE_BASE_URL to enable; non-gating)");
        return;
    }
    try {
        llm::RemoteConfig cfg;
        cfg.base_url = base_url;
        if (const char* model = std::getenv("LIFEBENCH_LIVE_MODEL")) cfg.model = model;
        llm::RemoteBackend backend(cfg);
        std::vector<benchgen::QAInstance> slice(ctx.bench.begin(), ctx.bench.begin() + 50);
        std::vector<evalkit::Verdict> verdicts;
        for (const auto& inst : slice)
            verdicts.push_back(baselines::score_prediction(
                baselines::run_dp(inst, ctx.store, backend), inst, ctx.ds));
        auto report = evalkit::aggregate_report(verdicts, slice);
        const bool well_formed = report.total == 50 && report.va_pct.has_value() &&
                                 report.ex_pct.has_value();
        std::printf("[%s] criterion 10 (non-gating): live DP run over 50 instances, "
                    "Acc=%.2f%% VA=%.2f%%\n",
                    well_formed ? "PASS" : "FAIL", report.acc_pct,
                    report.va_pct.value_or(0.0));
    } catch (const std::exception& e) {
        std::printf("[FAIL] criterion 10 (non-gating): %s\n", e.what());
    }
}

}  // namespace

int main() {
    Ctx ctx = criterion_1();
    criterion_2(ctx);
    criterion_3();
    criteria_4_and_5(ctx);
    criterion_6(ctx);
    criterion_7(ctx);
    criterion_8(ctx);
    criterion_9(ctx);
    criterion_10(ctx);
    return g_failed ? 1 : 0;
}
