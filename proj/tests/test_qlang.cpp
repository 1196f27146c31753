#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "lifebench/core/rng.hpp"
#include "lifebench/lifelog/registry.hpp"
#include "lifebench/lifelog/synth.hpp"
#include "lifebench/qlang/compile.hpp"
#include "lifebench/qlang/interpret.hpp"
#include "lifebench/store/store.hpp"
#include "oracle.hpp"
#include "program_sampler.hpp"

using namespace lifebench;
using namespace lifebench::qlang;

namespace {

Date day0 = date_from_ymd(2021, 3, 1);
Date day(int off) { return Date{day0.days + off}; }

// Hand-built dataset: explicit (user, metric, day-offset, value) cells.
AlignedDataset tiny(const std::vector<std::tuple<std::string, std::string, int, double>>& cells) {
    AlignedDataset ds;
    for (const auto& [u, m, off, v] : cells) {
        const MetricInfo* info = find_metric(m);
        REQUIRE(info != nullptr);
        ds.users.insert(u);
        ds.daily.push_back({u, info->domain, day(off), m, v, info->unit});
    }
    ds.finalize();
    ds.reference_date = ds.date_span.end;
    return ds;
}

AlignedDataset cohort_dataset() {
    SynthSpec spec;
    spec.seed = 42;
    spec.n_users = 20;
    spec.n_days = 28;
    return synthesize_dataset(spec);
}

TimeWindow win(int start_off, int len) { return {day(start_off), day(start_off + len - 1)}; }

}  // namespace

TEST_CASE("aggregate_values follows the stated conventions") {
    CHECK(aggregate_values({1, 2, 3}, AggFn::Mean) == doctest::Approx(2.0));
    CHECK(aggregate_values({}, AggFn::Count) == 0.0);
    CHECK(aggregate_values({1, 2, 3, 4}, AggFn::Median) == doctest::Approx(2.5));
    CHECK(aggregate_values({5, 1, 3}, AggFn::Median) == doctest::Approx(3.0));
    CHECK(aggregate_values({9}, AggFn::Mean) == doctest::Approx(9.0));
    CHECK(aggregate_values({4, 2, 8, 6}, AggFn::Sum) == doctest::Approx(20.0));
    CHECK(aggregate_values({4, 2, 8, 6}, AggFn::Min) == doctest::Approx(2.0));
    CHECK(aggregate_values({4, 2, 8, 6}, AggFn::Max) == doctest::Approx(8.0));
    CHECK_THROWS_AS(aggregate_values({}, AggFn::Mean), EvalError);

    // nearest-rank percentile: rank = ceil(p/100 * n)
    std::vector<double> xs{10, 20, 30, 40, 50};
    CHECK(aggregate_values(xs, AggFn::Percentile, 50) == doctest::Approx(30.0));
    CHECK(aggregate_values(xs, AggFn::Percentile, 25) == doctest::Approx(20.0));
    CHECK(aggregate_values(xs, AggFn::Percentile, 100) == doctest::Approx(50.0));
    CHECK(aggregate_values(xs, AggFn::Percentile, 1) == doctest::Approx(10.0));

    // min <= mean <= max on random data
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> v;
        int n = static_cast<int>(rng.uniform_int(1, 30));
        for (int i = 0; i < n; ++i) v.push_back(rng.uniform(-100, 100));
        double mn = aggregate_values(v, AggFn::Min);
        double mean = aggregate_values(v, AggFn::Mean);
        double mx = aggregate_values(v, AggFn::Max);
        CHECK(mn <= mean + 1e-12);
        CHECK(mean <= mx + 1e-12);
    }
}

TEST_CASE("trend_direction: monotone, flat, and noisy series") {
    auto mk = [](std::vector<double> vals) {
        std::vector<std::pair<Date, double>> s;
        for (size_t i = 0; i < vals.size(); ++i) s.emplace_back(day(static_cast<int>(i)), vals[i]);
        return s;
    };
    CHECK(trend_direction(mk({1, 2, 3, 4, 5})) == TrendDirection::Increasing);
    CHECK(trend_direction(mk({5, 4, 3, 2, 1})) == TrendDirection::Decreasing);
    CHECK(trend_direction(mk({7, 7, 7, 7})) == TrendDirection::Stable);
    CHECK_THROWS_AS(trend_direction(mk({1, 2})), EvalError);

    // brute-force OLS oracle on seeded noisy series, plus the reversal property
    Rng rng(1234);
    for (int t = 0; t < 200; ++t) {
        int n = static_cast<int>(rng.uniform_int(3, 20));
        std::vector<std::pair<Date, double>> s;
        double drift = rng.uniform(-3, 3);
        for (int i = 0; i < n; ++i)
            s.emplace_back(day(i), 50 + drift * i + rng.normal(0.0, 4.0));

        double sx = 0, sy = 0, sxx = 0, sxy = 0, lo = s[0].second, hi = s[0].second;
        for (int i = 0; i < n; ++i) {
            sx += i;
            sy += s[i].second;
            sxx += double(i) * i;
            sxy += i * s[i].second;
            lo = std::min(lo, s[i].second);
            hi = std::max(hi, s[i].second);
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        TrendDirection expect = std::abs(slope) <= 0.05 * (hi - lo) / n
                                    ? TrendDirection::Stable
                                    : (slope > 0 ? TrendDirection::Increasing
                                                 : TrendDirection::Decreasing);
        TrendDirection got = trend_direction(s);
        CHECK(got == expect);

        std::vector<std::pair<Date, double>> rev;
        for (int i = 0; i < n; ++i) rev.emplace_back(day(i), s[n - 1 - i].second);
        TrendDirection flipped = trend_direction(rev);
        if (got == TrendDirection::Increasing) CHECK(flipped == TrendDirection::Decreasing);
        if (got == TrendDirection::Decreasing) CHECK(flipped == TrendDirection::Increasing);
        if (got == TrendDirection::Stable) CHECK(flipped == TrendDirection::Stable);
    }
}

TEST_CASE("consecutive_run matches a linear-scan oracle") {
    CHECK(consecutive_run({day(0), day(1), day(2)}, 3).exists);
    CHECK(consecutive_run({day(0), day(1), day(2)}, 3).max_run == 3);
    CHECK_FALSE(consecutive_run({}, 1).exists);
    CHECK(consecutive_run({}, 1).max_run == 0);
    CHECK(consecutive_run({day(0), day(2), day(3)}, 3).max_run == 2);

    Rng rng(77);
    for (int t = 0; t < 300; ++t) {
        std::set<Date> picked;
        for (int i = 0; i < 28; ++i)
            if (rng.bernoulli(0.4)) picked.insert(day(i));
        std::vector<Date> days(picked.begin(), picked.end());

        // brute force: test every start offset and extend while present
        int best = 0;
        for (int i = 0; i < 28; ++i) {
            int run = 0;
            while (i + run < 28 && picked.count(day(i + run))) ++run;
            best = std::max(best, run);
        }
        CHECK(consecutive_run(days, 1).max_run == best);
    }
}

TEST_CASE("cohort_stat, rank_users, dominant_category primitives") {
    auto ds = tiny({{"u1", "emotion.score", 0, 6}, {"u1", "emotion.score", 1, 6},
                    {"u2", "emotion.score", 0, 8}});
    CHECK(cohort_stat(ds, "emotion.score", win(0, 2), AggFn::Mean) == doctest::Approx(7.0));

    auto solo = tiny({{"u1", "emotion.score", 0, 4}, {"u1", "emotion.score", 1, 6}});
    CHECK(cohort_stat(solo, "emotion.score", win(0, 2), AggFn::Mean) == doctest::Approx(5.0));
    CHECK_THROWS_AS(cohort_stat(solo, "sleep.total_minutes", win(0, 2), AggFn::Mean), EvalError);

    auto three = tiny({{"u1", "activity.steps", 0, 5000},
                       {"u2", "activity.steps", 0, 7000},
                       {"u3", "activity.steps", 0, 6000}});
    auto top = rank_users(three, "activity.steps", win(0, 1), SortOrder::Desc, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0] == "u2");

    // tie: lexicographically smaller id first
    auto tied = tiny({{"u2", "activity.steps", 0, 5000}, {"u1", "activity.steps", 0, 5000}});
    auto order = rank_users(tied, "activity.steps", win(0, 1), SortOrder::Desc, 2);
    REQUIRE(order.size() == 2);
    CHECK(order[0] == "u1");

    CHECK(dominant_category({"A", "A", "B"}) == "A");
    CHECK(dominant_category({"B", "A"}) == "A");
    CHECK_THROWS_AS(dominant_category(std::vector<std::string>{}), EvalError);
}

TEST_CASE("interpret: frozen hand-built programs") {
    // constant 420-minute sleep over 7 days -> mean 420
    std::vector<std::tuple<std::string, std::string, int, double>> cells;
    for (int i = 0; i < 7; ++i) cells.emplace_back("u1", "sleep.total_minutes", i, 420.0);
    auto ds = tiny(cells);
    auto prog = aggregate(AggFn::Mean, select_series("u1", "sleep.total_minutes", win(0, 7)));
    auto got = interpret(*prog, ds);
    CHECK(got == AnswerValue::number(420.0));

    // days with sleep > 400 and steps > 6000 overlap on exactly 3 of 7 days
    cells.clear();
    double sleep_v[7] = {410, 390, 420, 380, 450, 430, 370};   // > 400 on days 0,2,4,5
    double steps_v[7] = {7000, 7000, 5000, 7000, 6500, 6200, 5900};  // > 6000 on 0,1,3,4,5
    for (int i = 0; i < 7; ++i) {
        cells.emplace_back("u1", "sleep.total_minutes", i, sleep_v[i]);
        cells.emplace_back("u1", "activity.steps", i, steps_v[i]);
    }
    auto ds2 = tiny(cells);
    auto overlap = count_days(set_op(
        SetOpKind::Intersect,
        {threshold_filter(select_series("u1", "sleep.total_minutes", win(0, 7)), CmpOp::Gt,
                          literal(400)),
         threshold_filter(select_series("u1", "activity.steps", win(0, 7)), CmpOp::Gt,
                          literal(6000))}));
    CHECK(interpret(*overlap, ds2) == AnswerValue::number(3.0));

    // repeated interpretation is identical
    CHECK(interpret(*overlap, ds2) == interpret(*overlap, ds2));

    // error surfacing
    auto empty = aggregate(AggFn::Mean, select_series("u1", "diet.calories", win(0, 7)));
    CHECK_THROWS_AS(interpret(*empty, ds2), EvalError);
    Node bad;
    bad.kind = Node::Kind::SelectSeries;
    bad.user = "u1";
    bad.metric = "no.such_metric";
    bad.window = win(0, 7);
    auto bad_prog = aggregate(AggFn::Count, std::make_shared<const Node>(bad));
    CHECK_THROWS_AS(interpret(*bad_prog, ds2), EvalError);
}

TEST_CASE("interpret: tie-breaks and scale covariance") {
    auto ds = tiny({{"u1", "emotion.score", 0, 5},
                    {"u1", "emotion.score", 1, 9},
                    {"u1", "emotion.score", 2, 9},
                    {"u1", "emotion.score", 3, 2}});
    auto at_max = arg_extreme(select_series("u1", "emotion.score", win(0, 4)), Extreme::Max);
    CHECK(interpret(*at_max, ds) == AnswerValue::label("2021-03-02"));

    // multiplying all values by a positive constant keeps the argmax date
    auto scaled = tiny({{"u1", "emotion.score", 0, 50},
                        {"u1", "emotion.score", 1, 90},
                        {"u1", "emotion.score", 2, 90},
                        {"u1", "emotion.score", 3, 20}});
    CHECK(interpret(*at_max, scaled) == AnswerValue::label("2021-03-02"));
}

namespace {

NodePtr random_program(Rng& rng, const std::vector<std::string>& users) {
    return lifebench::testing::random_program(rng, users, day0);
}

}  // namespace

TEST_CASE("interpreter matches the brute-force oracle on 1200 random programs") {
    auto ds = cohort_dataset();
    std::vector<std::string> users(ds.users.begin(), ds.users.end());
    Rng rng(2024);
    int evaluated = 0, errored = 0;
    for (int t = 0; t < 1200; ++t) {
        auto prog = random_program(rng, users);
        AnswerValue a, b;
        bool a_err = false, b_err = false;
        try {
            a = interpret(*prog, ds);
        } catch (const EvalError&) {
            a_err = true;
        }
        try {
            b = lifebench::testing::oracle_eval(*prog, ds);
        } catch (const std::runtime_error&) {
            b_err = true;
        }
        REQUIRE(a_err == b_err);
        if (a_err) {
            ++errored;
            continue;
        }
        ++evaluated;
        REQUIRE(answers_equal(a, b, 1e-9));
    }
    CHECK(evaluated >= 1000);  // error paths must not dominate the sample
    CHECK(errored < 200);
}

TEST_CASE("dual execution: compiled SQL agrees with the interpreter") {
    auto ds = cohort_dataset();
    std::vector<std::string> users(ds.users.begin(), ds.users.end());
    auto store = RelationalStore::build(ds);
    Rng rng(555);
    int checked = 0;
    for (int t = 0; t < 400; ++t) {
        auto prog = random_program(rng, users);
        AnswerValue expect;
        try {
            expect = interpret(*prog, ds);
        } catch (const EvalError&) {
            continue;
        }
        std::string sql = compile_to_sql(*prog);
        auto verdict = validate_sql(sql);
        REQUIRE(verdict.verdict == SqlVerdict::Valid);
        auto res = store.execute_select(sql);
        REQUIRE(res.status == ExecStatus::Ok);
        auto got = decode_result(res.table, answer_kind_of(*prog));
        REQUIRE(answers_equal(got, expect, 1e-9));
        ++checked;
    }
    CHECK(checked >= 300);
}

TEST_CASE("decode_result shape contract") {
    ResultTable t;
    t.columns = {"answer"};
    t.rows = {{Cell{12.5}}};
    CHECK(decode_result(t, AnswerValue::Kind::Number) == AnswerValue::number(12.5));

    ResultTable empty;
    empty.columns = {"answer"};
    CHECK_THROWS_WITH_AS(decode_result(empty, AnswerValue::Kind::Number),
                         doctest::Contains("ShapeMismatch"), std::runtime_error);

    ResultTable list;
    list.columns = {"user_id"};
    for (int i = 0; i < 7; ++i) list.rows.push_back({Cell{std::string("u00") + char('1' + i)}});
    auto v = decode_result(list, AnswerValue::Kind::List);
    CHECK(v.kind == AnswerValue::Kind::List);
    CHECK(v.items.size() == 7);

    ResultTable yn;
    yn.columns = {"lhs", "rhs", "answer"};
    yn.rows = {{Cell{3.0}, Cell{2.0}, Cell{std::string("yes")}}};
    CHECK(decode_result(yn, AnswerValue::Kind::YesNo) == AnswerValue::yes_no(true));
}

TEST_CASE("program JSON round-trips and stays canonical") {
    auto prog = tuple({count_days(set_op(
                           SetOpKind::Intersect,
                           {threshold_filter(select_series("u001", "sleep.total_minutes",
                                                           win(0, 14)),
                                             CmpOp::Gt, literal(420)),
                            threshold_filter(select_series("u001", "activity.aerobic_minutes",
                                                           win(0, 14)),
                                             CmpOp::Ge, literal(50))})),
                       trend(select_series("u001", "emotion.score", win(0, 14)))});
    auto j = ir_to_json(*prog);
    auto back = ir_from_json(j);
    CHECK(ir_to_json(*back).dump() == j.dump());
    CHECK(check_types(*back) == check_types(*prog));

    auto ds = cohort_dataset();
    CHECK(interpret(*prog, ds) == interpret(*back, ds));
}
