#include <cmath>

#include "lifebench/benchgen/benchgen.hpp"
#include "lifebench/core/num.hpp"
#include "lifebench/lifelog/registry.hpp"
#include "lifebench/qlang/ops.hpp"

// The template catalog. Each sampler draws one parameter assignment, renders
// one of >= 3 surface forms, and returns the executable program; the caller
// (instantiate_template) handles dedup, ground-truth derivation, and the
// dual-execution check.

namespace lifebench::benchgen {

using qlang::AggFn;
using qlang::AnswerValue;
using qlang::CmpOp;
using qlang::CompareKind;
using qlang::Extreme;
using qlang::NodePtr;
using qlang::RunMode;
using qlang::SetOpKind;
using qlang::SortOrder;

namespace {

// ---- sampling helpers -------------------------------------------------

UserId pick_user(Rng& rng, const AlignedDataset& ds) {
    auto it = ds.users.begin();
    std::advance(it, rng.uniform_int(0, static_cast<int64_t>(ds.users.size()) - 1));
    return *it;
}

const MetricInfo* pick_metric(Rng& rng) {
    const auto& ms = numeric_daily_metrics();
    return ms[rng.uniform_int(0, static_cast<int64_t>(ms.size()) - 1)];
}

int span_days(const AlignedDataset& ds) { return ds.date_span.length(); }

// Window of one of the stock lengths, uniformly placed within the span.
TimeWindow pick_window(Rng& rng, const AlignedDataset& ds, int min_len = 5) {
    static const int lens[] = {5, 7, 10, 14, 21, 28};
    std::vector<int> ok;
    for (int l : lens)
        if (l >= min_len && l <= span_days(ds)) ok.push_back(l);
    int len = ok[rng.uniform_int(0, static_cast<int64_t>(ok.size()) - 1)];
    int start = static_cast<int>(rng.uniform_int(0, span_days(ds) - len));
    Date s{ds.date_span.start.days + start};
    return {s, Date{s.days + len - 1}};
}

Date pick_date(Rng& rng, const AlignedDataset& ds) {
    return Date{ds.date_span.start.days +
                rng.uniform_int(0, span_days(ds) - 1)};
}

// Personalized threshold: a quantile (25th-75th) of the user's own values
// over the full span, rounded for readable question text.
std::optional<double> pick_threshold(Rng& rng, const AlignedDataset& ds, const UserId& u,
                                     const std::string& metric) {
    auto s = ds.series(u, metric, ds.date_span);
    if (s.empty()) return std::nullopt;
    std::vector<double> xs;
    for (const auto& [_, v] : s) xs.push_back(v);
    double p = 25.0 + 5.0 * static_cast<double>(rng.uniform_int(0, 10));
    double q = qlang::aggregate_values(std::move(xs), AggFn::Percentile, p);
    return std::round(q * 10.0) / 10.0;
}

std::string fmt_window(const TimeWindow& w) {
    return "between " + format_date(w.start) + " and " + format_date(w.end);
}

std::string render(const std::vector<std::string>& forms, Rng& rng,
                   const std::map<std::string, std::string>& slots) {
    std::string out = forms[rng.uniform_int(0, static_cast<int64_t>(forms.size()) - 1)];
    for (const auto& [k, v] : slots) {
        const std::string needle = "{" + k + "}";
        size_t pos;
        while ((pos = out.find(needle)) != std::string::npos)
            out.replace(pos, needle.size(), v);
    }
    return out;
}

std::string key_of(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string k;
    for (const auto& [a, b] : kv) k += a + "=" + b + ";";
    return k;
}

const char* fn_word(AggFn fn) {
    switch (fn) {
        case AggFn::Mean: return "average";
        case AggFn::Min: return "minimum";
        case AggFn::Max: return "maximum";
        case AggFn::Sum: return "total";
        case AggFn::Median: return "median";
        default: return "?";
    }
}

const char* fn_key(AggFn fn) {
    switch (fn) {
        case AggFn::Mean: return "mean";
        case AggFn::Min: return "min";
        case AggFn::Max: return "max";
        case AggFn::Sum: return "sum";
        case AggFn::Median: return "median";
        case AggFn::Count: return "count";
        case AggFn::Percentile: return "percentile";
    }
    return "?";
}

const char* cmp_word(CmpOp c) { return c == CmpOp::Gt || c == CmpOp::Ge ? "exceeded" : "stayed below"; }

Draw make_draw(std::string question, NodePtr program, std::string key,
               std::vector<UserId> users, TimeWindow w, std::set<DomainTag> domains) {
    Draw d;
    d.question = std::move(question);
    d.program = std::move(program);
    d.params_key = std::move(key);
    d.user_ids = std::move(users);
    d.window = w;
    d.domains = std::move(domains);
    return d;
}

// ---- single-user templates ---------------------------------------------

std::optional<Draw> fq_value_on_date(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    Date d = pick_date(rng, ds);
    auto prog = qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, {d, d}));
    std::string q = render(
        {"What was user {user}'s {metric} on {date}?",
         "On {date}, what {metric} did user {user} record?",
         "Report the {metric} logged by user {user} on {date}."},
        rng, {{"user", u}, {"metric", m->phrase}, {"date", format_date(d)}});
    return make_draw(q, prog, key_of({{"u", u}, {"m", m->name}, {"d", format_date(d)}}), {u},
                     {d, d}, {m->domain});
}

std::optional<Draw> fq_extreme_date(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds);
    Extreme e = rng.bernoulli(0.5) ? Extreme::Max : Extreme::Min;
    auto prog = qlang::arg_extreme(qlang::select_series(u, m->name, w), e);
    const std::string dir = e == Extreme::Max ? "highest" : "lowest";
    std::string q = render(
        {"On which date did user {user} have the {dir} {metric} {window}?",
         "{window}, which day saw user {user}'s {dir} {metric}?",
         "Find the date of user {user}'s {dir} {metric} {window}."},
        rng, {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}, {"dir", dir}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)},
                             {"e", dir}}),
                     {u}, w, {m->domain});
}

std::optional<Draw> fq_meal_count(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    static const int lens[] = {1, 5, 7};
    int len = lens[rng.uniform_int(0, 2)];
    int start = static_cast<int>(rng.uniform_int(0, span_days(ds) - len));
    TimeWindow w{Date{ds.date_span.start.days + start},
                 Date{ds.date_span.start.days + start + len - 1}};
    auto prog = qlang::aggregate(AggFn::Count, qlang::select_events(u, "diet.category", w));
    std::string q = render(
        {"How many meals did user {user} log {window}?",
         "{window}, how many meal records does user {user} have?",
         "Count the meals recorded by user {user} {window}."},
        rng, {{"user", u}, {"window", fmt_window(w)}});
    return make_draw(q, prog, key_of({{"u", u}, {"w", fmt_window(w)}}), {u}, w,
                     {DomainTag::Diet});
}

std::optional<Draw> as_window_stat(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds);
    AggFn fns[] = {AggFn::Mean, AggFn::Min, AggFn::Max, AggFn::Sum, AggFn::Median};
    AggFn fn = fns[rng.uniform_int(0, 4)];
    auto prog = qlang::aggregate(fn, qlang::select_series(u, m->name, w));
    std::string q = render(
        {"What was user {user}'s {fn} {metric} {window}?",
         "{window}, what was the {fn} {metric} for user {user}?",
         "Compute user {user}'s {fn} {metric} {window}."},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}, {"fn", fn_word(fn)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)}, {"fn", fn_key(fn)}}),
                     {u}, w, {m->domain});
}

std::optional<Draw> as_percentile(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds, 7);
    int p = 25 + 5 * static_cast<int>(rng.uniform_int(0, 10));
    auto prog =
        qlang::aggregate(AggFn::Percentile, qlang::select_series(u, m->name, w), p);
    std::string q = render(
        {"What was the {p}th percentile of user {user}'s {metric} {window}?",
         "{window}, what {metric} value marks user {user}'s {p}th percentile?",
         "Find the {p}th percentile of the {metric} values of user {user} {window}."},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}, {"p", std::to_string(p)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)},
                             {"p", std::to_string(p)}}),
                     {u}, w, {m->domain});
}

std::optional<Draw> as_dominant_category(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    TimeWindow w = pick_window(rng, ds);
    auto prog = qlang::dominant_category(qlang::select_events(u, "diet.category", w));
    std::string q = render(
        {"What was user {user}'s dominant diet category {window}?",
         "{window}, which diet category did user {user} log most often?",
         "Which diet category dominates user {user}'s meals {window}?"},
        rng, {{"user", u}, {"window", fmt_window(w)}});
    return make_draw(q, prog, key_of({{"u", u}, {"w", fmt_window(w)}}), {u}, w,
                     {DomainTag::Diet});
}

std::optional<Draw> as_daily_values(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    int start = static_cast<int>(rng.uniform_int(0, span_days(ds) - 7));
    TimeWindow w{Date{ds.date_span.start.days + start},
                 Date{ds.date_span.start.days + start + 6}};
    std::vector<NodePtr> items;
    for (int i = 0; i < 7; ++i) {
        Date d{w.start.days + i};
        items.push_back(qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, {d, d})));
    }
    auto prog = qlang::tuple(std::move(items));
    std::string q = render(
        {"For each day {window}, what was user {user}'s {metric}? List the seven values in date order.",
         "{window}, list user {user}'s {metric} day by day (seven values, date order).",
         "Give user {user}'s daily {metric} for every day {window}, in date order."},
        rng, {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}});
    return make_draw(q, prog, key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)}}), {u}, w,
                     {m->domain});
}

// Two disjoint same-length windows for comparison templates.
std::optional<std::pair<TimeWindow, TimeWindow>> pick_two_windows(Rng& rng,
                                                                  const AlignedDataset& ds) {
    static const int lens[] = {5, 7, 10, 14};
    int len = lens[rng.uniform_int(0, 3)];
    if (2 * len > span_days(ds)) return std::nullopt;
    int start1 = static_cast<int>(rng.uniform_int(0, span_days(ds) - 2 * len));
    int start2 = static_cast<int>(rng.uniform_int(start1 + len, span_days(ds) - len));
    Date base = ds.date_span.start;
    TimeWindow a{Date{base.days + start1}, Date{base.days + start1 + len - 1}};
    TimeWindow b{Date{base.days + start2}, Date{base.days + start2 + len - 1}};
    return std::make_pair(a, b);
}

std::optional<Draw> nc_window_diff(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    auto wins = pick_two_windows(rng, ds);
    if (!wins) return std::nullopt;
    auto [a, b] = *wins;
    auto prog = qlang::compare(CompareKind::Diff,
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, a)),
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, b)));
    std::string q = render(
        {"For user {user}, what is the average {metric} {wa} minus the average {wb}?",
         "How does user {user}'s average {metric} {wa} compare to {wb}? Report the difference (first minus second).",
         "Compute the difference in user {user}'s average {metric}: {wa} versus {wb} (first minus second)."},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"wa", fmt_window(a)}, {"wb", fmt_window(b)}});
    TimeWindow full{a.start, b.end};
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"wa", fmt_window(a)},
                             {"wb", fmt_window(b)}}),
                     {u}, full, {m->domain});
}

std::optional<Draw> nc_metric_ratio(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m1 = pick_metric(rng);
    const MetricInfo* m2 = pick_metric(rng);
    if (m1->name == m2->name) return std::nullopt;
    TimeWindow w = pick_window(rng, ds);
    auto prog = qlang::compare(CompareKind::Ratio,
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m1->name, w)),
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m2->name, w)));
    std::string q = render(
        {"For user {user} {window}, what is the ratio of average {m1} to average {m2}?",
         "{window}, how many times larger is user {user}'s average {m1} than their average {m2}?",
         "Divide user {user}'s average {m1} by their average {m2} {window}."},
        rng,
        {{"user", u}, {"m1", m1->phrase}, {"m2", m2->phrase}, {"window", fmt_window(w)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m1", m1->name}, {"m2", m2->name}, {"w", fmt_window(w)}}),
                     {u}, w, {m1->domain, m2->domain});
}

std::optional<Draw> nc_window_greater(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    auto wins = pick_two_windows(rng, ds);
    if (!wins) return std::nullopt;
    auto [a, b] = *wins;
    auto prog = qlang::compare(CompareKind::Greater,
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, a)),
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, b)));
    std::string q = render(
        {"Was user {user}'s average {metric} higher {wa} than {wb}?",
         "Did user {user} average more {metric} {wa} than {wb}?",
         "Answer yes or no: user {user}'s average {metric} was greater {wa} than {wb}."},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"wa", fmt_window(a)}, {"wb", fmt_window(b)}});
    TimeWindow full{a.start, b.end};
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"wa", fmt_window(a)},
                             {"wb", fmt_window(b)}}),
                     {u}, full, {m->domain});
}

std::optional<Draw> cq_count_days(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds);
    auto thr = pick_threshold(rng, ds, u, m->name);
    if (!thr) return std::nullopt;
    CmpOp cmp = rng.bernoulli(0.5) ? CmpOp::Gt : CmpOp::Lt;
    auto prog = qlang::count_days(qlang::threshold_filter(qlang::select_series(u, m->name, w),
                                                          cmp, qlang::literal(*thr)));
    std::string q = render(
        {"On how many days {window} did user {user}'s {metric} {cmp} {thr}?",
         "{window}, count the days on which user {user}'s {metric} {cmp} {thr}.",
         "How many days {window} saw user {user}'s {metric} {cmp} {thr}?"},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)},
         {"cmp", cmp == CmpOp::Gt ? "exceed" : "stay below"}, {"thr", format_number(*thr)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)},
                             {"c", cmp == CmpOp::Gt ? "gt" : "lt"}, {"t", format_number(*thr)}}),
                     {u}, w, {m->domain});
}

std::optional<Draw> cq_count_both(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m1 = pick_metric(rng);
    const MetricInfo* m2 = pick_metric(rng);
    if (m1->domain == m2->domain) return std::nullopt;
    TimeWindow w = pick_window(rng, ds, 7);
    auto t1 = pick_threshold(rng, ds, u, m1->name);
    auto t2 = pick_threshold(rng, ds, u, m2->name);
    if (!t1 || !t2) return std::nullopt;
    auto prog = qlang::count_days(qlang::set_op(
        SetOpKind::Intersect,
        {qlang::threshold_filter(qlang::select_series(u, m1->name, w), CmpOp::Gt,
                                 qlang::literal(*t1)),
         qlang::threshold_filter(qlang::select_series(u, m2->name, w), CmpOp::Gt,
                                 qlang::literal(*t2))}));
    std::string q = render(
        {"On how many days {window} did user {user} exceed both a {m1} of {t1} and a {m2} of {t2}?",
         "{window}, count the days on which user {user}'s {m1} exceeded {t1} and their {m2} exceeded {t2}.",
         "How many days {window} had user {user} above {t1} in {m1} and above {t2} in {m2}?"},
        rng,
        {{"user", u}, {"m1", m1->phrase}, {"m2", m2->phrase}, {"t1", format_number(*t1)},
         {"t2", format_number(*t2)}, {"window", fmt_window(w)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m1", m1->name}, {"m2", m2->name}, {"w", fmt_window(w)},
                             {"t1", format_number(*t1)}, {"t2", format_number(*t2)}}),
                     {u}, w, {m1->domain, m2->domain});
}

std::optional<Draw> cq_streak_exists(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds, 7);
    auto thr = pick_threshold(rng, ds, u, m->name);
    if (!thr) return std::nullopt;
    int k = static_cast<int>(rng.uniform_int(2, 5));
    CmpOp cmp = rng.bernoulli(0.5) ? CmpOp::Gt : CmpOp::Lt;
    auto prog = qlang::consecutive_run(
        qlang::threshold_filter(qlang::select_series(u, m->name, w), cmp, qlang::literal(*thr)),
        k, RunMode::Exists);
    std::string q = render(
        {"Did user {user} have at least {k} consecutive days {window} on which their {metric} {cmp} {thr}?",
         "{window}, was there a streak of {k} or more consecutive days where user {user}'s {metric} {cmp} {thr}?",
         "Answer yes or no: {window}, user {user}'s {metric} {cmp} {thr} on {k} consecutive days at least once."},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}, {"k", std::to_string(k)},
         {"cmp", cmp_word(cmp)}, {"thr", format_number(*thr)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)},
                             {"k", std::to_string(k)}, {"c", cmp == CmpOp::Gt ? "gt" : "lt"},
                             {"t", format_number(*thr)}}),
                     {u}, w, {m->domain});
}

std::optional<Draw> cq_max_streak(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds, 7);
    auto thr = pick_threshold(rng, ds, u, m->name);
    if (!thr) return std::nullopt;
    CmpOp cmp = rng.bernoulli(0.5) ? CmpOp::Gt : CmpOp::Lt;
    auto prog = qlang::consecutive_run(
        qlang::threshold_filter(qlang::select_series(u, m->name, w), cmp, qlang::literal(*thr)),
        1, RunMode::MaxRun);
    std::string q = render(
        {"What was user {user}'s longest run of consecutive days {window} on which their {metric} {cmp} {thr}?",
         "{window}, how long was the longest streak of days where user {user}'s {metric} {cmp} {thr}?",
         "Find the maximum number of consecutive days {window} with user {user}'s {metric} {cmp} {thr}."},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)},
         {"cmp", cmp_word(cmp)}, {"thr", format_number(*thr)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)},
                             {"c", cmp == CmpOp::Gt ? "gt" : "lt"}, {"t", format_number(*thr)}}),
                     {u}, w, {m->domain});
}

std::optional<Draw> cq_conditional_mean(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m1 = pick_metric(rng);
    const MetricInfo* m2 = pick_metric(rng);
    if (m1->domain == m2->domain) return std::nullopt;
    TimeWindow w = pick_window(rng, ds, 7);
    auto thr = pick_threshold(rng, ds, u, m2->name);
    if (!thr) return std::nullopt;
    CmpOp cmp = rng.bernoulli(0.5) ? CmpOp::Gt : CmpOp::Lt;
    auto prog = qlang::aggregate(
        AggFn::Mean,
        qlang::restrict_days(qlang::select_series(u, m1->name, w),
                             qlang::threshold_filter(qlang::select_series(u, m2->name, w), cmp,
                                                     qlang::literal(*thr))));
    std::string q = render(
        {"What was user {user}'s average {m1} on the days {window} when their {m2} {cmp} {thr}?",
         "{window}, restricted to days where user {user}'s {m2} {cmp} {thr}, what was their average {m1}?",
         "Average user {user}'s {m1} over only the days {window} on which their {m2} {cmp} {thr}."},
        rng,
        {{"user", u}, {"m1", m1->phrase}, {"m2", m2->phrase}, {"window", fmt_window(w)},
         {"cmp", cmp_word(cmp)}, {"thr", format_number(*thr)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m1", m1->name}, {"m2", m2->name}, {"w", fmt_window(w)},
                             {"c", cmp == CmpOp::Gt ? "gt" : "lt"}, {"t", format_number(*thr)}}),
                     {u}, w, {m1->domain, m2->domain});
}

std::optional<Draw> ta_trend(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds, 7);
    auto prog = qlang::trend(qlang::select_series(u, m->name, w));
    std::string q = render(
        {"What was the trend of user {user}'s {metric} {window}? Answer increasing, decreasing, or stable.",
         "{window}, was user {user}'s {metric} increasing, decreasing, or stable?",
         "Characterize the direction of user {user}'s {metric} {window}: increasing, decreasing, or stable."},
        rng, {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}});
    return make_draw(q, prog, key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)}}), {u}, w,
                     {m->domain});
}

std::optional<Draw> ta_half_greater(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    static const int lens[] = {5, 7, 10, 14};
    int len = lens[rng.uniform_int(0, 3)];
    if (2 * len > span_days(ds)) return std::nullopt;
    int start = static_cast<int>(rng.uniform_int(0, span_days(ds) - 2 * len));
    Date base{ds.date_span.start.days + start};
    TimeWindow h1{base, Date{base.days + len - 1}};
    TimeWindow h2{Date{base.days + len}, Date{base.days + 2 * len - 1}};
    auto prog = qlang::compare(CompareKind::Greater,
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, h2)),
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, h1)));
    std::string q = render(
        {"Did user {user}'s average {metric} rise from the period {w1} to the period {w2}?",
         "Was user {user}'s average {metric} higher {w2} than {w1}?",
         "Answer yes or no: user {user} averaged more {metric} {w2} than {w1}."},
        rng,
        {{"user", u}, {"metric", m->phrase}, {"w1", fmt_window(h1)}, {"w2", fmt_window(h2)}});
    return make_draw(q, prog,
                     key_of({{"u", u}, {"m", m->name}, {"w1", fmt_window(h1)},
                             {"w2", fmt_window(h2)}}),
                     {u}, {h1.start, h2.end}, {m->domain});
}

std::optional<Draw> ta_trend_and_mean(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds, 7);
    auto series = qlang::select_series(u, m->name, w);
    auto prog = qlang::tuple({qlang::trend(series), qlang::aggregate(AggFn::Mean, series)});
    std::string q = render(
        {"For user {user}'s {metric} {window}, report the trend label (increasing/decreasing/stable) and the average value, in that order.",
         "{window}, what was the trend of user {user}'s {metric}, and what was its average? Answer as: trend; average.",
         "Give two items for user {user}'s {metric} {window}: first the trend label, then the mean value."},
        rng, {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}});
    return make_draw(q, prog, key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)}}), {u}, w,
                     {m->domain});
}

// ---- multi-user templates -----------------------------------------------

std::optional<Draw> as_cohort_stat(Rng& rng, const AlignedDataset& ds) {
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds);
    int pick = static_cast<int>(rng.uniform_int(0, 2));
    AggFn stat = pick == 0 ? AggFn::Mean : pick == 1 ? AggFn::Median : AggFn::Percentile;
    int p = 25 + 5 * static_cast<int>(rng.uniform_int(0, 10));
    auto prog = qlang::cohort_stat(m->name, w, stat, p);
    std::string word = stat == AggFn::Mean     ? "average"
                       : stat == AggFn::Median ? "median"
                                               : std::to_string(p) + "th percentile";
    std::string q = render(
        {"Across all users, what was the cohort {stat} of per-user average {metric} {window}?",
         "{window}, compute each user's average {metric}, then report the cohort {stat} of those values.",
         "What is the {stat} across users of the per-user mean {metric} {window}?"},
        rng, {{"metric", m->phrase}, {"window", fmt_window(w)}, {"stat", word}});
    std::vector<UserId> users(ds.users.begin(), ds.users.end());
    return make_draw(q, prog,
                     key_of({{"m", m->name}, {"w", fmt_window(w)}, {"s", fn_key(stat)},
                             {"p", stat == AggFn::Percentile ? std::to_string(p) : "-"}}),
                     users, w, {m->domain});
}

std::optional<Draw> rank_users_draw(Rng& rng, const AlignedDataset& ds, int k_lo, int k_hi) {
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds);
    SortOrder order = rng.bernoulli(0.5) ? SortOrder::Desc : SortOrder::Asc;
    int k = static_cast<int>(rng.uniform_int(k_lo, k_hi));
    auto prog = qlang::rank_users(m->name, w, order, k);
    const std::string dir = order == SortOrder::Desc ? "highest" : "lowest";
    std::map<std::string, std::string> slots = {{"metric", m->phrase},
                                                {"window", fmt_window(w)},
                                                {"dir", dir},
                                                {"k", std::to_string(k)}};
    std::string q =
        k == 1 ? render({"Which user had the {dir} average {metric} {window}?",
                         "{window}, who recorded the {dir} average {metric}?",
                         "Name the user with the {dir} average {metric} {window}."},
                        rng, slots)
               : render({"Which {k} users had the {dir} average {metric} {window}? List them in rank order.",
                         "{window}, list the {k} users with the {dir} average {metric}, best rank first.",
                         "Rank the top {k} users by {dir} average {metric} {window}."},
                        rng, slots);
    std::vector<UserId> users(ds.users.begin(), ds.users.end());
    return make_draw(q, prog,
                     key_of({{"m", m->name}, {"w", fmt_window(w)},
                             {"o", order == SortOrder::Desc ? "desc" : "asc"},
                             {"k", std::to_string(k)}}),
                     users, w, {m->domain});
}

std::optional<Draw> as_top_user(Rng& rng, const AlignedDataset& ds) {
    return rank_users_draw(rng, ds, 1, 1);
}
std::optional<Draw> as_top_pair(Rng& rng, const AlignedDataset& ds) {
    return rank_users_draw(rng, ds, 2, 2);
}
std::optional<Draw> as_top_list(Rng& rng, const AlignedDataset& ds) {
    return rank_users_draw(rng, ds, 3, 5);
}

std::optional<Draw> nc_user_pair(Rng& rng, const AlignedDataset& ds, CompareKind kind) {
    UserId a = pick_user(rng, ds);
    UserId b = pick_user(rng, ds);
    if (a == b) return std::nullopt;
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds);
    auto prog = qlang::compare(kind,
                               qlang::aggregate(AggFn::Mean, qlang::select_series(a, m->name, w)),
                               qlang::aggregate(AggFn::Mean, qlang::select_series(b, m->name, w)));
    std::map<std::string, std::string> slots = {
        {"a", a}, {"b", b}, {"metric", m->phrase}, {"window", fmt_window(w)}};
    std::string q =
        kind == CompareKind::Diff
            ? render({"By how much did user {a}'s average {metric} differ from user {b}'s {window}? Report {a} minus {b}.",
                      "{window}, compute user {a}'s average {metric} minus user {b}'s.",
                      "What is the gap (user {a} minus user {b}) in average {metric} {window}?"},
                     rng, slots)
            : render({"Did user {a} have a higher average {metric} than user {b} {window}?",
                      "{window}, was user {a}'s average {metric} above user {b}'s?",
                      "Answer yes or no: user {a} averaged more {metric} than user {b} {window}."},
                     rng, slots);
    return make_draw(q, prog,
                     key_of({{"a", a}, {"b", b}, {"m", m->name}, {"w", fmt_window(w)}}),
                     {a, b}, w, {m->domain});
}

std::optional<Draw> nc_user_diff(Rng& rng, const AlignedDataset& ds) {
    return nc_user_pair(rng, ds, CompareKind::Diff);
}
std::optional<Draw> nc_user_greater(Rng& rng, const AlignedDataset& ds) {
    return nc_user_pair(rng, ds, CompareKind::Greater);
}

std::optional<Draw> nc_above_cohort(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds);
    auto prog = qlang::compare(CompareKind::Greater,
                               qlang::aggregate(AggFn::Mean, qlang::select_series(u, m->name, w)),
                               qlang::cohort_stat(m->name, w, AggFn::Mean));
    std::string q = render(
        {"Was user {user}'s average {metric} above the cohort average {window}?",
         "{window}, did user {user} average more {metric} than the cohort as a whole?",
         "Answer yes or no: user {user}'s average {metric} exceeded the all-user average {window}."},
        rng, {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}});
    std::vector<UserId> users(ds.users.begin(), ds.users.end());
    return make_draw(q, prog, key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)}}), users, w,
                     {m->domain});
}

std::optional<Draw> cq_days_above_cohort(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds, 7);
    auto prog = qlang::count_days(qlang::threshold_filter(
        qlang::select_series(u, m->name, w), CmpOp::Gt, qlang::cohort_stat(m->name, w, AggFn::Mean)));
    std::string q = render(
        {"On how many days {window} did user {user}'s {metric} exceed the cohort average for that window?",
         "{window}, count the days on which user {user}'s {metric} was above the all-user average.",
         "How many days {window} had user {user} beating the cohort-average {metric}?"},
        rng, {{"user", u}, {"metric", m->phrase}, {"window", fmt_window(w)}});
    std::vector<UserId> users(ds.users.begin(), ds.users.end());
    return make_draw(q, prog, key_of({{"u", u}, {"m", m->name}, {"w", fmt_window(w)}}), users, w,
                     {m->domain});
}

std::optional<Draw> ta_two_user_trends(Rng& rng, const AlignedDataset& ds) {
    UserId a = pick_user(rng, ds);
    UserId b = pick_user(rng, ds);
    if (a == b) return std::nullopt;
    const MetricInfo* m = pick_metric(rng);
    TimeWindow w = pick_window(rng, ds, 7);
    auto prog = qlang::tuple({qlang::trend(qlang::select_series(a, m->name, w)),
                              qlang::trend(qlang::select_series(b, m->name, w))});
    std::string q = render(
        {"{window}, what were the {metric} trends for user {a} and user {b}? Answer as two labels: {a} first, then {b}.",
         "Report the trend (increasing/decreasing/stable) of {metric} {window} for user {a} and for user {b}, in that order.",
         "For {metric} {window}, give user {a}'s trend label followed by user {b}'s."},
        rng, {{"a", a}, {"b", b}, {"metric", m->phrase}, {"window", fmt_window(w)}});
    return make_draw(q, prog,
                     key_of({{"a", a}, {"b", b}, {"m", m->name}, {"w", fmt_window(w)}}),
                     {a, b}, w, {m->domain});
}

std::optional<Draw> ta_cohort_half_greater(Rng& rng, const AlignedDataset& ds) {
    const MetricInfo* m = pick_metric(rng);
    static const int lens[] = {5, 7, 10, 14};
    int len = lens[rng.uniform_int(0, 3)];
    if (2 * len > span_days(ds)) return std::nullopt;
    int start = static_cast<int>(rng.uniform_int(0, span_days(ds) - 2 * len));
    Date base{ds.date_span.start.days + start};
    TimeWindow h1{base, Date{base.days + len - 1}};
    TimeWindow h2{Date{base.days + len}, Date{base.days + 2 * len - 1}};
    auto prog = qlang::compare(CompareKind::Greater, qlang::cohort_stat(m->name, h2, AggFn::Mean),
                               qlang::cohort_stat(m->name, h1, AggFn::Mean));
    std::string q = render(
        {"Did the cohort average {metric} rise from the period {w1} to the period {w2}?",
         "Was the all-user average {metric} higher {w2} than {w1}?",
         "Answer yes or no: across users, average {metric} was greater {w2} than {w1}."},
        rng, {{"metric", m->phrase}, {"w1", fmt_window(h1)}, {"w2", fmt_window(h2)}});
    std::vector<UserId> users(ds.users.begin(), ds.users.end());
    return make_draw(q, prog,
                     key_of({{"m", m->name}, {"w1", fmt_window(h1)}, {"w2", fmt_window(h2)}}),
                     users, {h1.start, h2.end}, {m->domain});
}

// The four-domain composite: on days where the user beat the cohort average
// in both sleep and aerobic activity, report (day count, dominant diet
// category, emotion trend over those days).
std::optional<Draw> cq_profile_composite(Rng& rng, const AlignedDataset& ds) {
    UserId u = pick_user(rng, ds);
    TimeWindow w = pick_window(rng, ds, 14);
    auto good_days = qlang::set_op(
        SetOpKind::Intersect,
        {qlang::threshold_filter(qlang::select_series(u, "sleep.total_minutes", w), CmpOp::Gt,
                                 qlang::cohort_stat("sleep.total_minutes", w, AggFn::Mean)),
         qlang::threshold_filter(qlang::select_series(u, "activity.aerobic_minutes", w), CmpOp::Gt,
                                 qlang::cohort_stat("activity.aerobic_minutes", w, AggFn::Mean))});
    auto prog = qlang::tuple(
        {qlang::count_days(good_days),
         qlang::dominant_category(
             qlang::restrict_days(qlang::select_events(u, "diet.category", w), good_days)),
         qlang::trend(qlang::restrict_days(qlang::select_series(u, "emotion.score", w),
                                           good_days))});
    std::string q = render(
        {"{window}, on how many days did user {user} sleep longer and do more aerobic exercise than the cohort average, what was their dominant diet category on those days, and what was the trend of their emotion score across them? Answer as: count; category; trend.",
         "Consider the days {window} when user {user} beat the cohort average in both sleep duration and aerobic exercise time. Report the number of such days, the dominant diet category on them, and the emotion-score trend over them (count; category; trend).",
         "For user {user} {window}: count the days above the cohort average in both sleep duration and aerobic exercise time, then give the dominant diet category and the emotion-score trend restricted to those days. Format: count; category; trend."},
        rng, {{"user", u}, {"window", fmt_window(w)}});
    std::vector<UserId> users(ds.users.begin(), ds.users.end());
    return make_draw(q, prog, key_of({{"u", u}, {"w", fmt_window(w)}}), users, w,
                     {DomainTag::Sleep, DomainTag::Activity, DomainTag::Diet, DomainTag::Emotion});
}

Template t(std::string id, TaskType task, AnswerValue::Kind answer, Scope scope,
           std::optional<Draw> (*fn)(Rng&, const AlignedDataset&)) {
    Template tpl;
    tpl.id = std::move(id);
    tpl.task = task;
    tpl.answer = answer;
    tpl.scope = scope;
    tpl.sample = fn;
    return tpl;
}

}  // namespace

const std::vector<Template>& template_catalog() {
    using K = AnswerValue::Kind;
    static const std::vector<Template> kCatalog = {
        // single-user
        t("fq_value_on_date", TaskType::FQ, K::Number, Scope::SingleUser, fq_value_on_date),
        t("fq_extreme_date", TaskType::FQ, K::Text, Scope::SingleUser, fq_extreme_date),
        t("fq_meal_count", TaskType::FQ, K::Number, Scope::SingleUser, fq_meal_count),
        t("as_window_stat", TaskType::AS, K::Number, Scope::SingleUser, as_window_stat),
        t("as_percentile", TaskType::AS, K::Number, Scope::SingleUser, as_percentile),
        t("as_dominant_category", TaskType::AS, K::Text, Scope::SingleUser, as_dominant_category),
        t("as_daily_values", TaskType::AS, K::List, Scope::SingleUser, as_daily_values),
        t("nc_window_diff", TaskType::NC, K::Number, Scope::SingleUser, nc_window_diff),
        t("nc_metric_ratio", TaskType::NC, K::Number, Scope::SingleUser, nc_metric_ratio),
        t("nc_window_greater", TaskType::NC, K::YesNo, Scope::SingleUser, nc_window_greater),
        t("cq_count_days", TaskType::CQ, K::Number, Scope::SingleUser, cq_count_days),
        t("cq_count_both", TaskType::CQ, K::Number, Scope::SingleUser, cq_count_both),
        t("cq_streak_exists", TaskType::CQ, K::YesNo, Scope::SingleUser, cq_streak_exists),
        t("cq_max_streak", TaskType::CQ, K::Number, Scope::SingleUser, cq_max_streak),
        t("cq_conditional_mean", TaskType::CQ, K::Number, Scope::SingleUser, cq_conditional_mean),
        t("ta_trend", TaskType::TA, K::Text, Scope::SingleUser, ta_trend),
        t("ta_half_greater", TaskType::TA, K::YesNo, Scope::SingleUser, ta_half_greater),
        t("ta_trend_and_mean", TaskType::TA, K::Pair, Scope::SingleUser, ta_trend_and_mean),
        // multi-user
        t("as_cohort_stat", TaskType::AS, K::Number, Scope::MultiUser, as_cohort_stat),
        t("as_top_user", TaskType::AS, K::Text, Scope::MultiUser, as_top_user),
        t("as_top_pair", TaskType::AS, K::Pair, Scope::MultiUser, as_top_pair),
        t("as_top_list", TaskType::AS, K::List, Scope::MultiUser, as_top_list),
        t("nc_user_diff", TaskType::NC, K::Number, Scope::MultiUser, nc_user_diff),
        t("nc_user_greater", TaskType::NC, K::YesNo, Scope::MultiUser, nc_user_greater),
        t("nc_above_cohort", TaskType::NC, K::YesNo, Scope::MultiUser, nc_above_cohort),
        t("cq_days_above_cohort", TaskType::CQ, K::Number, Scope::MultiUser, cq_days_above_cohort),
        t("cq_profile_composite", TaskType::CQ, K::List, Scope::MultiUser, cq_profile_composite),
        t("ta_two_user_trends", TaskType::TA, K::Pair, Scope::MultiUser, ta_two_user_trends),
        t("ta_cohort_half_greater", TaskType::TA, K::YesNo, Scope::MultiUser,
          ta_cohort_half_greater),
    };
    return kCatalog;
}

}  // namespace lifebench::benchgen
