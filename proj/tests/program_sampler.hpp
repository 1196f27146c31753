// Random well-typed query programs over a synthetic cohort, shared by the
// interpreter/oracle equivalence tests and the acceptance suite.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "lifebench/core/rng.hpp"
#include "lifebench/qlang/interpret.hpp"

namespace lifebench::testing {

// Samples one program; `day0` anchors the window offsets (the cohort is
// assumed to cover at least 28 days from there).
inline qlang::NodePtr random_program(Rng& rng, const std::vector<std::string>& users,
                                     Date day0) {
    using namespace qlang;
    static const std::vector<std::string> daily = {
        "sleep.total_minutes", "sleep.deep_minutes",   "activity.steps",
        "activity.total_minutes", "activity.aerobic_minutes", "activity.sedentary_minutes",
        "diet.calories",       "emotion.score",        "emotion.stress_score"};
    static const std::map<std::string, double> typical = {
        {"sleep.total_minutes", 420}, {"sleep.deep_minutes", 95},
        {"activity.steps", 8000},     {"activity.total_minutes", 60},
        {"activity.aerobic_minutes", 55}, {"activity.sedentary_minutes", 540},
        {"diet.calories", 2200},      {"emotion.score", 6.5},
        {"emotion.stress_score", 4.5}};

    auto win = [&](int start_off, int len) {
        return TimeWindow{Date{day0.days + start_off}, Date{day0.days + start_off + len - 1}};
    };
    auto user = [&] { return users[rng.uniform_int(0, static_cast<int64_t>(users.size()) - 1)]; };
    auto metric = [&] { return daily[rng.uniform_int(0, static_cast<int64_t>(daily.size()) - 1)]; };
    auto window = [&] {
        int len = static_cast<int>(rng.uniform_int(3, 14));
        int start = static_cast<int>(rng.uniform_int(0, 28 - len));
        return win(start, len);
    };
    auto fn = [&] {
        AggFn fns[] = {AggFn::Mean, AggFn::Min, AggFn::Max, AggFn::Sum,
                       AggFn::Count, AggFn::Median, AggFn::Percentile};
        return fns[rng.uniform_int(0, 6)];
    };
    auto filt = [&] {
        std::string m = metric();
        CmpOp ops[] = {CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le};
        double t = typical.at(m) * rng.uniform(0.8, 1.2);
        return threshold_filter(select_series(user(), m, window()),
                                ops[rng.uniform_int(0, 3)], literal(t));
    };

    switch (rng.uniform_int(0, 14)) {
        case 0: return aggregate(fn(), select_series(user(), metric(), window()), 25);
        case 1: {
            std::string u = user();
            return aggregate(AggFn::Mean,
                             restrict_days(select_series(u, metric(), win(0, 28)), filt()));
        }
        case 2: {
            std::string m = metric();
            return compare(CompareKind::Diff,
                           aggregate(AggFn::Mean, select_series(user(), m, window())),
                           aggregate(AggFn::Mean, select_series(user(), m, window())));
        }
        case 3: return count_days(filt());
        case 4:
            return count_days(set_op(rng.bernoulli(0.5) ? SetOpKind::Intersect : SetOpKind::Union,
                                     {filt(), filt()}));
        case 5:
            return consecutive_run(filt(), static_cast<int>(rng.uniform_int(2, 5)),
                                   rng.bernoulli(0.5) ? RunMode::Exists : RunMode::MaxRun);
        case 6: return trend(select_series(user(), metric(), window()));
        case 7:
            return arg_extreme(select_series(user(), metric(), window()),
                               rng.bernoulli(0.5) ? Extreme::Max : Extreme::Min);
        case 8: return dominant_category(select_events(user(), "diet.category", window()));
        case 9:
            return aggregate(fn(), select_events(user(), "activity.session_minutes", window()),
                             75);
        case 10: {
            AggFn stats[] = {AggFn::Mean, AggFn::Median, AggFn::Percentile};
            return cohort_stat(metric(), window(), stats[rng.uniform_int(0, 2)],
                               5.0 * rng.uniform_int(5, 19));
        }
        case 11:
            return rank_users(metric(), window(), rng.bernoulli(0.5) ? SortOrder::Desc : SortOrder::Asc,
                              static_cast<int>(rng.uniform_int(1, 5)));
        case 12:
            return tuple({count_days(filt()),
                          aggregate(AggFn::Mean, select_series(user(), metric(), window()))});
        case 13: {
            std::string m = metric();
            return compare(CompareKind::Greater,
                           aggregate(AggFn::Mean, select_series(user(), m, window())),
                           cohort_stat(m, window(), AggFn::Mean));
        }
        default: {
            std::string u = user();
            TimeWindow w = window();
            auto grp = align_days({select_series(u, metric(), w), select_series(u, metric(), w)});
            return aggregate(AggFn::Mean, pick(grp, static_cast<int>(rng.uniform_int(0, 1))));
        }
    }
}

}  // namespace lifebench::testing
