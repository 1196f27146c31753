// Primitive evaluation routines shared by the interpreter and the benchmark
// generator (threshold calibration, ground-truth sanity checks).
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lifebench/lifelog/types.hpp"
#include "lifebench/qlang/ir.hpp"

namespace lifebench::qlang {

// Evaluation failure; `kind` names the failure class, `where` the offending
// node or operation.
struct EvalError : std::runtime_error {
    enum class Kind { EmptyWindow, UnknownMetric, TypeMismatch, TooFewPoints };
    Kind kind;
    std::string where;

    EvalError(Kind k, std::string where_, const std::string& msg);
};

// mean/min/max/sum/count/median/percentile over a plain value list. Count of
// an empty list is 0; every other fn raises EmptyWindow. Median of an
// even-length list averages the two middle values; percentile is nearest-rank.
double aggregate_values(std::vector<double> values, AggFn fn, double percentile = 50.0);

enum class TrendDirection { Increasing, Decreasing, Stable };
const char* to_string(TrendDirection t);

// Least-squares slope over (calendar-day offset, value); Stable when
// |slope| <= epsilon * (max - min) / n. Raises TooFewPoints below 3 points.
TrendDirection trend_direction(const std::vector<std::pair<Date, double>>& series,
                               double epsilon = 0.05);

struct RunStats {
    bool exists = false;
    int max_run = 0;
};

// Longest streak of calendar-consecutive dates; `days` must be sorted and
// duplicate-free. Missing days break runs.
RunStats consecutive_run(const std::vector<Date>& days, int min_len);

// Two-stage cohort statistic: per-user mean over the window first, then
// `stat` across the user means. Users with no data in the window are skipped.
double cohort_stat(const AlignedDataset& ds, const std::string& metric, const TimeWindow& w,
                   AggFn stat, double percentile = 50.0);

// Users ordered by per-user window mean; ties broken by ascending user id.
// Returns at most k ids (fewer when fewer users have data).
std::vector<UserId> rank_users(const AlignedDataset& ds, const std::string& metric,
                               const TimeWindow& w, SortOrder order, int k);

// Modal category label; ties broken lexicographically.
std::string dominant_category(const std::vector<std::string>& categories);

}  // namespace lifebench::qlang
