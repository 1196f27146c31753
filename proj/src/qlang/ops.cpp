#include "lifebench/qlang/ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lifebench::qlang {

namespace {

std::string describe(EvalError::Kind k) {
    switch (k) {
        case EvalError::Kind::EmptyWindow: return "EmptyWindow";
        case EvalError::Kind::UnknownMetric: return "UnknownMetric";
        case EvalError::Kind::TypeMismatch: return "TypeMismatch";
        case EvalError::Kind::TooFewPoints: return "TooFewPoints";
    }
    return "?";
}

}  // namespace

EvalError::EvalError(Kind k, std::string where_, const std::string& msg)
    : std::runtime_error(describe(k) + " at " + where_ + ": " + msg),
      kind(k),
      where(std::move(where_)) {}

double aggregate_values(std::vector<double> values, AggFn fn, double percentile) {
    if (fn == AggFn::Count) return static_cast<double>(values.size());
    if (values.empty())
        throw EvalError(EvalError::Kind::EmptyWindow, "aggregate", "no values to aggregate");
    switch (fn) {
        case AggFn::Mean: {
            double s = 0.0;
            for (double v : values) s += v;
            return s / static_cast<double>(values.size());
        }
        case AggFn::Sum: {
            double s = 0.0;
            for (double v : values) s += v;
            return s;
        }
        case AggFn::Min: return *std::min_element(values.begin(), values.end());
        case AggFn::Max: return *std::max_element(values.begin(), values.end());
        case AggFn::Median: {
            std::sort(values.begin(), values.end());
            const size_t n = values.size();
            return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
        }
        case AggFn::Percentile: {
            std::sort(values.begin(), values.end());
            auto rank = static_cast<size_t>(
                std::ceil(percentile / 100.0 * static_cast<double>(values.size())));
            rank = std::max<size_t>(rank, 1);
            rank = std::min(rank, values.size());
            return values[rank - 1];
        }
        case AggFn::Count: break;  // handled above
    }
    throw EvalError(EvalError::Kind::TypeMismatch, "aggregate", "unknown aggregate fn");
}

const char* to_string(TrendDirection t) {
    switch (t) {
        case TrendDirection::Increasing: return "increasing";
        case TrendDirection::Decreasing: return "decreasing";
        case TrendDirection::Stable: return "stable";
    }
    return "?";
}

TrendDirection trend_direction(const std::vector<std::pair<Date, double>>& series,
                               double epsilon) {
    if (series.size() < 3)
        throw EvalError(EvalError::Kind::TooFewPoints, "trend",
                        "need >= 3 points, got " + std::to_string(series.size()));
    const double n = static_cast<double>(series.size());
    const Date origin = series.front().first;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, lo = series.front().second,
           hi = series.front().second;
    for (const auto& [d, v] : series) {
        const double x = static_cast<double>(d.days - origin.days);
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double denom = n * sxx - sx * sx;
    const double slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
    if (std::abs(slope) <= epsilon * (hi - lo) / n) return TrendDirection::Stable;
    return slope > 0.0 ? TrendDirection::Increasing : TrendDirection::Decreasing;
}

RunStats consecutive_run(const std::vector<Date>& days, int min_len) {
    RunStats rs;
    int run = 0;
    for (size_t i = 0; i < days.size(); ++i) {
        run = (i > 0 && days[i].days == days[i - 1].days + 1) ? run + 1 : 1;
        rs.max_run = std::max(rs.max_run, run);
    }
    rs.exists = rs.max_run >= min_len;
    return rs;
}

namespace {

// Per-user window means, ordered by user id.
std::vector<std::pair<UserId, double>> window_means(const AlignedDataset& ds,
                                                    const std::string& metric,
                                                    const TimeWindow& w) {
    std::vector<std::pair<UserId, double>> out;
    for (const auto& user : ds.users) {
        auto s = ds.series(user, metric, w);
        if (s.empty()) continue;
        double sum = 0.0;
        for (const auto& [_, v] : s) sum += v;
        out.emplace_back(user, sum / static_cast<double>(s.size()));
    }
    return out;
}

}  // namespace

double cohort_stat(const AlignedDataset& ds, const std::string& metric, const TimeWindow& w,
                   AggFn stat, double percentile) {
    auto means = window_means(ds, metric, w);
    if (means.empty())
        throw EvalError(EvalError::Kind::EmptyWindow, "cohort_stat",
                        "no user has data for " + metric + " in the window");
    std::vector<double> xs;
    xs.reserve(means.size());
    for (const auto& [_, m] : means) xs.push_back(m);
    return aggregate_values(std::move(xs), stat, percentile);
}

std::vector<UserId> rank_users(const AlignedDataset& ds, const std::string& metric,
                               const TimeWindow& w, SortOrder order, int k) {
    auto means = window_means(ds, metric, w);
    std::sort(means.begin(), means.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return order == SortOrder::Desc ? a.second > b.second : a.second < b.second;
        return a.first < b.first;
    });
    std::vector<UserId> out;
    for (const auto& [u, _] : means) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back(u);
    }
    return out;
}

std::string dominant_category(const std::vector<std::string>& categories) {
    if (categories.empty())
        throw EvalError(EvalError::Kind::EmptyWindow, "dominant_category", "no events");
    std::map<std::string, int> freq;
    for (const auto& c : categories) freq[c]++;
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it)
        if (it->second > best->second) best = it;  // map order gives the lexicographic tie-break
    return best->first;
}

}  // namespace lifebench::qlang
