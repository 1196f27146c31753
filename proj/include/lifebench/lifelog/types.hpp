// Core lifelog record model: per-user, per-domain observations at two
// granularities (timestamped events and daily aggregates).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lifebench/core/date.hpp"

namespace lifebench {

enum class DomainTag { Diet, Sleep, Activity, Emotion };

const char* to_string(DomainTag d);
std::optional<DomainTag> domain_from_string(const std::string& s);

using UserId = std::string;

// A recorded value: numeric measurement or category label.
using MetricValue = std::variant<double, std::string>;

inline bool is_numeric(const MetricValue& v) { return std::holds_alternative<double>(v); }

struct EventRecord {
    UserId user;
    DomainTag domain = DomainTag::Diet;
    std::int64_t start = 0;  // unix seconds UTC
    std::optional<std::int64_t> end;
    std::string metric;
    MetricValue value;
    std::string unit;

    Date date() const { return date_of_timestamp(start); }
};

struct DailyMetric {
    UserId user;
    DomainTag domain = DomainTag::Diet;
    Date date;
    std::string metric;
    MetricValue value;
    std::string unit;
};

struct AlignedDataset {
    std::set<UserId> users;
    TimeWindow date_span{};
    // Kept sorted: daily by (user, metric, date), events by (user, metric, start).
    std::vector<EventRecord> events;
    std::vector<DailyMetric> daily;
    Date reference_date{};  // anchor for relative phrases ("last week")

    // Lookup of one daily cell; nullopt when the day is missing.
    std::optional<MetricValue> daily_value(const UserId& u, Date d,
                                           const std::string& metric) const;

    // Numeric daily series for one user/metric, dates ascending, gaps skipped.
    std::vector<std::pair<Date, double>> series(const UserId& u, const std::string& metric,
                                                const TimeWindow& w) const;

    // Events for one user/metric within a window, start-time ascending.
    std::vector<const EventRecord*> events_in(const UserId& u, const std::string& metric,
                                              const TimeWindow& w) const;

    // Sorts records and recomputes date_span; call after bulk construction.
    void finalize();
};

struct DomainParams {
    double mean = 0.0;
    double spread = 0.0;        // stddev of day-to-day noise
    double user_spread = 0.0;   // stddev of per-user baseline offsets
    double anomaly_rate = 0.0;  // chance a day is an outlier
};

struct SynthSpec {
    std::uint64_t seed = 0;
    int n_users = 0;
    int n_days = 0;
    Date start_date = date_from_ymd(2021, 3, 1);
    double missing_rate = 0.05;  // per (user, day, domain); kept <= 0.10
    DomainParams sleep{420.0, 45.0, 30.0, 0.05};
    DomainParams activity{55.0, 20.0, 12.0, 0.05};   // aerobic minutes
    DomainParams diet{2200.0, 300.0, 150.0, 0.05};   // calories
    DomainParams emotion{6.5, 1.2, 0.8, 0.05};       // score 1-10

    void validate() const;  // throws std::invalid_argument
};

}  // namespace lifebench
