#include "lifebench/lifelog/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace lifebench {

namespace {

struct DailyKey {
    const UserId* user;
    const std::string* metric;
    Date date;
};

bool daily_less(const DailyMetric& a, const DailyMetric& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.metric != b.metric) return a.metric < b.metric;
    return a.date < b.date;
}

bool event_less(const EventRecord& a, const EventRecord& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.metric != b.metric) return a.metric < b.metric;
    return a.start < b.start;
}

}  // namespace

void AlignedDataset::finalize() {
    std::sort(daily.begin(), daily.end(), daily_less);
    std::stable_sort(events.begin(), events.end(), event_less);
    bool any = false;
    Date lo{0}, hi{0};
    auto fold = [&](Date d) {
        if (!any) {
            lo = hi = d;
            any = true;
        } else {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    };
    for (const auto& r : daily) fold(r.date);
    for (const auto& e : events) fold(e.date());
    if (any) date_span = {lo, hi};
}

std::optional<MetricValue> AlignedDataset::daily_value(const UserId& u, Date d,
                                                       const std::string& metric) const {
    DailyMetric probe{u, DomainTag::Diet, d, metric, 0.0, ""};
    auto it = std::lower_bound(daily.begin(), daily.end(), probe, daily_less);
    if (it != daily.end() && it->user == u && it->metric == metric && it->date == d)
        return it->value;
    return std::nullopt;
}

std::vector<std::pair<Date, double>> AlignedDataset::series(const UserId& u,
                                                            const std::string& metric,
                                                            const TimeWindow& w) const {
    DailyMetric lo{u, DomainTag::Diet, w.start, metric, 0.0, ""};
    auto it = std::lower_bound(daily.begin(), daily.end(), lo, daily_less);
    std::vector<std::pair<Date, double>> out;
    for (; it != daily.end() && it->user == u && it->metric == metric && it->date <= w.end; ++it)
        if (is_numeric(it->value)) out.emplace_back(it->date, std::get<double>(it->value));
    return out;
}

std::vector<const EventRecord*> AlignedDataset::events_in(const UserId& u,
                                                          const std::string& metric,
                                                          const TimeWindow& w) const {
    EventRecord lo{u, DomainTag::Diet, static_cast<std::int64_t>(w.start.days) * 86400,
                   std::nullopt, metric, 0.0, ""};
    auto it = std::lower_bound(events.begin(), events.end(), lo, event_less);
    std::vector<const EventRecord*> out;
    const std::int64_t end_ts = (static_cast<std::int64_t>(w.end.days) + 1) * 86400;
    for (; it != events.end() && it->user == u && it->metric == metric && it->start < end_ts; ++it)
        out.push_back(&*it);
    return out;
}

void SynthSpec::validate() const {
    if (n_users <= 0) throw std::invalid_argument("SynthSpec: n_users must be positive");
    if (n_days <= 0) throw std::invalid_argument("SynthSpec: n_days must be positive");
    if (missing_rate < 0.0 || missing_rate > 1.0)
        throw std::invalid_argument("SynthSpec: missing_rate must be in [0,1]");
    for (const auto* p : {&sleep, &activity, &diet, &emotion})
        if (p->anomaly_rate < 0.0 || p->anomaly_rate > 1.0)
            throw std::invalid_argument("SynthSpec: anomaly rates must be in [0,1]");
}

}  // namespace lifebench
