#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <variant>

namespace lifebench::testing {

using qlang::AggFn;
using qlang::AnswerItem;
using qlang::AnswerValue;
using qlang::CmpOp;
using qlang::CompareKind;
using qlang::Extreme;
using qlang::Node;
using qlang::RunMode;
using qlang::SetOpKind;
using qlang::SortOrder;

namespace {

struct SeriesPt {
    Date date;
    double value;
};

struct Ev {
    Date date;
    std::string category;
    double number;
    bool numeric;
};

// Intermediate value of a subtree during brute-force evaluation.
struct Val {
    enum class Tag { Number, Bool, Text, Day, Series, DaySet, Events, Group };
    Tag tag = Tag::Number;
    double num = 0.0;
    bool b = false;
    std::string text;
    Date day{};
    std::vector<SeriesPt> series;
    std::set<Date> days;
    std::vector<Ev> events;
    std::vector<std::vector<SeriesPt>> group;
};

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("oracle: " + msg); }

std::vector<SeriesPt> scan_series(const AlignedDataset& ds, const std::string& user,
                                  const std::string& metric, const TimeWindow& w) {
    std::vector<SeriesPt> out;
    for (const auto& row : ds.daily) {
        if (row.user != user || row.metric != metric) continue;
        if (row.date < w.start || w.end < row.date) continue;
        if (!std::holds_alternative<double>(row.value)) fail("non-numeric daily value");
        out.push_back({row.date, std::get<double>(row.value)});
    }
    std::sort(out.begin(), out.end(), [](const SeriesPt& a, const SeriesPt& b) {
        return a.date < b.date;
    });
    return out;
}

std::vector<Ev> scan_events(const AlignedDataset& ds, const std::string& user,
                            const std::string& metric, const TimeWindow& w,
                            const std::string& category) {
    std::vector<Ev> out;
    for (const auto& row : ds.events) {
        if (row.user != user || row.metric != metric) continue;
        Date d = row.date();
        if (d < w.start || w.end < d) continue;
        Ev e;
        e.date = d;
        if (std::holds_alternative<double>(row.value)) {
            e.numeric = true;
            e.number = std::get<double>(row.value);
        } else {
            e.numeric = false;
            e.category = std::get<std::string>(row.value);
        }
        if (!category.empty() && e.category != category) continue;
        out.push_back(std::move(e));
    }
    return out;
}

double naive_aggregate(std::vector<double> xs, AggFn fn, double p) {
    if (fn == AggFn::Count) return static_cast<double>(xs.size());
    if (xs.empty()) fail("aggregate over empty window");
    switch (fn) {
        case AggFn::Sum: {
            double s = 0;
            for (double x : xs) s += x;
            return s;
        }
        case AggFn::Mean: {
            double s = 0;
            for (double x : xs) s += x;
            return s / static_cast<double>(xs.size());
        }
        case AggFn::Min: return *std::min_element(xs.begin(), xs.end());
        case AggFn::Max: return *std::max_element(xs.begin(), xs.end());
        case AggFn::Median: {
            std::sort(xs.begin(), xs.end());
            size_t n = xs.size();
            if (n % 2 == 1) return xs[n / 2];
            return (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
        }
        case AggFn::Percentile: {
            std::sort(xs.begin(), xs.end());
            // nearest-rank: smallest value whose rank >= p% of n
            size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(xs.size())));
            if (rank < 1) rank = 1;
            return xs[rank - 1];
        }
        default: fail("bad aggregate fn");
    }
}

// Per-user mean of a daily metric over a window, for every user with data.
std::map<std::string, double> user_window_means(const AlignedDataset& ds,
                                                const std::string& metric, const TimeWindow& w) {
    std::map<std::string, double> means;
    for (const auto& user : ds.users) {
        auto s = scan_series(ds, user, metric, w);
        if (s.empty()) continue;
        double sum = 0;
        for (const auto& pt : s) sum += pt.value;
        means[user] = sum / static_cast<double>(s.size());
    }
    return means;
}

int max_consecutive_run(const std::set<Date>& days) {
    int best = 0, run = 0;
    Date prev{};
    bool have_prev = false;
    for (Date d : days) {
        if (have_prev && d.days == prev.days + 1)
            ++run;
        else
            run = 1;
        best = std::max(best, run);
        prev = d;
        have_prev = true;
    }
    return best;
}

std::string naive_trend(const std::vector<SeriesPt>& s) {
    if (s.size() < 3) fail("trend needs >= 3 points");
    double n = static_cast<double>(s.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double lo = s.front().value, hi = s.front().value;
    for (const auto& pt : s) {
        double x = static_cast<double>(pt.date.days - s.front().date.days);
        sx += x;
        sy += pt.value;
        sxx += x * x;
        sxy += x * pt.value;
        lo = std::min(lo, pt.value);
        hi = std::max(hi, pt.value);
    }
    double denom = n * sxx - sx * sx;
    double slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
    double eps = 0.05 * (hi - lo) / n;
    if (std::abs(slope) <= eps) return "stable";
    return slope > 0 ? "increasing" : "decreasing";
}

Val eval(const Node& nd, const AlignedDataset& ds);

std::vector<double> scalar_values(const Val& v) {
    std::vector<double> xs;
    if (v.tag == Val::Tag::Series) {
        for (const auto& pt : v.series) xs.push_back(pt.value);
    } else if (v.tag == Val::Tag::Events) {
        for (const auto& e : v.events) {
            if (!e.numeric) fail("aggregate over categorical events");
            xs.push_back(e.number);
        }
    } else {
        fail("aggregate needs series or events");
    }
    return xs;
}

Val eval(const Node& nd, const AlignedDataset& ds) {
    Val v;
    switch (nd.kind) {
        case Node::Kind::SelectSeries:
            v.tag = Val::Tag::Series;
            v.series = scan_series(ds, nd.user, nd.metric, nd.window);
            return v;
        case Node::Kind::SelectEvents:
            v.tag = Val::Tag::Events;
            v.events = scan_events(ds, nd.user, nd.metric, nd.window, nd.category);
            return v;
        case Node::Kind::RestrictDays: {
            Val base = eval(*nd.children.at(0), ds);
            Val days = eval(*nd.children.at(1), ds);
            if (days.tag != Val::Tag::DaySet) fail("restrict_days needs a day-set");
            if (base.tag == Val::Tag::Series) {
                Val out;
                out.tag = Val::Tag::Series;
                for (const auto& pt : base.series)
                    if (days.days.count(pt.date)) out.series.push_back(pt);
                return out;
            }
            if (base.tag == Val::Tag::Events) {
                Val out;
                out.tag = Val::Tag::Events;
                for (const auto& e : base.events)
                    if (days.days.count(e.date)) out.events.push_back(e);
                return out;
            }
            fail("restrict_days base must be series or events");
        }
        case Node::Kind::AlignDays: {
            std::vector<std::vector<SeriesPt>> all;
            for (const auto& c : nd.children) {
                Val cv = eval(*c, ds);
                if (cv.tag != Val::Tag::Series) fail("align_days child must be series");
                all.push_back(std::move(cv.series));
            }
            // keep only dates present in every child series
            std::map<Date, int> counts;
            for (const auto& s : all)
                for (const auto& pt : s) counts[pt.date]++;
            v.tag = Val::Tag::Group;
            for (const auto& s : all) {
                std::vector<SeriesPt> kept;
                for (const auto& pt : s)
                    if (counts[pt.date] == static_cast<int>(all.size())) kept.push_back(pt);
                v.group.push_back(std::move(kept));
            }
            return v;
        }
        case Node::Kind::Pick: {
            Val g = eval(*nd.children.at(0), ds);
            if (g.tag != Val::Tag::Group) fail("pick needs align_days");
            v.tag = Val::Tag::Series;
            v.series = g.group.at(static_cast<size_t>(nd.index));
            return v;
        }
        case Node::Kind::Aggregate: {
            Val c = eval(*nd.children.at(0), ds);
            v.tag = Val::Tag::Number;
            if (nd.agg == AggFn::Count) {
                // count ignores values entirely, so categorical events are fine
                if (c.tag == Val::Tag::Events)
                    v.num = static_cast<double>(c.events.size());
                else if (c.tag == Val::Tag::Series)
                    v.num = static_cast<double>(c.series.size());
                else
                    fail("aggregate needs series or events");
            } else {
                v.num = naive_aggregate(scalar_values(c), nd.agg, nd.percentile);
            }
            return v;
        }
        case Node::Kind::Compare: {
            Val a = eval(*nd.children.at(0), ds);
            Val b = eval(*nd.children.at(1), ds);
            if (a.tag != Val::Tag::Number || b.tag != Val::Tag::Number)
                fail("compare needs numbers");
            if (nd.cmp_kind == CompareKind::Greater) {
                v.tag = Val::Tag::Bool;
                v.b = a.num > b.num;
            } else {
                v.tag = Val::Tag::Number;
                v.num = nd.cmp_kind == CompareKind::Diff ? a.num - b.num : a.num / b.num;
            }
            return v;
        }
        case Node::Kind::ThresholdFilter: {
            Val s = eval(*nd.children.at(0), ds);
            Val t = eval(*nd.children.at(1), ds);
            if (s.tag != Val::Tag::Series || t.tag != Val::Tag::Number)
                fail("threshold_filter needs series and number");
            v.tag = Val::Tag::DaySet;
            for (const auto& pt : s.series) {
                bool keep = false;
                switch (nd.cmp) {
                    case CmpOp::Gt: keep = pt.value > t.num; break;
                    case CmpOp::Ge: keep = pt.value >= t.num; break;
                    case CmpOp::Lt: keep = pt.value < t.num; break;
                    case CmpOp::Le: keep = pt.value <= t.num; break;
                }
                if (keep) v.days.insert(pt.date);
            }
            return v;
        }
        case Node::Kind::CountDays: {
            Val d = eval(*nd.children.at(0), ds);
            if (d.tag != Val::Tag::DaySet) fail("count_days needs a day-set");
            v.tag = Val::Tag::Number;
            v.num = static_cast<double>(d.days.size());
            return v;
        }
        case Node::Kind::ConsecutiveRun: {
            Val d = eval(*nd.children.at(0), ds);
            if (d.tag != Val::Tag::DaySet) fail("consecutive_run needs a day-set");
            int run = max_consecutive_run(d.days);
            if (nd.run_mode == RunMode::Exists) {
                v.tag = Val::Tag::Bool;
                v.b = run >= nd.min_len;
            } else {
                v.tag = Val::Tag::Number;
                v.num = run;
            }
            return v;
        }
        case Node::Kind::Trend: {
            Val s = eval(*nd.children.at(0), ds);
            if (s.tag != Val::Tag::Series) fail("trend needs a series");
            v.tag = Val::Tag::Text;
            v.text = naive_trend(s.series);
            return v;
        }
        case Node::Kind::ArgExtreme: {
            Val s = eval(*nd.children.at(0), ds);
            if (s.tag != Val::Tag::Series) fail("arg_extreme needs a series");
            if (s.series.empty()) fail("arg_extreme over empty window");
            const SeriesPt* best = &s.series.front();
            for (const auto& pt : s.series) {
                bool better = nd.extreme == Extreme::Max ? pt.value > best->value
                                                         : pt.value < best->value;
                if (better) best = &pt;  // earliest date wins ties (series is sorted)
            }
            v.tag = Val::Tag::Day;
            v.day = best->date;
            return v;
        }
        case Node::Kind::DominantCategory: {
            Val e = eval(*nd.children.at(0), ds);
            if (e.tag != Val::Tag::Events) fail("dominant_category needs events");
            if (e.events.empty()) fail("dominant_category over empty window");
            std::map<std::string, int> freq;
            for (const auto& ev : e.events) {
                if (ev.numeric) fail("dominant_category over numeric events");
                freq[ev.category]++;
            }
            // std::map iterates lexicographically, so first max is the tie-break winner
            auto best = freq.begin();
            for (auto it = freq.begin(); it != freq.end(); ++it)
                if (it->second > best->second) best = it;
            v.tag = Val::Tag::Text;
            v.text = best->first;
            return v;
        }
        case Node::Kind::CohortStat: {
            auto means = user_window_means(ds, nd.metric, nd.window);
            if (means.empty()) fail("cohort_stat over empty window");
            std::vector<double> xs;
            for (const auto& [_, m] : means) xs.push_back(m);
            v.tag = Val::Tag::Number;
            v.num = naive_aggregate(std::move(xs), nd.agg, nd.percentile);
            return v;
        }
        case Node::Kind::RankUsers: {
            auto means = user_window_means(ds, nd.metric, nd.window);
            std::vector<std::pair<std::string, double>> rows(means.begin(), means.end());
            std::stable_sort(rows.begin(), rows.end(),
                             [&](const auto& a, const auto& b) {
                                 if (a.second != b.second)
                                     return nd.order == SortOrder::Desc ? a.second > b.second
                                                                        : a.second < b.second;
                                 return a.first < b.first;
                             });
            if (static_cast<int>(rows.size()) > nd.top_k) rows.resize(static_cast<size_t>(nd.top_k));
            v.tag = Val::Tag::Text;  // packed by oracle_eval below
            v.text = "";
            for (size_t i = 0; i < rows.size(); ++i) {
                if (i) v.text += "\n";
                v.text += rows[i].first;
            }
            return v;
        }
        case Node::Kind::SetOp: {
            std::vector<std::set<Date>> sets;
            for (const auto& c : nd.children) {
                Val cv = eval(*c, ds);
                if (cv.tag != Val::Tag::DaySet) fail("set_op child must be a day-set");
                sets.push_back(std::move(cv.days));
            }
            v.tag = Val::Tag::DaySet;
            v.days = sets.front();
            for (size_t i = 1; i < sets.size(); ++i) {
                if (nd.set_op == SetOpKind::Union) {
                    v.days.insert(sets[i].begin(), sets[i].end());
                } else {
                    std::set<Date> kept;
                    for (Date d : v.days)
                        if (sets[i].count(d)) kept.insert(d);
                    v.days = std::move(kept);
                }
            }
            return v;
        }
        case Node::Kind::Tuple:
            fail("tuple is only valid at the root");
        case Node::Kind::Literal:
            v.tag = Val::Tag::Number;
            v.num = nd.literal;
            return v;
    }
    fail("unknown node");
}

AnswerItem item_of(const Val& v) {
    switch (v.tag) {
        case Val::Tag::Number: return AnswerItem::number(v.num);
        case Val::Tag::Bool: return AnswerItem::label(v.b ? "yes" : "no");
        case Val::Tag::Text: return AnswerItem::label(v.text);
        case Val::Tag::Day: return AnswerItem::day(v.day);
        default: fail("tuple item must be a scalar");
    }
}

}  // namespace

AnswerValue oracle_eval(const Node& program, const AlignedDataset& ds) {
    if (program.kind == Node::Kind::Tuple) {
        std::vector<AnswerItem> items;
        for (const auto& c : program.children) items.push_back(item_of(eval(*c, ds)));
        if (items.size() == 2) return AnswerValue::pair(items[0], items[1]);
        return AnswerValue::list(std::move(items));
    }
    if (program.kind == Node::Kind::RankUsers) {
        Val v = eval(program, ds);
        std::vector<AnswerItem> items;
        std::string cur;
        for (char ch : v.text + "\n") {
            if (ch == '\n') {
                if (!cur.empty()) items.push_back(AnswerItem::label(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (static_cast<int>(items.size()) != program.top_k)
            fail("rank_users returned fewer users than requested");
        if (items.size() == 1) return AnswerValue::label(items[0].text);
        if (items.size() == 2) return AnswerValue::pair(items[0], items[1]);
        return AnswerValue::list(std::move(items));
    }
    Val v = eval(program, ds);
    switch (v.tag) {
        case Val::Tag::Number: return AnswerValue::number(v.num);
        case Val::Tag::Bool: return AnswerValue::yes_no(v.b);
        case Val::Tag::Text: return AnswerValue::label(v.text);
        case Val::Tag::Day: return AnswerValue::label(format_date(v.day));
        default: fail("program root must produce a scalar answer");
    }
}

}  // namespace lifebench::testing
