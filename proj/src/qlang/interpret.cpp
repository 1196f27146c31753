#include "lifebench/qlang/interpret.hpp"

#include <algorithm>
#include <set>
#include <variant>

#include "lifebench/lifelog/registry.hpp"

namespace lifebench::qlang {

namespace {

// Intermediate evaluation result; scalar kinds mirror AnswerItem.
struct Value {
    ValueType type = ValueType::Number;
    double num = 0.0;
    bool flag = false;
    std::string text;
    Date day{};
    std::vector<std::pair<Date, double>> series;
    std::vector<Date> days;                    // sorted, unique
    std::vector<std::pair<Date, MetricValue>> events;
    std::vector<std::vector<std::pair<Date, double>>> group;
};

[[noreturn]] void mismatch(const char* where, const std::string& msg) {
    throw EvalError(EvalError::Kind::TypeMismatch, where, msg);
}

void require_metric(const Node& n) {
    if (!find_metric(n.metric))
        throw EvalError(EvalError::Kind::UnknownMetric, "select", "no metric '" + n.metric + "'");
}

Value eval(const Node& n, const AlignedDataset& ds);

Value eval_child(const Node& n, size_t i, const AlignedDataset& ds) {
    if (i >= n.children.size()) mismatch("eval", "missing operand");
    return eval(*n.children[i], ds);
}

std::vector<double> numbers_of(const Value& v) {
    std::vector<double> xs;
    if (v.type == ValueType::Series) {
        xs.reserve(v.series.size());
        for (const auto& [_, x] : v.series) xs.push_back(x);
    } else if (v.type == ValueType::Events) {
        xs.reserve(v.events.size());
        for (const auto& [_, mv] : v.events) {
            if (!std::holds_alternative<double>(mv))
                mismatch("aggregate", "categorical events have no numeric value");
            xs.push_back(std::get<double>(mv));
        }
    } else {
        mismatch("aggregate", "operand is neither series nor events");
    }
    return xs;
}

Value eval(const Node& n, const AlignedDataset& ds) {
    Value v;
    switch (n.kind) {
        case Node::Kind::SelectSeries: {
            require_metric(n);
            v.type = ValueType::Series;
            v.series = ds.series(n.user, n.metric, n.window);
            return v;
        }
        case Node::Kind::SelectEvents: {
            require_metric(n);
            v.type = ValueType::Events;
            for (const EventRecord* e : ds.events_in(n.user, n.metric, n.window)) {
                if (!n.category.empty() &&
                    (!std::holds_alternative<std::string>(e->value) ||
                     std::get<std::string>(e->value) != n.category))
                    continue;
                v.events.emplace_back(e->date(), e->value);
            }
            return v;
        }
        case Node::Kind::RestrictDays: {
            Value base = eval_child(n, 0, ds);
            Value ds_v = eval_child(n, 1, ds);
            if (ds_v.type != ValueType::DaySet) mismatch("restrict_days", "need a day-set");
            std::set<Date> keep(ds_v.days.begin(), ds_v.days.end());
            v.type = base.type;
            if (base.type == ValueType::Series) {
                for (const auto& pt : base.series)
                    if (keep.count(pt.first)) v.series.push_back(pt);
            } else if (base.type == ValueType::Events) {
                for (const auto& ev : base.events)
                    if (keep.count(ev.first)) v.events.push_back(ev);
            } else {
                mismatch("restrict_days", "base must be series or events");
            }
            return v;
        }
        case Node::Kind::AlignDays: {
            std::vector<Value> kids;
            for (size_t i = 0; i < n.children.size(); ++i) kids.push_back(eval_child(n, i, ds));
            std::set<Date> common;
            for (size_t i = 0; i < kids.size(); ++i) {
                if (kids[i].type != ValueType::Series)
                    mismatch("align_days", "children must be series");
                std::set<Date> dates;
                for (const auto& [d, _] : kids[i].series) dates.insert(d);
                if (i == 0) {
                    common = std::move(dates);
                } else {
                    std::set<Date> kept;
                    for (Date d : common)
                        if (dates.count(d)) kept.insert(d);
                    common = std::move(kept);
                }
            }
            v.type = ValueType::SeriesGroup;
            for (auto& k : kids) {
                std::vector<std::pair<Date, double>> s;
                for (const auto& pt : k.series)
                    if (common.count(pt.first)) s.push_back(pt);
                v.group.push_back(std::move(s));
            }
            return v;
        }
        case Node::Kind::Pick: {
            Value g = eval_child(n, 0, ds);
            if (g.type != ValueType::SeriesGroup) mismatch("pick", "need an aligned group");
            if (n.index < 0 || static_cast<size_t>(n.index) >= g.group.size())
                mismatch("pick", "index out of range");
            v.type = ValueType::Series;
            v.series = std::move(g.group[static_cast<size_t>(n.index)]);
            return v;
        }
        case Node::Kind::Aggregate: {
            Value c = eval_child(n, 0, ds);
            v.type = ValueType::Number;
            if (n.agg == AggFn::Count && c.type == ValueType::Events) {
                // counting events never inspects values, so categorical ones count too
                v.num = static_cast<double>(c.events.size());
            } else {
                v.num = aggregate_values(numbers_of(c), n.agg, n.percentile);
            }
            return v;
        }
        case Node::Kind::Compare: {
            Value a = eval_child(n, 0, ds);
            Value b = eval_child(n, 1, ds);
            if (a.type != ValueType::Number || b.type != ValueType::Number)
                mismatch("compare", "operands must be numbers");
            if (n.cmp_kind == CompareKind::Greater) {
                v.type = ValueType::Bool;
                v.flag = a.num > b.num;
            } else {
                v.type = ValueType::Number;
                v.num = n.cmp_kind == CompareKind::Diff ? a.num - b.num : a.num / b.num;
            }
            return v;
        }
        case Node::Kind::ThresholdFilter: {
            Value s = eval_child(n, 0, ds);
            Value t = eval_child(n, 1, ds);
            if (s.type != ValueType::Series) mismatch("threshold_filter", "need a series");
            if (t.type != ValueType::Number) mismatch("threshold_filter", "need a number");
            v.type = ValueType::DaySet;
            for (const auto& [d, x] : s.series) {
                bool keep = n.cmp == CmpOp::Gt   ? x > t.num
                            : n.cmp == CmpOp::Ge ? x >= t.num
                            : n.cmp == CmpOp::Lt ? x < t.num
                                                 : x <= t.num;
                if (keep) v.days.push_back(d);
            }
            return v;
        }
        case Node::Kind::CountDays: {
            Value d = eval_child(n, 0, ds);
            if (d.type != ValueType::DaySet) mismatch("count_days", "need a day-set");
            v.type = ValueType::Number;
            v.num = static_cast<double>(d.days.size());
            return v;
        }
        case Node::Kind::ConsecutiveRun: {
            Value d = eval_child(n, 0, ds);
            if (d.type != ValueType::DaySet) mismatch("consecutive_run", "need a day-set");
            RunStats rs = consecutive_run(d.days, n.min_len);
            if (n.run_mode == RunMode::Exists) {
                v.type = ValueType::Bool;
                v.flag = rs.exists;
            } else {
                v.type = ValueType::Number;
                v.num = rs.max_run;
            }
            return v;
        }
        case Node::Kind::Trend: {
            Value s = eval_child(n, 0, ds);
            if (s.type != ValueType::Series) mismatch("trend", "need a series");
            v.type = ValueType::Text;
            v.text = to_string(trend_direction(s.series));
            return v;
        }
        case Node::Kind::ArgExtreme: {
            Value s = eval_child(n, 0, ds);
            if (s.type != ValueType::Series) mismatch("arg_extreme", "need a series");
            if (s.series.empty())
                throw EvalError(EvalError::Kind::EmptyWindow, "arg_extreme", "empty series");
            size_t best = 0;
            for (size_t i = 1; i < s.series.size(); ++i) {
                // strict comparison keeps the earliest date on ties
                bool better = n.extreme == Extreme::Max
                                  ? s.series[i].second > s.series[best].second
                                  : s.series[i].second < s.series[best].second;
                if (better) best = i;
            }
            v.type = ValueType::Day;
            v.day = s.series[best].first;
            return v;
        }
        case Node::Kind::DominantCategory: {
            Value e = eval_child(n, 0, ds);
            if (e.type != ValueType::Events) mismatch("dominant_category", "need events");
            std::vector<std::string> cats;
            for (const auto& [_, mv] : e.events) {
                if (!std::holds_alternative<std::string>(mv))
                    mismatch("dominant_category", "events carry no category");
                cats.push_back(std::get<std::string>(mv));
            }
            v.type = ValueType::Text;
            v.text = dominant_category(cats);
            return v;
        }
        case Node::Kind::CohortStat: {
            require_metric(n);
            v.type = ValueType::Number;
            v.num = cohort_stat(ds, n.metric, n.window, n.agg, n.percentile);
            return v;
        }
        case Node::Kind::RankUsers:
            mismatch("rank_users", "only valid at the program root");
        case Node::Kind::SetOp: {
            std::set<Date> acc;
            for (size_t i = 0; i < n.children.size(); ++i) {
                Value c = eval_child(n, i, ds);
                if (c.type != ValueType::DaySet) mismatch("set_op", "children must be day-sets");
                std::set<Date> cur(c.days.begin(), c.days.end());
                if (i == 0) {
                    acc = std::move(cur);
                } else if (n.set_op == SetOpKind::Union) {
                    acc.insert(cur.begin(), cur.end());
                } else {
                    std::set<Date> kept;
                    for (Date d : acc)
                        if (cur.count(d)) kept.insert(d);
                    acc = std::move(kept);
                }
            }
            v.type = ValueType::DaySet;
            v.days.assign(acc.begin(), acc.end());
            return v;
        }
        case Node::Kind::Tuple:
            mismatch("tuple", "only valid at the program root");
        case Node::Kind::Literal:
            v.type = ValueType::Number;
            v.num = n.literal;
            return v;
    }
    mismatch("eval", "unknown node kind");
}

AnswerItem item_of(const Value& v) {
    switch (v.type) {
        case ValueType::Number: return AnswerItem::number(v.num);
        case ValueType::Bool: return AnswerItem::label(v.flag ? "yes" : "no");
        case ValueType::Text: return AnswerItem::label(v.text);
        case ValueType::Day: return AnswerItem::day(v.day);
        default: mismatch("tuple", "items must be scalars");
    }
}

}  // namespace

AnswerValue interpret(const Node& program, const AlignedDataset& ds) {
    if (program.kind == Node::Kind::Tuple) {
        std::vector<AnswerItem> items;
        for (const auto& c : program.children) items.push_back(item_of(eval(*c, ds)));
        if (items.size() < 2) mismatch("tuple", "needs >= 2 items");
        if (items.size() == 2) return AnswerValue::pair(items[0], items[1]);
        return AnswerValue::list(std::move(items));
    }
    if (program.kind == Node::Kind::RankUsers) {
        if (!find_metric(program.metric))
            throw EvalError(EvalError::Kind::UnknownMetric, "rank_users",
                            "no metric '" + program.metric + "'");
        auto users = rank_users(ds, program.metric, program.window, program.order,
                                program.top_k);
        if (static_cast<int>(users.size()) < program.top_k)
            throw EvalError(EvalError::Kind::EmptyWindow, "rank_users",
                            "fewer users with data than requested");
        if (users.size() == 1) return AnswerValue::label(users[0]);
        std::vector<AnswerItem> items;
        for (auto& u : users) items.push_back(AnswerItem::label(std::move(u)));
        if (items.size() == 2) return AnswerValue::pair(items[0], items[1]);
        return AnswerValue::list(std::move(items));
    }
    Value v = eval(program, ds);
    switch (v.type) {
        case ValueType::Number: return AnswerValue::number(v.num);
        case ValueType::Bool: return AnswerValue::yes_no(v.flag);
        case ValueType::Text: return AnswerValue::label(v.text);
        case ValueType::Day: return AnswerValue::label(format_date(v.day));
        default: mismatch("interpret", "program root must produce a scalar");
    }
}

}  // namespace lifebench::qlang
