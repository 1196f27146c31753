#include "lifebench/qlang/ir.hpp"

#include <map>
#include <stdexcept>

#include "lifebench/lifelog/registry.hpp"

namespace lifebench::qlang {

namespace {

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

[[noreturn]] void type_error(const std::string& msg) {
    throw std::runtime_error("type error: " + msg);
}

void require_daily_numeric(const std::string& metric) {
    const MetricInfo* m = find_metric(metric);
    if (!m) type_error("unknown metric '" + metric + "'");
    if (m->granularity != Granularity::Daily || m->kind != ValueKind::Number)
        type_error("metric '" + metric + "' is not a numeric daily metric");
}

bool is_scalar(ValueType t) {
    return t == ValueType::Number || t == ValueType::Bool || t == ValueType::Text ||
           t == ValueType::Day;
}

const std::map<std::string, Node::Kind>& kind_names() {
    static const std::map<std::string, Node::Kind> m = {
        {"select_series", Node::Kind::SelectSeries},
        {"select_events", Node::Kind::SelectEvents},
        {"restrict_days", Node::Kind::RestrictDays},
        {"align_days", Node::Kind::AlignDays},
        {"pick", Node::Kind::Pick},
        {"aggregate", Node::Kind::Aggregate},
        {"compare", Node::Kind::Compare},
        {"threshold_filter", Node::Kind::ThresholdFilter},
        {"count_days", Node::Kind::CountDays},
        {"consecutive_run", Node::Kind::ConsecutiveRun},
        {"trend", Node::Kind::Trend},
        {"arg_extreme", Node::Kind::ArgExtreme},
        {"dominant_category", Node::Kind::DominantCategory},
        {"cohort_stat", Node::Kind::CohortStat},
        {"rank_users", Node::Kind::RankUsers},
        {"set_op", Node::Kind::SetOp},
        {"tuple", Node::Kind::Tuple},
        {"literal", Node::Kind::Literal},
    };
    return m;
}

std::string kind_name(Node::Kind k) {
    for (const auto& [name, kind] : kind_names())
        if (kind == k) return name;
    return "?";
}

const char* agg_name(AggFn f) {
    switch (f) {
        case AggFn::Mean: return "mean";
        case AggFn::Min: return "min";
        case AggFn::Max: return "max";
        case AggFn::Sum: return "sum";
        case AggFn::Count: return "count";
        case AggFn::Median: return "median";
        case AggFn::Percentile: return "percentile";
    }
    return "?";
}

AggFn agg_from(const std::string& s) {
    for (AggFn f : {AggFn::Mean, AggFn::Min, AggFn::Max, AggFn::Sum, AggFn::Count,
                    AggFn::Median, AggFn::Percentile})
        if (s == agg_name(f)) return f;
    throw std::runtime_error("unknown aggregate fn: " + s);
}

const char* cmp_name(CmpOp c) {
    switch (c) {
        case CmpOp::Gt: return "gt";
        case CmpOp::Ge: return "ge";
        case CmpOp::Lt: return "lt";
        case CmpOp::Le: return "le";
    }
    return "?";
}

CmpOp cmp_from(const std::string& s) {
    for (CmpOp c : {CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le})
        if (s == cmp_name(c)) return c;
    throw std::runtime_error("unknown comparison op: " + s);
}

}  // namespace

NodePtr select_series(std::string user, std::string metric, TimeWindow w) {
    Node n;
    n.kind = Node::Kind::SelectSeries;
    n.user = std::move(user);
    n.metric = std::move(metric);
    n.window = w;
    return make(std::move(n));
}

NodePtr select_events(std::string user, std::string metric, TimeWindow w, std::string category) {
    Node n;
    n.kind = Node::Kind::SelectEvents;
    n.user = std::move(user);
    n.metric = std::move(metric);
    n.window = w;
    n.category = std::move(category);
    return make(std::move(n));
}

NodePtr restrict_days(NodePtr child, NodePtr dayset) {
    Node n;
    n.kind = Node::Kind::RestrictDays;
    n.children = {std::move(child), std::move(dayset)};
    return make(std::move(n));
}

NodePtr align_days(std::vector<NodePtr> series) {
    Node n;
    n.kind = Node::Kind::AlignDays;
    n.children = std::move(series);
    return make(std::move(n));
}

NodePtr pick(NodePtr group, int index) {
    Node n;
    n.kind = Node::Kind::Pick;
    n.index = index;
    n.children = {std::move(group)};
    return make(std::move(n));
}

NodePtr aggregate(AggFn fn, NodePtr child, double percentile) {
    Node n;
    n.kind = Node::Kind::Aggregate;
    n.agg = fn;
    n.percentile = percentile;
    n.children = {std::move(child)};
    return make(std::move(n));
}

NodePtr compare(CompareKind kind, NodePtr left, NodePtr right) {
    Node n;
    n.kind = Node::Kind::Compare;
    n.cmp_kind = kind;
    n.children = {std::move(left), std::move(right)};
    return make(std::move(n));
}

NodePtr threshold_filter(NodePtr series, CmpOp cmp, NodePtr threshold) {
    Node n;
    n.kind = Node::Kind::ThresholdFilter;
    n.cmp = cmp;
    n.children = {std::move(series), std::move(threshold)};
    return make(std::move(n));
}

NodePtr count_days(NodePtr dayset) {
    Node n;
    n.kind = Node::Kind::CountDays;
    n.children = {std::move(dayset)};
    return make(std::move(n));
}

NodePtr consecutive_run(NodePtr dayset, int min_len, RunMode mode) {
    Node n;
    n.kind = Node::Kind::ConsecutiveRun;
    n.min_len = min_len;
    n.run_mode = mode;
    n.children = {std::move(dayset)};
    return make(std::move(n));
}

NodePtr trend(NodePtr series) {
    Node n;
    n.kind = Node::Kind::Trend;
    n.children = {std::move(series)};
    return make(std::move(n));
}

NodePtr arg_extreme(NodePtr series, Extreme e) {
    Node n;
    n.kind = Node::Kind::ArgExtreme;
    n.extreme = e;
    n.children = {std::move(series)};
    return make(std::move(n));
}

NodePtr dominant_category(NodePtr events) {
    Node n;
    n.kind = Node::Kind::DominantCategory;
    n.children = {std::move(events)};
    return make(std::move(n));
}

NodePtr cohort_stat(std::string metric, TimeWindow w, AggFn stat, double percentile) {
    Node n;
    n.kind = Node::Kind::CohortStat;
    n.metric = std::move(metric);
    n.window = w;
    n.agg = stat;
    n.percentile = percentile;
    return make(std::move(n));
}

NodePtr rank_users(std::string metric, TimeWindow w, SortOrder order, int k) {
    Node n;
    n.kind = Node::Kind::RankUsers;
    n.metric = std::move(metric);
    n.window = w;
    n.order = order;
    n.top_k = k;
    return make(std::move(n));
}

NodePtr set_op(SetOpKind kind, std::vector<NodePtr> daysets) {
    Node n;
    n.kind = Node::Kind::SetOp;
    n.set_op = kind;
    n.children = std::move(daysets);
    return make(std::move(n));
}

NodePtr tuple(std::vector<NodePtr> scalars) {
    Node n;
    n.kind = Node::Kind::Tuple;
    n.children = std::move(scalars);
    return make(std::move(n));
}

NodePtr literal(double v) {
    Node n;
    n.kind = Node::Kind::Literal;
    n.literal = v;
    return make(std::move(n));
}

ValueType check_types(const Node& n) {
    auto child = [&](size_t i) -> const Node& {
        if (i >= n.children.size()) type_error(kind_name(n.kind) + ": missing child");
        return *n.children[i];
    };
    switch (n.kind) {
        case Node::Kind::SelectSeries:
            require_daily_numeric(n.metric);
            if (!(n.window.start <= n.window.end)) type_error("empty window");
            return ValueType::Series;
        case Node::Kind::SelectEvents: {
            const MetricInfo* m = find_metric(n.metric);
            if (!m || m->granularity != Granularity::Event)
                type_error("metric '" + n.metric + "' is not an event metric");
            return ValueType::Events;
        }
        case Node::Kind::RestrictDays: {
            ValueType base = check_types(child(0));
            if (base != ValueType::Series && base != ValueType::Events)
                type_error("restrict_days: child must be series or events");
            if (check_types(child(1)) != ValueType::DaySet)
                type_error("restrict_days: second child must be a day-set");
            return base;
        }
        case Node::Kind::AlignDays:
            if (n.children.size() < 2) type_error("align_days: needs >= 2 series");
            for (const auto& c : n.children)
                if (check_types(*c) != ValueType::Series)
                    type_error("align_days: children must be series");
            return ValueType::SeriesGroup;
        case Node::Kind::Pick:
            if (check_types(child(0)) != ValueType::SeriesGroup)
                type_error("pick: child must be align_days");
            if (n.index < 0 || static_cast<size_t>(n.index) >= child(0).children.size())
                type_error("pick: index out of range");
            return ValueType::Series;
        case Node::Kind::Aggregate: {
            ValueType t = check_types(child(0));
            if (t != ValueType::Series && t != ValueType::Events)
                type_error("aggregate: child must be series or events");
            if (n.agg == AggFn::Percentile && !(n.percentile > 0.0 && n.percentile <= 100.0))
                type_error("aggregate: percentile out of (0,100]");
            return ValueType::Number;
        }
        case Node::Kind::Compare: {
            if (check_types(child(0)) != ValueType::Number ||
                check_types(child(1)) != ValueType::Number)
                type_error("compare: operands must be numbers");
            return n.cmp_kind == CompareKind::Greater ? ValueType::Bool : ValueType::Number;
        }
        case Node::Kind::ThresholdFilter:
            if (check_types(child(0)) != ValueType::Series)
                type_error("threshold_filter: child must be series");
            if (check_types(child(1)) != ValueType::Number)
                type_error("threshold_filter: threshold must be a number");
            return ValueType::DaySet;
        case Node::Kind::CountDays:
            if (check_types(child(0)) != ValueType::DaySet)
                type_error("count_days: child must be a day-set");
            return ValueType::Number;
        case Node::Kind::ConsecutiveRun:
            if (check_types(child(0)) != ValueType::DaySet)
                type_error("consecutive_run: child must be a day-set");
            if (n.min_len < 1) type_error("consecutive_run: min_len must be >= 1");
            return n.run_mode == RunMode::Exists ? ValueType::Bool : ValueType::Number;
        case Node::Kind::Trend:
            if (check_types(child(0)) != ValueType::Series)
                type_error("trend: child must be series");
            return ValueType::Text;
        case Node::Kind::ArgExtreme:
            if (check_types(child(0)) != ValueType::Series)
                type_error("arg_extreme: child must be series");
            return ValueType::Day;
        case Node::Kind::DominantCategory: {
            if (check_types(child(0)) != ValueType::Events)
                type_error("dominant_category: child must be events");
            return ValueType::Text;
        }
        case Node::Kind::CohortStat:
            require_daily_numeric(n.metric);
            if (n.agg != AggFn::Mean && n.agg != AggFn::Median && n.agg != AggFn::Percentile)
                type_error("cohort_stat: stat must be mean, median, or percentile");
            return ValueType::Number;
        case Node::Kind::RankUsers:
            require_daily_numeric(n.metric);
            if (n.top_k < 1) type_error("rank_users: k must be >= 1");
            return ValueType::Text;  // list of user ids at the answer level
        case Node::Kind::SetOp:
            if (n.children.size() < 2) type_error("set_op: needs >= 2 day-sets");
            for (const auto& c : n.children)
                if (check_types(*c) != ValueType::DaySet)
                    type_error("set_op: children must be day-sets");
            return ValueType::DaySet;
        case Node::Kind::Tuple:
            if (n.children.size() < 2) type_error("tuple: needs >= 2 items");
            for (const auto& c : n.children) {
                ValueType t = check_types(*c);
                if (!is_scalar(t)) type_error("tuple: items must be scalars");
                if (c->kind == Node::Kind::RankUsers) type_error("tuple: no nested lists");
            }
            return ValueType::Text;  // answer-level Pair/List
        case Node::Kind::Literal:
            return ValueType::Number;
    }
    type_error("unknown node kind");
}

nlohmann::ordered_json ir_to_json(const Node& n) {
    nlohmann::ordered_json j;
    j["op"] = kind_name(n.kind);
    switch (n.kind) {
        case Node::Kind::SelectSeries:
            j["user"] = n.user;
            j["metric"] = n.metric;
            j["window"] = {format_date(n.window.start), format_date(n.window.end)};
            break;
        case Node::Kind::SelectEvents:
            j["user"] = n.user;
            j["metric"] = n.metric;
            j["window"] = {format_date(n.window.start), format_date(n.window.end)};
            if (!n.category.empty()) j["category"] = n.category;
            break;
        case Node::Kind::Aggregate:
            j["fn"] = agg_name(n.agg);
            if (n.agg == AggFn::Percentile) j["p"] = n.percentile;
            break;
        case Node::Kind::Compare:
            j["kind"] = n.cmp_kind == CompareKind::Diff    ? "diff"
                        : n.cmp_kind == CompareKind::Ratio ? "ratio"
                                                           : "greater";
            break;
        case Node::Kind::ThresholdFilter:
            j["cmp"] = cmp_name(n.cmp);
            break;
        case Node::Kind::ConsecutiveRun:
            j["min_len"] = n.min_len;
            j["mode"] = n.run_mode == RunMode::Exists ? "exists" : "max_run";
            break;
        case Node::Kind::ArgExtreme:
            j["extreme"] = n.extreme == Extreme::Max ? "max" : "min";
            break;
        case Node::Kind::CohortStat:
            j["metric"] = n.metric;
            j["window"] = {format_date(n.window.start), format_date(n.window.end)};
            j["stat"] = agg_name(n.agg);
            if (n.agg == AggFn::Percentile) j["p"] = n.percentile;
            break;
        case Node::Kind::RankUsers:
            j["metric"] = n.metric;
            j["window"] = {format_date(n.window.start), format_date(n.window.end)};
            j["order"] = n.order == SortOrder::Desc ? "desc" : "asc";
            j["k"] = n.top_k;
            break;
        case Node::Kind::SetOp:
            j["kind"] = n.set_op == SetOpKind::Intersect ? "intersect" : "union";
            break;
        case Node::Kind::Pick:
            j["index"] = n.index;
            break;
        case Node::Kind::Literal:
            j["value"] = n.literal;
            break;
        default:
            break;
    }
    if (!n.children.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& c : n.children) arr.push_back(ir_to_json(*c));
        j["children"] = std::move(arr);
    }
    return j;
}

NodePtr ir_from_json(const nlohmann::json& j) {
    Node n;
    const std::string op = j.at("op").get<std::string>();
    auto it = kind_names().find(op);
    if (it == kind_names().end()) throw std::runtime_error("unknown op: " + op);
    n.kind = it->second;

    auto window_of = [&](const nlohmann::json& w) -> TimeWindow {
        auto a = parse_date(w.at(0).get<std::string>());
        auto b = parse_date(w.at(1).get<std::string>());
        if (!a || !b) throw std::runtime_error("bad window in program json");
        return {*a, *b};
    };
    if (j.contains("user")) n.user = j["user"].get<std::string>();
    if (j.contains("metric")) n.metric = j["metric"].get<std::string>();
    if (j.contains("window")) n.window = window_of(j["window"]);
    if (j.contains("category")) n.category = j["category"].get<std::string>();
    if (j.contains("fn")) n.agg = agg_from(j["fn"].get<std::string>());
    if (j.contains("stat")) n.agg = agg_from(j["stat"].get<std::string>());
    if (j.contains("p")) n.percentile = j["p"].get<double>();
    if (j.contains("cmp")) n.cmp = cmp_from(j["cmp"].get<std::string>());
    if (j.contains("kind")) {
        const std::string k = j["kind"].get<std::string>();
        if (n.kind == Node::Kind::Compare) {
            n.cmp_kind = k == "diff" ? CompareKind::Diff
                         : k == "ratio" ? CompareKind::Ratio
                                        : CompareKind::Greater;
        } else if (n.kind == Node::Kind::SetOp) {
            n.set_op = k == "union" ? SetOpKind::Union : SetOpKind::Intersect;
        }
    }
    if (j.contains("min_len")) n.min_len = j["min_len"].get<int>();
    if (j.contains("mode"))
        n.run_mode = j["mode"].get<std::string>() == "exists" ? RunMode::Exists : RunMode::MaxRun;
    if (j.contains("extreme"))
        n.extreme = j["extreme"].get<std::string>() == "max" ? Extreme::Max : Extreme::Min;
    if (j.contains("order"))
        n.order = j["order"].get<std::string>() == "desc" ? SortOrder::Desc : SortOrder::Asc;
    if (j.contains("k")) n.top_k = j["k"].get<int>();
    if (j.contains("index")) n.index = j["index"].get<int>();
    if (j.contains("value")) n.literal = j["value"].get<double>();
    if (j.contains("children"))
        for (const auto& c : j["children"]) n.children.push_back(ir_from_json(c));
    return std::make_shared<const Node>(std::move(n));
}

}  // namespace lifebench::qlang
