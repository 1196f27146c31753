#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "lifebench/agent/agent.hpp"
#include "lifebench/core/num.hpp"
#include "lifebench/lifelog/registry.hpp"
#include "lifebench/qlang/compile.hpp"
#include "lifebench/qlang/ops.hpp"

namespace lifebench::agent {

namespace {

std::string arg_str(const nlohmann::json& args, const char* key) {
    if (!args.contains(key) || !args[key].is_string())
        throw ToolArgError(std::string("missing or non-string argument: ") + key);
    return args[key].get<std::string>();
}

std::string arg_str_or(const nlohmann::json& args, const char* key, const std::string& dflt) {
    if (!args.contains(key)) return dflt;
    if (!args[key].is_string())
        throw ToolArgError(std::string("argument must be a string: ") + key);
    return args[key].get<std::string>();
}

TimeWindow arg_window(const nlohmann::json& args, const AlignedDataset& ds) {
    auto s = parse_date(arg_str(args, "start"));
    auto e = parse_date(arg_str(args, "end"));
    if (!s || !e) throw ToolArgError("start/end must be ISO dates (YYYY-MM-DD)");
    if (*e < *s) throw ToolArgError("window end precedes start");
    TimeWindow w{*s, *e};
    if (w.end < ds.date_span.start || ds.date_span.end < w.start)
        throw ToolArgError("window lies outside the recorded span " +
                           format_date(ds.date_span.start) + ".." +
                           format_date(ds.date_span.end));
    return w;
}

// mean/median/min/max/sum/count or "p<k>" percentile
std::pair<qlang::AggFn, double> parse_stat(const std::string& s) {
    using qlang::AggFn;
    if (s == "mean") return {AggFn::Mean, 50.0};
    if (s == "median") return {AggFn::Median, 50.0};
    if (s == "min") return {AggFn::Min, 50.0};
    if (s == "max") return {AggFn::Max, 50.0};
    if (s == "sum") return {AggFn::Sum, 50.0};
    if (s == "count") return {AggFn::Count, 50.0};
    if (s.size() > 1 && s[0] == 'p') {
        try {
            double p = std::stod(s.substr(1));
            if (p > 0.0 && p <= 100.0) return {AggFn::Percentile, p};
        } catch (...) {
        }
    }
    throw ToolArgError("unknown stat: " + s);
}

std::string default_name(const AgentState& state) {
    return "m" + std::to_string(state.t);
}

ResultTable run_tool_sql(const RelationalStore& store, const std::string& sql) {
    ExecLimits limits;
    limits.max_rows = 1000;  // tool row cap
    auto res = store.execute_select(sql, limits);
    if (res.status == ExecStatus::RowLimitExceeded)
        throw ToolExecError("result exceeds the 1000-row tool cap; narrow the window");
    if (res.status != ExecStatus::Ok) throw ToolExecError("query failed: " + res.message);
    return res.table;
}

}  // namespace

std::vector<Date> anomalous_days(const std::vector<std::pair<Date, double>>& series, double k) {
    std::vector<Date> out;
    if (series.size() < 4) return out;  // an IQR needs a few points
    std::vector<double> vals;
    double mean = 0.0;
    for (const auto& [_, v] : series) {
        vals.push_back(v);
        mean += v;
    }
    mean /= static_cast<double>(vals.size());
    const double q1 = qlang::aggregate_values(vals, qlang::AggFn::Percentile, 25.0);
    const double q3 = qlang::aggregate_values(vals, qlang::AggFn::Percentile, 75.0);
    const double iqr = q3 - q1;
    for (const auto& [d, v] : series)
        if (std::abs(v - mean) > k * iqr) out.push_back(d);
    return out;
}

Observation tool_retrieve(const nlohmann::json& args, const AlignedDataset& ds,
                          const RelationalStore& store, AgentState& state) {
    Observation obs;
    obs.step = state.t;
    obs.tool = "retrieve";
    const std::string kind = arg_str(args, "kind");
    const std::string user = arg_str(args, "user");
    const std::string metric = arg_str(args, "metric");
    const MetricInfo* info = find_metric(metric);
    if (info == nullptr) throw ToolArgError("unknown metric: " + metric);
    if (!ds.users.count(user)) throw ToolArgError("unknown user: " + user);
    const TimeWindow w = arg_window(args, ds);

    if (kind == "events") {
        if (info->granularity != Granularity::Event)
            throw ToolArgError(metric + " is a daily metric; use daily_series");
        auto prog = qlang::select_events(user, metric, w, arg_str_or(args, "category", ""));
        obs.sql_trace = qlang::compile_relation_sql(*prog);
        ResultTable t = run_tool_sql(store, obs.sql_trace);
        obs.kind = ObsKind::Rows;
        obs.payload["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json r = nlohmann::ordered_json::array();
            for (const auto& cell : row) {
                if (const double* d = std::get_if<double>(&cell)) r.push_back(*d);
                else if (const std::string* s = std::get_if<std::string>(&cell)) r.push_back(*s);
                else r.push_back(nullptr);
            }
            obs.payload["rows"].push_back(std::move(r));
        }
        obs.summary = std::to_string(t.rows.size()) + " event(s):\n" + t.render_text(20);
        return obs;
    }
    if (kind != "daily_series") throw ToolArgError("retrieve kind must be events or daily_series");
    if (info->granularity != Granularity::Daily || info->kind != ValueKind::Number)
        throw ToolArgError(metric + " is not a numeric daily metric");

    auto prog = qlang::select_series(user, metric, w);
    obs.sql_trace = qlang::compile_relation_sql(*prog);
    ResultTable t = run_tool_sql(store, obs.sql_trace);
    std::vector<std::pair<Date, double>> series;
    for (const auto& row : t.rows) {
        // compiled series relations expose (date, value)
        const std::string* d = std::get_if<std::string>(&row.at(0));
        const double* v = std::get_if<double>(&row.at(1));
        if (d == nullptr || v == nullptr) continue;
        auto date = parse_date(*d);
        if (date) series.emplace_back(*date, *v);
    }

    const std::string stat = arg_str_or(args, "stat", "");
    const std::string name = arg_str_or(args, "name", default_name(state));
    if (stat.empty()) {
        obs.kind = ObsKind::Series;
        std::string txt;
        for (const auto& [d, v] : series) {
            obs.payload["series"].push_back({format_date(d), v});
            txt += format_date(d) + "=" + format_number(v) + " ";
        }
        obs.summary = metric + " for " + user + ", " + std::to_string(series.size()) +
                      " point(s): " + txt;
        return obs;
    }
    if (stat == "trend") {
        std::string label;
        try {
            label = qlang::to_string(qlang::trend_direction(series));
        } catch (const qlang::EvalError& e) {
            throw ToolExecError(e.what());
        }
        state.named[name] = label;
        obs.kind = ObsKind::TrendInfo;
        obs.payload["trend"] = label;
        obs.summary = name + " = " + label + " (trend of " + metric + ")";
        return obs;
    }
    if (stat == "anomalies") {
        auto days = anomalous_days(series);
        obs.kind = ObsKind::Check;
        std::string txt;
        for (Date d : days) {
            obs.payload["days"].push_back(format_date(d));
            txt += format_date(d) + " ";
        }
        obs.summary = std::to_string(days.size()) + " anomalous day(s) " + txt;
        return obs;
    }
    auto [fn, pct] = parse_stat(stat);
    std::vector<double> vals;
    for (const auto& [_, v] : series) vals.push_back(v);
    double value;
    try {
        value = qlang::aggregate_values(std::move(vals), fn, pct);
    } catch (const qlang::EvalError& e) {
        throw ToolExecError(e.what());
    }
    state.named[name] = value;
    obs.kind = ObsKind::Scalar;
    obs.payload["value"] = value;
    obs.payload["name"] = name;
    obs.summary = name + " = " + format_number(value) + " (" + stat + " of " + metric + " for " +
                  user + ")";
    return obs;
}

Observation tool_cohort(const nlohmann::json& args, const AlignedDataset& ds,
                        AgentState& state) {
    Observation obs;
    obs.step = state.t;
    obs.tool = "cohort";
    const std::string kind = arg_str(args, "kind");
    const std::string metric = arg_str(args, "metric");
    const MetricInfo* info = find_metric(metric);
    if (info == nullptr) throw ToolArgError("unknown metric: " + metric);
    if (info->granularity != Granularity::Daily || info->kind != ValueKind::Number)
        throw ToolArgError(metric + " is not a numeric daily metric");
    const TimeWindow w = arg_window(args, ds);
    const std::string name = arg_str_or(args, "name", default_name(state));

    if (kind == "summary") {
        auto [fn, pct] = parse_stat(arg_str_or(args, "stat", "mean"));
        double value;
        try {
            value = qlang::cohort_stat(ds, metric, w, fn, pct);
        } catch (const qlang::EvalError& e) {
            throw ToolExecError(e.what());
        }
        state.named[name] = value;
        obs.kind = ObsKind::Scalar;
        obs.payload["value"] = value;
        obs.payload["name"] = name;
        obs.summary = name + " = " + format_number(value) + " (cohort " +
                      arg_str_or(args, "stat", "mean") + " of " + metric + ")";
        return obs;
    }
    if (kind == "rank") {
        int k = args.contains("k") && args["k"].is_number() ? args["k"].get<int>() : 1;
        if (k < 1) throw ToolArgError("k must be >= 1");
        const std::string order_s = arg_str_or(args, "order", "desc");
        if (order_s != "asc" && order_s != "desc") throw ToolArgError("order must be asc or desc");
        auto order = order_s == "desc" ? qlang::SortOrder::Desc : qlang::SortOrder::Asc;
        auto ids = qlang::rank_users(ds, metric, w, order, k);
        obs.kind = ObsKind::Rows;
        std::string txt;
        for (const auto& id : ids) {
            obs.payload["users"].push_back(id);
            txt += id + " ";
        }
        obs.summary = "top " + std::to_string(ids.size()) + " by " + metric + " (" + order_s +
                      "): " + txt;
        return obs;
    }
    if (kind == "group_compare") {
        const std::string split_metric = arg_str(args, "split_metric");
        if (find_metric(split_metric) == nullptr)
            throw ToolArgError("unknown metric: " + split_metric);
        if (!args.contains("split_threshold") || !args["split_threshold"].is_number())
            throw ToolArgError("group_compare needs a numeric split_threshold");
        const double thr = args["split_threshold"].get<double>();

        // per-user window means of both metrics; split on the criterion metric
        std::vector<double> hi, lo;
        for (const auto& u : ds.users) {
            auto split_series = ds.series(u, split_metric, w);
            auto value_series = ds.series(u, metric, w);
            if (split_series.empty() || value_series.empty()) continue;
            double sm = 0.0, vm = 0.0;
            for (const auto& [_, v] : split_series) sm += v;
            sm /= static_cast<double>(split_series.size());
            for (const auto& [_, v] : value_series) vm += v;
            vm /= static_cast<double>(value_series.size());
            (sm > thr ? hi : lo).push_back(vm);
        }
        if (hi.empty() || lo.empty())
            throw ToolExecError("a comparison group is empty at threshold " +
                                format_number(thr));
        auto mean_of = [](const std::vector<double>& xs) {
            double s = 0.0;
            for (double x : xs) s += x;
            return s / static_cast<double>(xs.size());
        };
        const double above = mean_of(hi), below = mean_of(lo);
        state.named[name] = above - below;
        obs.kind = ObsKind::Delta;
        obs.payload["above_mean"] = above;
        obs.payload["below_mean"] = below;
        obs.payload["delta"] = above - below;
        obs.payload["n_above"] = static_cast<int>(hi.size());
        obs.payload["n_below"] = static_cast<int>(lo.size());
        obs.payload["name"] = name;
        obs.summary = name + " = " + format_number(above - below) + " (mean " + metric +
                      ", users with " + split_metric + " > " + format_number(thr) + " [n=" +
                      std::to_string(hi.size()) + "] minus the rest [n=" +
                      std::to_string(lo.size()) + "])";
        return obs;
    }
    throw ToolArgError("cohort kind must be summary, rank, or group_compare");
}

namespace {

// recursive-descent arithmetic over literals and named scalars
class ExprParser {
public:
    ExprParser(const std::string& text, const std::map<std::string, NamedValue>& names)
        : s_(text), names_(names) {}

    double parse() {
        double v = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ToolArgError("unexpected trailing input in expression");
        return v;
    }

private:
    double expr() {
        double v = term();
        while (true) {
            skip_ws();
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }
    double term() {
        double v = factor();
        while (true) {
            skip_ws();
            if (eat('*')) v *= factor();
            else if (eat('/')) {
                double d = factor();
                if (d == 0.0) throw ToolArgError("division by zero");
                v /= d;
            } else {
                return v;
            }
        }
    }
    double factor() {
        skip_ws();
        if (eat('-')) return -factor();
        if (eat('(')) {
            double v = expr();
            expect(')');
            return v;
        }
        if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                                 s_[pos_] == '.')) {
            size_t used = 0;
            double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            return v;
        }
        std::string id = ident();
        if (id.empty()) throw ToolArgError("expected a number, name, or function");
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            if (id == "abs" || id == "round") {
                double a = expr();
                expect(')');
                return id == "abs" ? std::abs(a) : std::round(a);
            }
            if (id == "min" || id == "max") {
                double a = expr();
                expect(',');
                double b = expr();
                expect(')');
                return id == "min" ? std::min(a, b) : std::max(a, b);
            }
            throw ToolArgError("unknown function: " + id);
        }
        auto it = names_.find(id);
        if (it == names_.end()) throw ToolArgError("undefined name: " + id);
        if (const double* d = std::get_if<double>(&it->second)) return *d;
        throw ToolArgError("name holds a label, not a number: " + id);
    }
    std::string ident() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                s_[pos_] == '.'))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) throw ToolArgError(std::string("expected '") + c + "' in expression");
    }

    const std::string& s_;
    const std::map<std::string, NamedValue>& names_;
    size_t pos_ = 0;
};

}  // namespace

Observation tool_compute(const nlohmann::json& args, AgentState& state) {
    Observation obs;
    obs.step = state.t;
    obs.tool = "compute";
    const std::string expression = arg_str(args, "expression");
    const std::string name = arg_str_or(args, "name", default_name(state));
    const double value = ExprParser(expression, state.named).parse();
    state.named[name] = value;
    obs.kind = ObsKind::Scalar;
    obs.payload["value"] = value;
    obs.payload["name"] = name;
    obs.payload["expression"] = expression;
    obs.summary = name + " = " + format_number(value) + " (from " + expression + ")";
    return obs;
}

}  // namespace lifebench::agent
