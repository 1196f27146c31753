#include "lifebench/qlang/compile.hpp"

#include <stdexcept>

#include "lifebench/core/num.hpp"

namespace lifebench::qlang {

namespace {

[[noreturn]] void unsupported(const std::string& what) {
    throw std::runtime_error("cannot compile: " + what);
}

std::string quoted(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        out += c;
        if (c == '\'') out += '\'';
    }
    out += "'";
    return out;
}

std::string num_lit(double v) { return format_number(v); }

std::string window_clause(const TimeWindow& w) {
    return "date BETWEEN " + quoted(format_date(w.start)) + " AND " + quoted(format_date(w.end));
}

// Relation of (date, value) rows for a series-typed subtree.
std::string series_sql(const Node& n);
// Relation of (date) rows for a day-set-typed subtree.
std::string dayset_sql(const Node& n);
// Relation of (date, value_num, value_text) rows for an events subtree.
std::string events_sql(const Node& n);
// Scalar numeric expression (parenthesized).
std::string number_sql(const Node& n);

// Per-user window means: (user_id, value) rows, the input to cohort
// statistics and rankings.
std::string user_means_sql(const std::string& metric, const TimeWindow& w) {
    return "SELECT user_id, AVG(value_num) AS value FROM daily_metrics WHERE metric = " +
           quoted(metric) + " AND " + window_clause(w) + " GROUP BY user_id";
}

// Aggregate over a relation exposing a `value` column.
std::string aggregate_sql(const std::string& rel, AggFn fn, double percentile) {
    const std::string sub = "(" + rel + ")";
    switch (fn) {
        case AggFn::Mean: return "(SELECT AVG(value) FROM " + sub + ")";
        case AggFn::Sum: return "(SELECT SUM(value) FROM " + sub + ")";
        case AggFn::Min: return "(SELECT MIN(value) FROM " + sub + ")";
        case AggFn::Max: return "(SELECT MAX(value) FROM " + sub + ")";
        case AggFn::Count: return "(SELECT COUNT(*) FROM " + sub + ")";
        case AggFn::Median: {
            const std::string cnt = "(SELECT COUNT(*) FROM " + sub + ")";
            return "(SELECT AVG(value) FROM (SELECT value FROM " + sub +
                   " ORDER BY value LIMIT 2 - (" + cnt + " % 2) OFFSET (" + cnt + " - 1) / 2))";
        }
        case AggFn::Percentile: {
            // nearest-rank: the ceil(p/100 * n)-th smallest value
            const std::string x =
                "(" + num_lit(percentile) + " * (SELECT COUNT(*) FROM " + sub + ") / 100.0)";
            const std::string rank =
                "(CAST(" + x + " AS INTEGER) + (" + x + " > CAST(" + x + " AS INTEGER)))";
            return "(SELECT value FROM " + sub + " ORDER BY value LIMIT 1 OFFSET MAX(" + rank +
                   ", 1) - 1)";
        }
    }
    unsupported("aggregate fn");
}

// Longest streak of calendar-consecutive dates in a day-set relation.
std::string max_run_sql(const std::string& dayset) {
    return "(SELECT COALESCE(MAX(n), 0) FROM (SELECT COUNT(*) AS n FROM (SELECT julianday(date)"
           " - ROW_NUMBER() OVER (ORDER BY date) AS grp FROM (" +
           dayset + ")) GROUP BY grp))";
}

// CASE expression labeling the least-squares slope of a series relation.
std::string trend_sql(const std::string& series) {
    const std::string xs =
        "SELECT julianday(date) - (SELECT MIN(julianday(date)) FROM (" + series +
        ")) AS x, value AS v FROM (" + series + ")";
    const std::string stats =
        "SELECT COUNT(*) * 1.0 AS n, SUM(x) AS sx, SUM(v) AS sy, SUM(x * x) AS sxx,"
        " SUM(x * v) AS sxy, MIN(v) AS lo, MAX(v) AS hi FROM (" +
        xs + ")";
    const std::string slope = "((n * sxy - sx * sy) / (n * sxx - sx * sx))";
    return "(SELECT CASE WHEN n * sxx - sx * sx = 0.0 THEN 'stable'"
           " WHEN ABS(" + slope + ") <= 0.05 * (hi - lo) / n THEN 'stable'"
           " WHEN " + slope + " > 0.0 THEN 'increasing' ELSE 'decreasing' END FROM (" +
           stats + "))";
}

std::string series_sql(const Node& n) {
    switch (n.kind) {
        case Node::Kind::SelectSeries:
            return "SELECT date, value_num AS value FROM daily_metrics WHERE user_id = " +
                   quoted(n.user) + " AND metric = " + quoted(n.metric) + " AND " +
                   window_clause(n.window);
        case Node::Kind::RestrictDays:
            return "SELECT date, value FROM (" + series_sql(*n.children.at(0)) +
                   ") WHERE date IN (SELECT date FROM (" + dayset_sql(*n.children.at(1)) + "))";
        case Node::Kind::Pick: {
            const Node& group = *n.children.at(0);
            if (group.kind != Node::Kind::AlignDays) unsupported("pick without align_days");
            std::string sql = "SELECT date, value FROM (" +
                              series_sql(*group.children.at(static_cast<size_t>(n.index))) + ")";
            const char* sep = " WHERE ";
            for (size_t i = 0; i < group.children.size(); ++i) {
                if (static_cast<int>(i) == n.index) continue;
                sql += sep;
                sql += "date IN (SELECT date FROM (" + series_sql(*group.children[i]) + "))";
                sep = " AND ";
            }
            return sql;
        }
        default: unsupported("node does not produce a series");
    }
}

std::string events_sql(const Node& n) {
    switch (n.kind) {
        case Node::Kind::SelectEvents: {
            std::string sql =
                "SELECT date, value_num, value_text FROM events WHERE user_id = " +
                quoted(n.user) + " AND metric = " + quoted(n.metric) + " AND " +
                window_clause(n.window);
            if (!n.category.empty()) sql += " AND value_text = " + quoted(n.category);
            return sql;
        }
        case Node::Kind::RestrictDays:
            return "SELECT date, value_num, value_text FROM (" + events_sql(*n.children.at(0)) +
                   ") WHERE date IN (SELECT date FROM (" + dayset_sql(*n.children.at(1)) + "))";
        default: unsupported("node does not produce events");
    }
}

std::string dayset_sql(const Node& n) {
    switch (n.kind) {
        case Node::Kind::ThresholdFilter: {
            const char* op = n.cmp == CmpOp::Gt   ? ">"
                             : n.cmp == CmpOp::Ge ? ">="
                             : n.cmp == CmpOp::Lt ? "<"
                                                  : "<=";
            return "SELECT date FROM (" + series_sql(*n.children.at(0)) + ") WHERE value " + op +
                   " " + number_sql(*n.children.at(1));
        }
        case Node::Kind::SetOp: {
            std::string sql;
            const char* glue = n.set_op == SetOpKind::Intersect ? " INTERSECT " : " UNION ";
            for (size_t i = 0; i < n.children.size(); ++i) {
                if (i) sql += glue;
                sql += "SELECT date FROM (" + dayset_sql(*n.children[i]) + ")";
            }
            return sql;
        }
        default: unsupported("node does not produce a day-set");
    }
}

std::string number_sql(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Literal: return "(" + num_lit(n.literal) + ")";
        case Node::Kind::Aggregate: {
            const Node& c = *n.children.at(0);
            std::string rel;
            if (c.kind == Node::Kind::SelectEvents ||
                (c.kind == Node::Kind::RestrictDays &&
                 check_types(c) == ValueType::Events)) {
                rel = "SELECT value_num AS value FROM (" + events_sql(c) + ")";
            } else {
                rel = "SELECT value FROM (" + series_sql(c) + ")";
            }
            return aggregate_sql(rel, n.agg, n.percentile);
        }
        case Node::Kind::Compare: {
            const std::string a = number_sql(*n.children.at(0));
            const std::string b = number_sql(*n.children.at(1));
            if (n.cmp_kind == CompareKind::Diff) return "(" + a + " - " + b + ")";
            if (n.cmp_kind == CompareKind::Ratio) return "(" + a + " * 1.0 / " + b + ")";
            unsupported("boolean compare used as a number");
        }
        case Node::Kind::CountDays:
            return "(SELECT COUNT(*) FROM (" + dayset_sql(*n.children.at(0)) + "))";
        case Node::Kind::ConsecutiveRun:
            if (n.run_mode != RunMode::MaxRun) unsupported("boolean run used as a number");
            return max_run_sql(dayset_sql(*n.children.at(0)));
        case Node::Kind::CohortStat:
            return aggregate_sql("SELECT value FROM (" + user_means_sql(n.metric, n.window) + ")",
                                 n.agg, n.percentile);
        default: unsupported("node does not produce a number");
    }
}

// Scalar expression for text-valued subtrees (dates render as ISO text).
std::string text_sql(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Trend: return trend_sql(series_sql(*n.children.at(0)));
        case Node::Kind::ArgExtreme: {
            const char* dir = n.extreme == Extreme::Max ? "DESC" : "ASC";
            return "(SELECT date FROM (" + series_sql(*n.children.at(0)) + ") ORDER BY value " +
                   dir + ", date ASC LIMIT 1)";
        }
        case Node::Kind::DominantCategory:
            return "(SELECT value_text FROM (" + events_sql(*n.children.at(0)) +
                   ") GROUP BY value_text ORDER BY COUNT(*) DESC, value_text ASC LIMIT 1)";
        default: unsupported("node does not produce text");
    }
}

// One column expression per scalar subtree; booleans become 'yes'/'no'.
std::string item_sql(const Node& n) {
    if (n.kind == Node::Kind::Compare && n.cmp_kind == CompareKind::Greater) {
        return "(CASE WHEN " + number_sql(*n.children.at(0)) + " > " +
               number_sql(*n.children.at(1)) + " THEN 'yes' ELSE 'no' END)";
    }
    if (n.kind == Node::Kind::ConsecutiveRun && n.run_mode == RunMode::Exists) {
        return "(CASE WHEN " + max_run_sql(dayset_sql(*n.children.at(0))) + " >= " +
               std::to_string(n.min_len) + " THEN 'yes' ELSE 'no' END)";
    }
    switch (check_types(n)) {
        case ValueType::Number: return number_sql(n);
        case ValueType::Text:
        case ValueType::Day: return text_sql(n);
        default: unsupported("tuple item is not a scalar");
    }
}

}  // namespace

AnswerValue::Kind answer_kind_of(const Node& program) {
    if (program.kind == Node::Kind::Tuple)
        return program.children.size() == 2 ? AnswerValue::Kind::Pair : AnswerValue::Kind::List;
    if (program.kind == Node::Kind::RankUsers) {
        if (program.top_k == 1) return AnswerValue::Kind::Text;
        return program.top_k == 2 ? AnswerValue::Kind::Pair : AnswerValue::Kind::List;
    }
    switch (check_types(program)) {
        case ValueType::Number: return AnswerValue::Kind::Number;
        case ValueType::Bool: return AnswerValue::Kind::YesNo;
        case ValueType::Text:
        case ValueType::Day: return AnswerValue::Kind::Text;
        default: throw std::runtime_error("program root does not produce an answer");
    }
}

std::string compile_relation_sql(const Node& subtree) {
    ValueType t = check_types(subtree);
    if (t == ValueType::Series)
        return "SELECT date, value FROM (" + series_sql(subtree) + ") ORDER BY date";
    if (t == ValueType::Events)
        return "SELECT date, value_num, value_text FROM (" + events_sql(subtree) +
               ") ORDER BY date";
    unsupported("relation SQL needs a series or events subtree");
}

std::string compile_to_sql(const Node& program) {
    check_types(program);
    // yes/no roots also expose their operand values so the decision is auditable
    if (program.kind == Node::Kind::Compare && program.cmp_kind == CompareKind::Greater) {
        return "SELECT " + number_sql(*program.children.at(0)) + " AS lhs, " +
               number_sql(*program.children.at(1)) + " AS rhs, " + item_sql(program) +
               " AS answer";
    }
    if (program.kind == Node::Kind::ConsecutiveRun && program.run_mode == RunMode::Exists) {
        return "SELECT " + max_run_sql(dayset_sql(*program.children.at(0))) + " AS max_run, " +
               item_sql(program) + " AS answer";
    }
    if (program.kind == Node::Kind::RankUsers) {
        const char* dir = program.order == SortOrder::Desc ? "DESC" : "ASC";
        return "SELECT user_id FROM (" + user_means_sql(program.metric, program.window) +
               ") ORDER BY value " + dir + ", user_id ASC LIMIT " +
               std::to_string(program.top_k);
    }
    if (program.kind == Node::Kind::Tuple) {
        std::string sql = "SELECT ";
        for (size_t i = 0; i < program.children.size(); ++i) {
            if (i) sql += ", ";
            sql += item_sql(*program.children[i]) + " AS item_" + std::to_string(i + 1);
        }
        return sql;
    }
    return "SELECT " + item_sql(program) + " AS answer";
}

namespace {

[[noreturn]] void shape_error(const std::string& msg) {
    throw std::runtime_error("ShapeMismatch: " + msg);
}

double cell_number(const Cell& c) {
    if (std::holds_alternative<double>(c)) return std::get<double>(c);
    if (std::holds_alternative<std::string>(c)) {
        if (auto v = parse_number(std::get<std::string>(c))) return *v;
    }
    shape_error("expected a numeric cell");
}

std::string cell_text(const Cell& c) {
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
    shape_error("expected a non-null cell");
}

AnswerItem cell_item(const Cell& c) {
    if (std::holds_alternative<double>(c)) return AnswerItem::number(std::get<double>(c));
    const std::string s = cell_text(c);
    if (auto d = parse_date(s)) return AnswerItem::day(*d);
    return AnswerItem::label(s);
}

}  // namespace

AnswerValue decode_result(const ResultTable& table, AnswerValue::Kind expected) {
    const size_t rows = table.rows.size();
    const size_t cols = table.columns.size();
    switch (expected) {
        case AnswerValue::Kind::YesNo: {
            if (rows != 1 || cols < 1) shape_error("yes/no needs exactly one row");
            const std::string s = cell_text(table.rows[0].back());
            if (s != "yes" && s != "no") shape_error("expected 'yes' or 'no', got '" + s + "'");
            return AnswerValue::yes_no(s == "yes");
        }
        case AnswerValue::Kind::Number:
            if (rows != 1 || cols < 1) shape_error("number needs exactly one row");
            return AnswerValue::number(cell_number(table.rows[0].back()));
        case AnswerValue::Kind::Text:
            if (rows != 1 || cols < 1) shape_error("text needs exactly one row");
            return AnswerValue::label(cell_text(table.rows[0].back()));
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            std::vector<AnswerItem> items;
            if (rows == 1 && cols >= 2) {
                for (const Cell& c : table.rows[0]) items.push_back(cell_item(c));
            } else if (cols >= 1) {
                for (const auto& row : table.rows) items.push_back(cell_item(row[0]));
            }
            if (expected == AnswerValue::Kind::Pair) {
                if (items.size() != 2) shape_error("pair needs exactly two items");
                return AnswerValue::pair(items[0], items[1]);
            }
            if (items.size() < 3) shape_error("list needs at least three items");
            return AnswerValue::list(std::move(items));
        }
    }
    shape_error("unknown answer kind");
}

}  // namespace lifebench::qlang
