// Operator-tree IR for executable query programs. A program is evaluated two
// ways: by the in-memory interpreter and by compilation to a single SELECT
// over the relational schema; both must agree.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lifebench/core/date.hpp"
#include "lifebench/vendor_json.hpp"

namespace lifebench::qlang {

enum class AggFn { Mean, Min, Max, Sum, Count, Median, Percentile };
enum class CmpOp { Gt, Ge, Lt, Le };
enum class CompareKind { Diff, Ratio, Greater };
enum class Extreme { Min, Max };
enum class RunMode { Exists, MaxRun };
enum class SetOpKind { Intersect, Union };
enum class SortOrder { Asc, Desc };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// Value kind a node produces; used for well-typedness checks.
enum class ValueType { Number, Bool, Text, Day, Series, DaySet, Events, SeriesGroup };

struct Node {
    enum class Kind {
        SelectSeries,     // (user, metric, window) -> Series
        SelectEvents,     // (user, metric, window [, category]) -> Events
        RestrictDays,     // (series|events, dayset) -> same kind
        AlignDays,        // (series...) -> SeriesGroup on common dates
        Pick,             // (group, index) -> Series
        Aggregate,        // (series|events, fn) -> Number
        Compare,          // (scalar, scalar, kind) -> Number | Bool
        ThresholdFilter,  // (series, cmp, scalar) -> DaySet
        CountDays,        // (dayset) -> Number
        ConsecutiveRun,   // (dayset, min_len, mode) -> Bool | Number
        Trend,            // (series) -> Text {increasing,decreasing,stable}
        ArgExtreme,       // (series, min|max) -> Day
        DominantCategory, // (events) -> Text
        CohortStat,       // (metric, window, stat) -> Number, all users two-stage
        RankUsers,        // (metric, window, order, k) -> list of user ids
        SetOp,            // (dayset...) -> DaySet
        Tuple,            // (scalar...) -> Pair/List answer
        Literal,          // -> Number
    };

    Kind kind = Kind::Literal;
    std::string user;
    std::string metric;
    TimeWindow window{};
    std::string category;  // SelectEvents filter; empty = all
    AggFn agg = AggFn::Mean;
    double percentile = 50.0;  // nearest-rank, (0, 100]
    CompareKind cmp_kind = CompareKind::Diff;
    CmpOp cmp = CmpOp::Gt;
    int min_len = 1;
    RunMode run_mode = RunMode::Exists;
    Extreme extreme = Extreme::Max;
    SortOrder order = SortOrder::Desc;
    int top_k = 1;
    SetOpKind set_op = SetOpKind::Intersect;
    int index = 0;
    double literal = 0.0;
    std::vector<NodePtr> children;
};

// Factory helpers keep template code readable.
NodePtr select_series(std::string user, std::string metric, TimeWindow w);
NodePtr select_events(std::string user, std::string metric, TimeWindow w,
                      std::string category = "");
NodePtr restrict_days(NodePtr child, NodePtr dayset);
NodePtr align_days(std::vector<NodePtr> series);
NodePtr pick(NodePtr group, int index);
NodePtr aggregate(AggFn fn, NodePtr child, double percentile = 50.0);
NodePtr compare(CompareKind kind, NodePtr left, NodePtr right);
NodePtr threshold_filter(NodePtr series, CmpOp cmp, NodePtr threshold);
NodePtr count_days(NodePtr dayset);
NodePtr consecutive_run(NodePtr dayset, int min_len, RunMode mode);
NodePtr trend(NodePtr series);
NodePtr arg_extreme(NodePtr series, Extreme e);
NodePtr dominant_category(NodePtr events);
NodePtr cohort_stat(std::string metric, TimeWindow w, AggFn stat, double percentile = 50.0);
NodePtr rank_users(std::string metric, TimeWindow w, SortOrder order, int k);
NodePtr set_op(SetOpKind kind, std::vector<NodePtr> daysets);
NodePtr tuple(std::vector<NodePtr> scalars);
NodePtr literal(double v);

// Infers the node's result type and validates children; throws
// std::runtime_error on ill-typed trees or unknown metrics.
ValueType check_types(const Node& n);

// Canonical JSON tree (stored with every benchmark instance).
nlohmann::ordered_json ir_to_json(const Node& n);
NodePtr ir_from_json(const nlohmann::json& j);

}  // namespace lifebench::qlang
