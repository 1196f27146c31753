// Tool-using agent runtime: intent parse, retrieval agenda, an iterative
// action/observation loop with a step budget, deterministic tools over the
// store, and final synthesis from the accumulated evidence.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lifebench/benchgen/benchgen.hpp"
#include "lifebench/evalkit/evalkit.hpp"
#include "lifebench/lifelog/registry.hpp"
#include "lifebench/llm/backend.hpp"

namespace lifebench::agent {

struct Intent {
    benchgen::TaskType task = benchgen::TaskType::FQ;
    std::set<DomainTag> domains;  // empty means "all domains"
    TimeWindow window{};
    qlang::AnswerValue::Kind answer = qlang::AnswerValue::Kind::Text;
    bool defaulted = false;  // some fields fell back to defaults
};

enum class SubStatus { Pending, Done, Revised };

struct SubQuestion {
    std::string text;
    std::set<DomainTag> domains;
    TimeWindow window{};
    Granularity granularity = Granularity::Daily;
    SubStatus status = SubStatus::Pending;
};

struct Agenda {
    std::vector<SubQuestion> items;  // K >= 1
};

enum class ObsKind { Rows, Series, Scalar, Delta, Check, TrendInfo, Error };

struct Observation {
    int step = -1;
    std::string tool;
    ObsKind kind = ObsKind::Rows;
    std::string summary;  // compact text shown to the model
    nlohmann::ordered_json payload;
    std::string sql_trace;  // compiled SQL for retrieval tools
};

// Intermediate result the model can reference by name in compute expressions.
using NamedValue = std::variant<double, std::string>;

struct AgentState {
    std::string query;
    Intent intent;
    Agenda agenda;
    std::vector<Observation> evidence;        // append-only
    std::map<std::string, NamedValue> named;  // M_t
    int t = 0;
    int budget = 12;
};

struct ToolArgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ToolExecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Days whose value deviates from the window mean by more than k times the
// interquartile range — the drill-down anomaly criterion.
std::vector<Date> anomalous_days(const std::vector<std::pair<Date, double>>& series,
                                 double k = 1.5);

// events | daily_series retrieval through the compiled-SQL path; optional
// "stat" folds the series into a named scalar (or trend label / anomaly
// list). Row cap 1000. Throws ToolArgError / ToolExecError.
Observation tool_retrieve(const nlohmann::json& args, const AlignedDataset& ds,
                          const RelationalStore& store, AgentState& state);

// summary | rank | group_compare over all users.
Observation tool_cohort(const nlohmann::json& args, const AlignedDataset& ds,
                        AgentState& state);

// Arithmetic over named results and literals: + - * / parentheses,
// min, max, abs, round. Result is stored back into the state under
// args["name"]. Throws ToolArgError on undefined names or division by zero.
Observation tool_compute(const nlohmann::json& args, AgentState& state);

// Prompted intent parse with defaults (window: past 7 days ending at the
// dataset reference date; domains: all). Backend failure -> defaults with
// the `defaulted` flag. Empty query -> std::invalid_argument.
Intent parse_intent(const std::string& query, llm::Backend& backend, const AlignedDataset& ds);

// Prompted decomposition; unparseable plans fall back to a single
// sub-question covering the full intent.
Agenda decompose(const std::string& query, const Intent& intent, llm::Backend& backend);

struct StepOutcome {
    bool stopped = false;
    int backend_calls = 0;  // 1, or 2 when a malformed action was reprompted
    std::string action_text;
    std::optional<Observation> observation;  // absent on STOP
};

// One loop iteration: show the state, get exactly one fenced action block,
// execute it. Malformed actions get one reprompt, then a forced no-op.
// Tool failures become error observations, not exceptions.
StepOutcome step(AgentState& state, llm::Backend& backend, const AlignedDataset& ds,
                 const RelationalStore& store, bool allow_reprompt = true);

struct TraceEntry {
    int step = 0;
    std::string action;
    std::string observation;
    std::string sql_trace;
};

struct AgentResult {
    evalkit::Prediction prediction;
    std::vector<TraceEntry> trace;
    bool budget_exhausted = false;
    bool backend_failed = false;  // synthesis ran from partial evidence
    int backend_calls = 0;

    std::string trace_jsonl() const;
};

struct AgentOptions {
    int budget = 12;
    std::optional<qlang::AnswerValue::Kind> answer_kind;  // parse hint for scoring
    std::string instance_id;
};

// Full run: intent, agenda, loop until STOP or budget, one synthesis call.
// Backend calls <= budget + 3.
AgentResult run_agent(const std::string& query, const AlignedDataset& ds,
                      const RelationalStore& store, llm::Backend& backend,
                      const AgentOptions& options = {});

// Convenience wrapper wiring a benchmark instance's question and answer type.
AgentResult run_agent_on(const benchgen::QAInstance& inst, const AlignedDataset& ds,
                         const RelationalStore& store, llm::Backend& backend, int budget = 12);

}  // namespace lifebench::agent
