// Answer parsing, accuracy/validity/execution scoring, faceted reporting,
// and the rubric judge for open-ended responses.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lifebench/benchgen/benchgen.hpp"
#include "lifebench/llm/backend.hpp"
#include "lifebench/qlang/answer.hpp"
#include "lifebench/store/store.hpp"

namespace lifebench::evalkit {

// One model output. dp_* fields are present only for runs that produced SQL
// (database-augmented prompting or an agent with an SQL trace).
struct Prediction {
    std::string instance_id;
    std::string raw_text;
    std::optional<qlang::AnswerValue> parsed;  // empty = parse failure (scored incorrect)
    std::string parse_error;
    std::optional<std::string> dp_sql;
    std::optional<SqlDiagnostic> dp_diag;
    std::optional<ResultTable> dp_result;
};

struct Verdict {
    bool acc = false;
    std::optional<bool> va;  // defined only for SQL-producing runs
    std::optional<bool> ex;  // defined only when va = true
};

// Extracts the value from the last "ANSWER: ..." line; falls back to the last
// parseable value of the expected type anywhere in the text. Empty optional
// means the text had no usable answer.
std::optional<qlang::AnswerValue> parse_answer(const std::string& raw_text,
                                               qlang::AnswerValue::Kind expected,
                                               std::string* error = nullptr);

// Numeric correctness rule: integer ground truths up to 14 allow +-1,
// everything else allows max(0.5% of |gt|, 0.01). Tolerance depends on the
// ground truth only, never on the prediction.
bool number_matches(double pred, double gt);

// Full answer correctness: YesNo exact, numbers per number_matches, text by
// normalized exact match, pair/list by cardinality plus greedy multiset
// matching of items.
bool score_accuracy(const qlang::AnswerValue& pred, const qlang::AnswerValue& gt);

// Lowercased, trimmed, inner whitespace collapsed — the text-match normal form.
std::string normalize_text(const std::string& s);

// Validity and execution-correctness of an SQL stage. VA holds iff the SQL
// was a single SELECT that ran cleanly. EX (checked only under VA) holds iff
// every expected item appears among the result cells under the same per-item
// tolerance as score_accuracy. For yes/no ground truths the expected items
// are the pre-decision scalars the reference program compares (pass them as
// `evidence`); without evidence the yes/no label itself is looked up.
std::pair<bool, bool> score_dp_stage(const SqlDiagnostic& diag, const ResultTable& result,
                                     const qlang::AnswerValue& gt,
                                     const std::vector<qlang::AnswerItem>& evidence = {});

// Pre-decision scalars for a yes/no program: the two compared means for a
// greater-than question, the longest-streak length for a streak question.
// For other answer kinds returns the ground-truth items themselves.
std::vector<qlang::AnswerItem> evidence_items(const qlang::Node& program,
                                              const AlignedDataset& ds);

struct EmptyEvaluation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FacetRow {
    std::string key;
    int n = 0;
    int acc_n = 0;
    int va_defined = 0, va_n = 0;
    int ex_n = 0;
    int accex_n = 0;
    double acc_pct = 0.0;
    std::optional<double> va_pct, ex_pct, accex_pct;
};

struct Report {
    int total = 0;
    double acc_pct = 0.0;              // percentages rounded to 2 decimals
    std::optional<double> va_pct;      // absent when no run produced SQL
    std::optional<double> ex_pct;      // denominator: va-defined instances
    std::optional<double> accex_pct;   // denominator: ex = true; absent when that is 0
    std::vector<FacetRow> by_task, by_answer, by_scope, by_domains;

    nlohmann::ordered_json to_json() const;
    std::string facet_csv() const;  // one table, columns facet/key/metrics
};

// verdicts[i] scores instances[i]; facets cover task type, answer type,
// scope, and number of domains touched.
Report aggregate_report(const std::vector<Verdict>& verdicts,
                        const std::vector<benchgen::QAInstance>& instances);

struct JudgeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::array<const char*, 6> kJudgeDimensions = {
    "faithfulness",     "aggregation correctness", "coverage",
    "actionability",    "personalization",         "conciseness"};

// Scores an open-ended response on the six dimensions (1-5 each) with a
// single rubric prompt. Non-parseable judge output is retried once.
std::array<int, 6> judge_open_ended(const std::string& task_text,
                                    const std::string& evidence_bundle,
                                    const std::string& response_text, llm::Backend& backend);

}  // namespace lifebench::evalkit
