// The two prompting baselines: context prompting (records embedded in the
// prompt) and database-augmented prompting (model writes one SQL query, sees
// the results, then answers).
#pragma once

#include <string>
#include <vector>

#include "lifebench/benchgen/benchgen.hpp"
#include "lifebench/evalkit/evalkit.hpp"
#include "lifebench/llm/backend.hpp"

namespace lifebench::baselines {

struct CpConfig {
    int token_budget = 8000;  // approximate tokens; estimated as chars/4
};

// The records handed to the model under context prompting. Contains only
// rows of the instance's users inside its window; when the serialization
// exceeds the budget the oldest rows are dropped first and `truncated` set.
struct CpContext {
    std::vector<UserId> users;
    TimeWindow window{};
    std::string text;  // one record per line: [user] date metric=value unit
    bool truncated = false;
    int token_estimate = 0;
};

CpContext build_cp_context(const benchgen::QAInstance& inst, const AlignedDataset& ds,
                           int token_budget);

// Prompt builders are public so scripted replays can be constructed in tests
// and fixtures without duplicating prompt text.
std::vector<llm::ChatMessage> cp_messages(const benchgen::QAInstance& inst,
                                          const CpContext& ctx);
std::vector<llm::ChatMessage> dp_sql_messages(const benchgen::QAInstance& inst);
std::vector<llm::ChatMessage> dp_answer_messages(const benchgen::QAInstance& inst,
                                                 const std::string& sql_reply,
                                                 const std::string& stage_note);

// Last fenced code block in the reply (``` or ```sql), else the whole reply.
std::string extract_sql(const std::string& reply);

// One completion over the serialized context; backend failures come back as
// predictions with a parse failure, never as exceptions.
evalkit::Prediction run_cp(const benchgen::QAInstance& inst, const AlignedDataset& ds,
                           llm::Backend& backend, const CpConfig& config = {},
                           CpContext* context_out = nullptr);

// Two turns: question + schema -> SQL; validated/executed results -> answer.
// The model gets exactly one SQL attempt; an invalid statement still yields a
// best-effort answer request (scored by Acc only, va = false).
evalkit::Prediction run_dp(const benchgen::QAInstance& inst, const RelationalStore& store,
                           llm::Backend& backend);

// Acc from the parsed answer; VA/EX from the SQL stage when one exists
// (evidence items derived from the instance's reference program).
evalkit::Verdict score_prediction(const evalkit::Prediction& pred,
                                  const benchgen::QAInstance& inst, const AlignedDataset& ds);

}  // namespace lifebench::baselines
