// All model-facing prompt texts, versioned in one place. The files under
// prompts/ in the repository mirror these strings byte for byte (enforced by
// a test), so the shipped prompts are exactly what the code sends.
#pragma once

#include <map>
#include <string>

#include "lifebench/qlang/answer.hpp"

namespace lifebench::prompts {

extern const std::string kCpSystem;
extern const std::string kDpSqlSystem;
extern const std::string kDpAnswerRequest;
extern const std::string kAgentSystem;
extern const std::string kIntentSystem;
extern const std::string kDecomposeSystem;
extern const std::string kJudgeSystem;

// Short per-answer-kind instruction appended to questions.
std::string answer_format_hint(qlang::AnswerValue::Kind kind);

// filename (under prompts/) -> prompt text
const std::map<std::string, const std::string*>& registry();

}  // namespace lifebench::prompts
