// In-memory program interpreter — the ground-truth side of dual execution.
#pragma once

#include "lifebench/lifelog/types.hpp"
#include "lifebench/qlang/answer.hpp"
#include "lifebench/qlang/ir.hpp"
#include "lifebench/qlang/ops.hpp"

namespace lifebench::qlang {

// Bottom-up deterministic evaluation; throws EvalError (EmptyWindow,
// UnknownMetric, TypeMismatch, TooFewPoints) naming the offending node.
AnswerValue interpret(const Node& program, const AlignedDataset& ds);

}  // namespace lifebench::qlang
