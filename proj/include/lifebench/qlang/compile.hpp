// Program-to-SQL compiler — the checked side of dual execution. Every program
// compiles to one SELECT over the relational schema; decode_result maps the
// executed table back to an AnswerValue for comparison against the interpreter.
//
// Result-shape contract by answer kind:
//   Number / Text  -> one row; the last column holds the value
//   YesNo          -> one row; operand columns first, last column 'yes'/'no'
//   Pair / List    -> one row with one column per item, or one item per row
#pragma once

#include "lifebench/qlang/answer.hpp"
#include "lifebench/qlang/ir.hpp"
#include "lifebench/store/store.hpp"

namespace lifebench::qlang {

// Answer kind the program's root produces (drives decoding and scoring).
AnswerValue::Kind answer_kind_of(const Node& program);

// Single-SELECT translation; throws std::runtime_error for trees the schema
// cannot express (these never come out of the shipped templates).
std::string compile_to_sql(const Node& program);

// Decodes an executed table per the contract above; throws std::runtime_error
// with a "ShapeMismatch" message when the table does not fit the answer kind.
AnswerValue decode_result(const ResultTable& table, AnswerValue::Kind expected);

// Relation SQL for non-scalar subtrees (retrieval tools): series roots yield
// (date, value) and event roots (date, value_num, value_text), date-ordered.
std::string compile_relation_sql(const Node& subtree);

}  // namespace lifebench::qlang
