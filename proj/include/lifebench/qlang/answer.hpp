// Typed answer values shared by ground truths, predictions, and scoring.
#pragma once

#include <string>
#include <vector>

#include "lifebench/core/date.hpp"
#include "lifebench/vendor_json.hpp"

namespace lifebench::qlang {

struct AnswerItem {
    enum class Kind { Number, Text, Date };
    Kind kind = Kind::Number;
    double num = 0.0;
    std::string text;
    Date date{};

    static AnswerItem number(double v) { return {Kind::Number, v, "", {}}; }
    static AnswerItem label(std::string s) { return {Kind::Text, 0.0, std::move(s), {}}; }
    static AnswerItem day(Date d) { return {Kind::Date, 0.0, "", d}; }

    bool operator==(const AnswerItem&) const = default;
};

struct AnswerValue {
    enum class Kind { YesNo, Number, Text, Pair, List };
    Kind kind = Kind::Number;
    bool yesno = false;
    double num = 0.0;
    std::string text;
    std::vector<AnswerItem> items;  // Pair: exactly 2, List: >= 3

    static AnswerValue yes_no(bool b) { return {Kind::YesNo, b, 0.0, "", {}}; }
    static AnswerValue number(double v) { return {Kind::Number, false, v, "", {}}; }
    static AnswerValue label(std::string s) {
        return {Kind::Text, false, 0.0, std::move(s), {}};
    }
    static AnswerValue pair(AnswerItem a, AnswerItem b) {
        return {Kind::Pair, false, 0.0, "", {std::move(a), std::move(b)}};
    }
    static AnswerValue list(std::vector<AnswerItem> xs) {
        return {Kind::List, false, 0.0, "", std::move(xs)};
    }

    bool operator==(const AnswerValue&) const = default;
};

const char* to_string(AnswerValue::Kind k);
std::optional<AnswerValue::Kind> answer_kind_from_string(const std::string& s);

// Structural equality with relative tolerance on numbers (dual-execution checks).
bool answers_equal(const AnswerValue& a, const AnswerValue& b, double rel_tol = 0.0);

// Canonical human/text form ("yes", "420", "increasing", "a; b; c").
std::string format_answer(const AnswerValue& v);
std::string format_item(const AnswerItem& it);

nlohmann::ordered_json answer_to_json(const AnswerValue& v);
AnswerValue answer_from_json(const nlohmann::json& j);  // throws std::runtime_error

}  // namespace lifebench::qlang
