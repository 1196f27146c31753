#include "lifebench/qlang/answer.hpp"

#include <cmath>
#include <stdexcept>

#include "lifebench/core/num.hpp"

namespace lifebench::qlang {

const char* to_string(AnswerValue::Kind k) {
    switch (k) {
        case AnswerValue::Kind::YesNo: return "yesno";
        case AnswerValue::Kind::Number: return "number";
        case AnswerValue::Kind::Text: return "text";
        case AnswerValue::Kind::Pair: return "pair";
        case AnswerValue::Kind::List: return "list";
    }
    return "?";
}

std::optional<AnswerValue::Kind> answer_kind_from_string(const std::string& s) {
    if (s == "yesno") return AnswerValue::Kind::YesNo;
    if (s == "number") return AnswerValue::Kind::Number;
    if (s == "text") return AnswerValue::Kind::Text;
    if (s == "pair") return AnswerValue::Kind::Pair;
    if (s == "list") return AnswerValue::Kind::List;
    return std::nullopt;
}

namespace {

bool numbers_equal(double a, double b, double rel_tol) {
    if (a == b) return true;
    double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= rel_tol * scale;
}

bool items_equal(const AnswerItem& a, const AnswerItem& b, double rel_tol) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case AnswerItem::Kind::Number: return numbers_equal(a.num, b.num, rel_tol);
        case AnswerItem::Kind::Text: return a.text == b.text;
        case AnswerItem::Kind::Date: return a.date == b.date;
    }
    return false;
}

}  // namespace

bool answers_equal(const AnswerValue& a, const AnswerValue& b, double rel_tol) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case AnswerValue::Kind::YesNo: return a.yesno == b.yesno;
        case AnswerValue::Kind::Number: return numbers_equal(a.num, b.num, rel_tol);
        case AnswerValue::Kind::Text: return a.text == b.text;
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            if (a.items.size() != b.items.size()) return false;
            for (size_t i = 0; i < a.items.size(); ++i)
                if (!items_equal(a.items[i], b.items[i], rel_tol)) return false;
            return true;
        }
    }
    return false;
}

std::string format_item(const AnswerItem& it) {
    switch (it.kind) {
        case AnswerItem::Kind::Number: return format_number(it.num);
        case AnswerItem::Kind::Text: return it.text;
        case AnswerItem::Kind::Date: return format_date(it.date);
    }
    return "";
}

std::string format_answer(const AnswerValue& v) {
    switch (v.kind) {
        case AnswerValue::Kind::YesNo: return v.yesno ? "yes" : "no";
        case AnswerValue::Kind::Number: return format_number(v.num);
        case AnswerValue::Kind::Text: return v.text;
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            std::string out;
            for (size_t i = 0; i < v.items.size(); ++i) {
                if (i) out += "; ";
                out += format_item(v.items[i]);
            }
            return out;
        }
    }
    return "";
}

namespace {

nlohmann::ordered_json item_to_json(const AnswerItem& it) {
    nlohmann::ordered_json j;
    switch (it.kind) {
        case AnswerItem::Kind::Number:
            j["kind"] = "number";
            j["value"] = it.num;
            break;
        case AnswerItem::Kind::Text:
            j["kind"] = "text";
            j["value"] = it.text;
            break;
        case AnswerItem::Kind::Date:
            j["kind"] = "date";
            j["value"] = format_date(it.date);
            break;
    }
    return j;
}

AnswerItem item_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "number") return AnswerItem::number(j.at("value").get<double>());
    if (kind == "text") return AnswerItem::label(j.at("value").get<std::string>());
    if (kind == "date") {
        auto d = parse_date(j.at("value").get<std::string>());
        if (!d) throw std::runtime_error("bad date item: " + j.at("value").dump());
        return AnswerItem::day(*d);
    }
    throw std::runtime_error("unknown answer item kind: " + kind);
}

}  // namespace

nlohmann::ordered_json answer_to_json(const AnswerValue& v) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(v.kind);
    switch (v.kind) {
        case AnswerValue::Kind::YesNo:
            j["value"] = v.yesno;
            break;
        case AnswerValue::Kind::Number:
            j["value"] = v.num;
            break;
        case AnswerValue::Kind::Text:
            j["value"] = v.text;
            break;
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& it : v.items) arr.push_back(item_to_json(it));
            j["items"] = std::move(arr);
            break;
        }
    }
    return j;
}

AnswerValue answer_from_json(const nlohmann::json& j) {
    auto kind = answer_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown answer kind: " + j.at("kind").dump());
    switch (*kind) {
        case AnswerValue::Kind::YesNo: return AnswerValue::yes_no(j.at("value").get<bool>());
        case AnswerValue::Kind::Number: return AnswerValue::number(j.at("value").get<double>());
        case AnswerValue::Kind::Text: return AnswerValue::label(j.at("value").get<std::string>());
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            std::vector<AnswerItem> items;
            for (const auto& it : j.at("items")) items.push_back(item_from_json(it));
            AnswerValue v;
            v.kind = *kind;
            v.items = std::move(items);
            return v;
        }
    }
    throw std::runtime_error("unreachable");
}

}  // namespace lifebench::qlang
