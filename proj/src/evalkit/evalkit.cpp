#include "lifebench/evalkit/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "lifebench/core/num.hpp"
#include "lifebench/prompts.hpp"
#include "lifebench/qlang/interpret.hpp"
#include "lifebench/qlang/ir.hpp"

namespace lifebench::evalkit {

using qlang::AnswerItem;
using qlang::AnswerValue;

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

const std::regex kNumberRe(R"([-+]?\d[\d,]*(?:\.\d+)?(?:[eE][-+]?\d+)?)");
const std::regex kIsoDateRe(R"(\d{4}-\d{2}-\d{2})");

std::optional<double> parse_number_token(const std::string& tok) {
    std::string digits;
    for (char c : tok)
        if (c != ',') digits += c;  // thousands separators
    try {
        size_t used = 0;
        double v = std::stod(digits, &used);
        if (used != digits.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

// First number inside a payload that may carry units ("42 kcal", "$1,234.5").
std::optional<double> first_number(const std::string& text) {
    std::smatch m;
    if (!std::regex_search(text, m, kNumberRe)) return std::nullopt;
    return parse_number_token(m.str());
}

std::optional<double> last_number(const std::string& text) {
    std::optional<double> out;
    auto begin = std::sregex_iterator(text.begin(), text.end(), kNumberRe);
    for (auto it = begin; it != std::sregex_iterator(); ++it)
        if (auto v = parse_number_token(it->str())) out = v;
    return out;
}

std::optional<bool> find_yesno(const std::string& text, bool last) {
    static const std::regex word(R"([A-Za-z]+)");
    std::optional<bool> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), word);
         it != std::sregex_iterator(); ++it) {
        std::string w = normalize_text(it->str());
        std::optional<bool> v;
        if (w == "yes" || w == "true") v = true;
        if (w == "no" || w == "false") v = false;
        if (v) {
            out = v;
            if (!last) return out;
        }
    }
    return out;
}

// An answer item: ISO date, number (units tolerated), or plain label.
AnswerItem parse_item(const std::string& raw) {
    std::string s = trim(raw);
    if (std::regex_match(s, kIsoDateRe)) {
        if (auto d = parse_date(s)) return AnswerItem::day(*d);
    }
    // numbers may trail a unit, but labels never start with a digit
    std::smatch m;
    if (std::regex_search(s, m, kNumberRe) && m.position(0) == 0) {
        std::string rest = trim(s.substr(static_cast<size_t>(m.length(0))));
        bool unit_only = std::none_of(rest.begin(), rest.end(),
                                      [](unsigned char c) { return std::isdigit(c); });
        if (unit_only) {
            if (auto v = parse_number_token(m.str())) return AnswerItem::number(*v);
        }
    }
    return AnswerItem::label(s);
}

std::vector<AnswerItem> parse_items(const std::string& payload) {
    std::vector<AnswerItem> items;
    std::stringstream ss(payload);
    std::string part;
    while (std::getline(ss, part, ';')) {
        part = trim(part);
        if (!part.empty()) items.push_back(parse_item(part));
    }
    return items;
}

std::optional<AnswerValue> payload_to_answer(const std::string& payload,
                                             AnswerValue::Kind expected) {
    switch (expected) {
        case AnswerValue::Kind::YesNo: {
            auto b = find_yesno(payload, /*last=*/false);
            if (!b) return std::nullopt;
            return AnswerValue::yes_no(*b);
        }
        case AnswerValue::Kind::Number: {
            auto v = first_number(payload);
            if (!v) return std::nullopt;
            return AnswerValue::number(*v);
        }
        case AnswerValue::Kind::Text: {
            std::string s = trim(payload);
            if (s.empty()) return std::nullopt;
            return AnswerValue::label(s);
        }
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            auto items = parse_items(payload);
            if (items.empty()) return std::nullopt;
            AnswerValue v;
            v.kind = expected;
            v.items = std::move(items);
            return v;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string normalize_text(const std::string& s) {
    std::string out;
    bool in_space = true;  // leading whitespace is dropped
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out += ' ';
        in_space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

std::optional<AnswerValue> parse_answer(const std::string& raw_text, AnswerValue::Kind expected,
                                        std::string* error) {
    auto fail = [&](const char* why) -> std::optional<AnswerValue> {
        if (error) *error = why;
        return std::nullopt;
    };
    // last line of the form "ANSWER: ..." wins
    std::string payload;
    bool found = false;
    {
        std::stringstream ss(raw_text);
        std::string line;
        static const std::regex answer_re(R"(^\s*ANSWER\s*:\s*(.*)$)", std::regex::icase);
        std::smatch m;
        while (std::getline(ss, line))
            if (std::regex_match(line, m, answer_re)) {
                payload = m[1];
                found = true;
            }
    }
    if (found) {
        if (auto v = payload_to_answer(payload, expected)) return v;
        return fail("ANSWER line did not contain a value of the expected type");
    }
    // fallback: last parseable value of the expected type anywhere in the text
    switch (expected) {
        case AnswerValue::Kind::YesNo: {
            auto b = find_yesno(raw_text, /*last=*/true);
            if (b) return AnswerValue::yes_no(*b);
            return fail("no yes/no token found");
        }
        case AnswerValue::Kind::Number: {
            auto v = last_number(raw_text);
            if (v) return AnswerValue::number(*v);
            return fail("no number found");
        }
        case AnswerValue::Kind::Text: {
            std::string last;
            std::stringstream ss(raw_text);
            std::string line;
            while (std::getline(ss, line))
                if (!trim(line).empty()) last = trim(line);
            if (!last.empty()) return AnswerValue::label(last);
            return fail("empty response");
        }
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            std::string last;
            std::stringstream ss(raw_text);
            std::string line;
            while (std::getline(ss, line))
                if (line.find(';') != std::string::npos) last = line;
            if (!last.empty())
                if (auto v = payload_to_answer(last, expected)) return v;
            return fail("no semicolon-separated item list found");
        }
    }
    return fail("unknown answer type");
}

bool number_matches(double pred, double gt) {
    if (!std::isfinite(pred) || !std::isfinite(gt)) return false;
    const bool small_int = std::rint(gt) == gt && gt <= 14.0;
    const double tol = small_int ? 1.0 : std::max(0.005 * std::abs(gt), 0.01);
    return std::abs(pred - gt) <= tol + 1e-9;
}

namespace {

bool item_matches(const AnswerItem& pred, const AnswerItem& gt) {
    if (gt.kind == AnswerItem::Kind::Number)
        return pred.kind == AnswerItem::Kind::Number && number_matches(pred.num, gt.num);
    // text and dates compare as normalized strings; a pred parsed as a date
    // still matches a text ground truth with the same ISO form
    if (pred.kind == AnswerItem::Kind::Number) return false;
    return normalize_text(format_item(pred)) == normalize_text(format_item(gt));
}

}  // namespace

bool score_accuracy(const AnswerValue& pred, const AnswerValue& gt) {
    if (pred.kind != gt.kind) return false;
    switch (gt.kind) {
        case AnswerValue::Kind::YesNo: return pred.yesno == gt.yesno;
        case AnswerValue::Kind::Number: return number_matches(pred.num, gt.num);
        case AnswerValue::Kind::Text:
            return normalize_text(pred.text) == normalize_text(gt.text);
        case AnswerValue::Kind::Pair:
        case AnswerValue::Kind::List: {
            if (pred.items.size() != gt.items.size()) return false;
            std::vector<bool> used(pred.items.size(), false);
            for (const auto& g : gt.items) {  // greedy multiset matching
                bool matched = false;
                for (size_t i = 0; i < pred.items.size(); ++i) {
                    if (used[i] || !item_matches(pred.items[i], g)) continue;
                    used[i] = true;
                    matched = true;
                    break;
                }
                if (!matched) return false;
            }
            return true;
        }
    }
    return false;
}

std::vector<AnswerItem> evidence_items(const qlang::Node& program, const AlignedDataset& ds) {
    using K = qlang::Node::Kind;
    auto number_of = [&](const qlang::NodePtr& n) {
        return AnswerItem::number(qlang::interpret(*n, ds).num);
    };
    if (program.kind == K::Compare && program.cmp_kind == qlang::CompareKind::Greater)
        return {number_of(program.children.at(0)), number_of(program.children.at(1))};
    if (program.kind == K::ConsecutiveRun && program.run_mode == qlang::RunMode::Exists) {
        auto as_max = qlang::consecutive_run(program.children.at(0), program.min_len,
                                             qlang::RunMode::MaxRun);
        return {number_of(as_max)};
    }
    AnswerValue gt = qlang::interpret(program, ds);
    switch (gt.kind) {
        case AnswerValue::Kind::YesNo: return {AnswerItem::label(gt.yesno ? "yes" : "no")};
        case AnswerValue::Kind::Number: return {AnswerItem::number(gt.num)};
        case AnswerValue::Kind::Text: return {AnswerItem::label(gt.text)};
        default: return gt.items;
    }
}

std::pair<bool, bool> score_dp_stage(const SqlDiagnostic& diag, const ResultTable& result,
                                     const AnswerValue& gt,
                                     const std::vector<AnswerItem>& evidence) {
    if (diag.verdict != SqlVerdict::Valid) return {false, false};

    std::vector<AnswerItem> expected = evidence;
    if (expected.empty()) {
        switch (gt.kind) {
            case AnswerValue::Kind::YesNo:
                expected = {AnswerItem::label(gt.yesno ? "yes" : "no")};
                break;
            case AnswerValue::Kind::Number: expected = {AnswerItem::number(gt.num)}; break;
            case AnswerValue::Kind::Text: expected = {AnswerItem::label(gt.text)}; break;
            default: expected = gt.items; break;
        }
    }

    auto cell_matches = [](const Cell& cell, const AnswerItem& item) {
        if (item.kind == AnswerItem::Kind::Number) {
            if (const double* d = std::get_if<double>(&cell))
                return number_matches(*d, item.num);
            if (const std::string* s = std::get_if<std::string>(&cell)) {
                if (auto v = parse_number_token(*s)) return number_matches(*v, item.num);
            }
            return false;
        }
        const std::string* s = std::get_if<std::string>(&cell);
        return s != nullptr && normalize_text(*s) == normalize_text(format_item(item));
    };
    bool ex = true;
    for (const auto& item : expected) {
        bool found = false;
        for (const auto& row : result.rows) {
            for (const auto& cell : row)
                if (cell_matches(cell, item)) {
                    found = true;
                    break;
                }
            if (found) break;
        }
        if (!found) {
            ex = false;
            break;
        }
    }
    return {true, ex};
}

namespace {

double round2(double x) { return std::round(x * 100.0) / 100.0; }

struct Tally {
    int n = 0, acc = 0, va_defined = 0, va = 0, ex = 0, accex = 0;
    void add(const Verdict& v) {
        ++n;
        if (v.acc) ++acc;
        if (v.va.has_value()) {
            ++va_defined;
            if (*v.va) ++va;
        }
        if (v.ex.has_value() && *v.ex) {
            ++ex;
            if (v.acc) ++accex;
        }
    }
    FacetRow row(std::string key) const {
        FacetRow r;
        r.key = std::move(key);
        r.n = n;
        r.acc_n = acc;
        r.va_defined = va_defined;
        r.va_n = va;
        r.ex_n = ex;
        r.accex_n = accex;
        r.acc_pct = n > 0 ? round2(100.0 * acc / n) : 0.0;
        if (va_defined > 0) {
            r.va_pct = round2(100.0 * va / va_defined);
            r.ex_pct = round2(100.0 * ex / va_defined);
        }
        if (ex > 0) r.accex_pct = round2(100.0 * accex / ex);
        return r;
    }
};

nlohmann::ordered_json facet_json(const std::vector<FacetRow>& rows) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["key"] = r.key;
        j["n"] = r.n;
        j["acc"] = r.acc_pct;
        j["va"] = r.va_pct ? nlohmann::ordered_json(*r.va_pct) : nullptr;
        j["ex"] = r.ex_pct ? nlohmann::ordered_json(*r.ex_pct) : nullptr;
        j["acc_given_ex"] = r.accex_pct ? nlohmann::ordered_json(*r.accex_pct) : nullptr;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace

Report aggregate_report(const std::vector<Verdict>& verdicts,
                        const std::vector<benchgen::QAInstance>& instances) {
    if (verdicts.empty()) throw EmptyEvaluation("no verdicts to aggregate");
    if (verdicts.size() != instances.size())
        throw EmptyEvaluation("verdict/instance count mismatch");

    Tally overall;
    std::map<std::string, Tally> by_task, by_answer, by_scope, by_domains;
    for (size_t i = 0; i < verdicts.size(); ++i) {
        const auto& v = verdicts[i];
        const auto& inst = instances[i];
        overall.add(v);
        by_task[benchgen::to_string(inst.task_type)].add(v);
        by_answer[qlang::to_string(inst.answer_type)].add(v);
        by_scope[benchgen::to_string(inst.scope)].add(v);
        std::set<DomainTag> distinct(inst.domains.begin(), inst.domains.end());
        by_domains[std::to_string(distinct.size())].add(v);
    }

    Report rep;
    rep.total = overall.n;
    FacetRow all = overall.row("overall");
    rep.acc_pct = all.acc_pct;
    rep.va_pct = all.va_pct;
    rep.ex_pct = all.ex_pct;
    rep.accex_pct = all.accex_pct;
    auto emit = [](const std::map<std::string, Tally>& m) {
        std::vector<FacetRow> rows;
        for (const auto& [k, t] : m) rows.push_back(t.row(k));
        return rows;
    };
    rep.by_task = emit(by_task);
    rep.by_answer = emit(by_answer);
    rep.by_scope = emit(by_scope);
    rep.by_domains = emit(by_domains);
    return rep;
}

nlohmann::ordered_json Report::to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["acc"] = acc_pct;
    j["va"] = va_pct ? nlohmann::ordered_json(*va_pct) : nullptr;
    j["ex"] = ex_pct ? nlohmann::ordered_json(*ex_pct) : nullptr;
    j["acc_given_ex"] = accex_pct ? nlohmann::ordered_json(*accex_pct) : nullptr;
    j["ex_rule"] = "tolerance-matched membership of expected values in the executed result";
    j["by_task_type"] = facet_json(by_task);
    j["by_answer_type"] = facet_json(by_answer);
    j["by_scope"] = facet_json(by_scope);
    j["by_n_domains"] = facet_json(by_domains);
    return j;
}

std::string Report::facet_csv() const {
    std::ostringstream out;
    out << "facet,key,n,acc,va,ex,acc_given_ex\n";
    auto fmt = [](const std::optional<double>& v) {
        return v ? format_number(*v) : std::string();
    };
    auto emit = [&](const char* facet, const std::vector<FacetRow>& rows) {
        for (const auto& r : rows)
            out << facet << ',' << r.key << ',' << r.n << ',' << format_number(r.acc_pct) << ','
                << fmt(r.va_pct) << ',' << fmt(r.ex_pct) << ',' << fmt(r.accex_pct) << "\n";
    };
    emit("task_type", by_task);
    emit("answer_type", by_answer);
    emit("scope", by_scope);
    emit("n_domains", by_domains);
    return out.str();
}

namespace {

std::optional<std::array<int, 6>> parse_judge_scores(const std::string& reply) {
    static const std::regex int_re(R"([-+]?\d+)");
    std::vector<int> vals;
    for (auto it = std::sregex_iterator(reply.begin(), reply.end(), int_re);
         it != std::sregex_iterator(); ++it)
        vals.push_back(std::stoi(it->str()));
    if (vals.size() != 6) return std::nullopt;
    std::array<int, 6> out{};
    for (size_t i = 0; i < 6; ++i) {
        if (vals[i] < 1 || vals[i] > 5) return std::nullopt;
        out[i] = vals[i];
    }
    return out;
}

}  // namespace

std::array<int, 6> judge_open_ended(const std::string& task_text,
                                    const std::string& evidence_bundle,
                                    const std::string& response_text, llm::Backend& backend) {
    std::string rubric =
        "You are grading an assistant's answer to a personal-data analysis task.\n"
        "Score the answer on six dimensions, each an integer from 1 (poor) to 5"
        " (excellent):\n";
    for (size_t i = 0; i < kJudgeDimensions.size(); ++i)
        rubric += std::to_string(i + 1) + ". " + kJudgeDimensions[i] + "\n";
    rubric +=
        "\nTask:\n" + task_text + "\n\nReference evidence:\n" + evidence_bundle +
        "\n\nAnswer to grade:\n" + response_text +
        "\n\nReply with exactly six integers separated by spaces, in the order listed"
        " above, and nothing else.";

    std::vector<llm::ChatMessage> messages{{"system", prompts::kJudgeSystem},
                                           {"user", rubric}};
    std::string reply = backend.complete(messages);
    if (auto scores = parse_judge_scores(reply)) return *scores;

    // one corrective retry with the malformed reply in context
    messages.push_back({"assistant", reply});
    messages.push_back({"user",
                        "That was not six integers between 1 and 5. Reply with exactly six"
                        " integers separated by spaces and nothing else."});
    reply = backend.complete(messages);
    if (auto scores = parse_judge_scores(reply)) return *scores;
    throw JudgeFailure("judge reply was not six integers in 1..5 after retry: " + reply);
}

}  // namespace lifebench::evalkit
