#include "lifebench/baselines/baselines.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "lifebench/core/num.hpp"
#include "lifebench/prompts.hpp"

namespace lifebench::baselines {

using evalkit::Prediction;
using llm::ChatMessage;

namespace {

std::string render_value(const MetricValue& v) {
    if (const double* d = std::get_if<double>(&v)) return format_number(*d);
    return std::get<std::string>(v);
}

struct Line {
    Date date;
    std::string text;
};

}  // namespace

CpContext build_cp_context(const benchgen::QAInstance& inst, const AlignedDataset& ds,
                           int token_budget) {
    CpContext ctx;
    ctx.users = inst.user_ids;
    ctx.window = inst.window;
    const std::set<UserId> users(inst.user_ids.begin(), inst.user_ids.end());
    const bool multi = users.size() > 1;

    std::vector<Line> lines;
    for (const auto& row : ds.daily) {
        if (!users.count(row.user) || !inst.window.contains(row.date)) continue;
        std::string t = multi ? row.user + " " : "";
        t += format_date(row.date) + " " + row.metric + "=" + render_value(row.value);
        if (!row.unit.empty()) t += " " + row.unit;
        lines.push_back({row.date, std::move(t)});
    }
    for (const auto& ev : ds.events) {
        if (!users.count(ev.user) || !inst.window.contains(ev.date())) continue;
        std::string t = multi ? ev.user + " " : "";
        t += format_timestamp(ev.start) + " " + ev.metric + "=" + render_value(ev.value);
        if (!ev.unit.empty()) t += " " + ev.unit;
        lines.push_back({ev.date(), std::move(t)});
    }
    std::stable_sort(lines.begin(), lines.end(),
                     [](const Line& a, const Line& b) { return a.date < b.date; });

    size_t total_chars = 0;
    for (const auto& l : lines) total_chars += l.text.size() + 1;
    size_t first = 0;  // truncate oldest-first until the budget fits
    const size_t budget_chars = static_cast<size_t>(token_budget) * 4;
    while (first < lines.size() && total_chars > budget_chars) {
        total_chars -= lines[first].text.size() + 1;
        ++first;
        ctx.truncated = true;
    }
    for (size_t i = first; i < lines.size(); ++i) {
        ctx.text += lines[i].text;
        ctx.text += "\n";
    }
    ctx.token_estimate = static_cast<int>(ctx.text.size() / 4);
    return ctx;
}

std::vector<ChatMessage> cp_messages(const benchgen::QAInstance& inst, const CpContext& ctx) {
    std::string user = "Records (" + format_date(ctx.window.start) + " to " +
                       format_date(ctx.window.end) + "):\n";
    if (ctx.truncated) user += "[earlier records omitted to fit the context]\n";
    user += ctx.text;
    user += "\nQuestion: " + inst.question + "\n" +
            prompts::answer_format_hint(inst.answer_type);
    return {{"system", prompts::kCpSystem}, {"user", user}};
}

std::vector<ChatMessage> dp_sql_messages(const benchgen::QAInstance& inst) {
    std::string user = "Database schema:\n" + schema_ddl() + "\nQuestion: " + inst.question +
                       "\nWrite one SELECT statement that retrieves the evidence needed to "
                       "answer it.";
    return {{"system", prompts::kDpSqlSystem}, {"user", user}};
}

std::vector<ChatMessage> dp_answer_messages(const benchgen::QAInstance& inst,
                                            const std::string& sql_reply,
                                            const std::string& stage_note) {
    auto msgs = dp_sql_messages(inst);
    msgs.push_back({"assistant", sql_reply});
    msgs.push_back({"user", stage_note + "\n" + prompts::kDpAnswerRequest + "\n" +
                                prompts::answer_format_hint(inst.answer_type)});
    return msgs;
}

std::string extract_sql(const std::string& reply) {
    // last fenced block wins; the info string (e.g. "sql") is skipped
    std::string sql;
    size_t pos = 0;
    while (true) {
        size_t open = reply.find("```", pos);
        if (open == std::string::npos) break;
        size_t body = reply.find('\n', open);
        if (body == std::string::npos) break;
        size_t close = reply.find("```", body);
        if (close == std::string::npos) break;
        sql = reply.substr(body + 1, close - body - 1);
        pos = close + 3;
    }
    if (sql.empty()) sql = reply;
    size_t a = sql.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = sql.find_last_not_of(" \t\r\n");
    return sql.substr(a, b - a + 1);
}

evalkit::Prediction run_cp(const benchgen::QAInstance& inst, const AlignedDataset& ds,
                           llm::Backend& backend, const CpConfig& config,
                           CpContext* context_out) {
    Prediction pred;
    pred.instance_id = inst.instance_id;
    CpContext ctx = build_cp_context(inst, ds, config.token_budget);
    if (context_out != nullptr) *context_out = ctx;
    try {
        pred.raw_text = backend.complete(cp_messages(inst, ctx));
    } catch (const llm::BackendError& e) {
        pred.parse_error = std::string("backend error: ") + e.what();
        return pred;
    }
    pred.parsed = evalkit::parse_answer(pred.raw_text, inst.answer_type, &pred.parse_error);
    return pred;
}

evalkit::Prediction run_dp(const benchgen::QAInstance& inst, const RelationalStore& store,
                           llm::Backend& backend) {
    Prediction pred;
    pred.instance_id = inst.instance_id;
    std::string sql_reply;
    try {
        sql_reply = backend.complete(dp_sql_messages(inst));
    } catch (const llm::BackendError& e) {
        pred.parse_error = std::string("backend error: ") + e.what();
        return pred;
    }
    const std::string sql = extract_sql(sql_reply);
    pred.dp_sql = sql;

    auto [diag, table] = store.run(sql);
    pred.dp_diag = diag;
    std::string note;
    if (diag.valid()) {
        pred.dp_result = table;
        note = "Query results:\n" + table.render_text();
    } else {
        // one attempt only; the model still gets to answer from memory
        note = "The SQL was rejected (" + std::string(to_string(diag.verdict)) +
               (diag.message.empty() ? "" : ": " + diag.message) +
               "). No results are available; answer as best you can.";
    }
    try {
        pred.raw_text = backend.complete(dp_answer_messages(inst, sql_reply, note));
    } catch (const llm::BackendError& e) {
        pred.parse_error = std::string("backend error: ") + e.what();
        return pred;
    }
    pred.parsed = evalkit::parse_answer(pred.raw_text, inst.answer_type, &pred.parse_error);
    return pred;
}

evalkit::Verdict score_prediction(const evalkit::Prediction& pred,
                                  const benchgen::QAInstance& inst, const AlignedDataset& ds) {
    evalkit::Verdict v;
    v.acc = pred.parsed.has_value() && evalkit::score_accuracy(*pred.parsed, inst.ground_truth);
    if (pred.dp_diag.has_value()) {
        auto evidence = evalkit::evidence_items(*inst.program, ds);
        auto [va, ex] = evalkit::score_dp_stage(
            *pred.dp_diag, pred.dp_result.value_or(ResultTable{}), inst.ground_truth, evidence);
        v.va = va;
        if (va) v.ex = ex;
    }
    return v;
}

}  // namespace lifebench::baselines
