#include "lifebench/prompts.hpp"

namespace lifebench::prompts {

const std::string kCpSystem =
    "You answer questions about a person's lifestyle records (diet, sleep, physical "
    "activity, and emotion). The relevant records are included in the message, one per "
    "line. Use only those records; do not invent data. Think step by step if needed, "
    "then end your reply with a single line of the form:\n"
    "ANSWER: <value>\n";

const std::string kDpSqlSystem =
    "You translate a question about lifestyle records into one SQL query for the SQLite "
    "database described below. Reply with exactly one SELECT statement inside a fenced "
    "code block (```sql ... ```). Only SELECT statements are executed; anything else is "
    "rejected.\n";

const std::string kDpAnswerRequest =
    "Using the query results above, answer the original question. End your reply with a "
    "single line of the form:\n"
    "ANSWER: <value>\n";

const std::string kAgentSystem =
    "You are an analysis agent operating over a lifestyle-records database through "
    "tools. At each step reply with exactly one fenced action block and nothing else:\n"
    "```action\n"
    "TOOL(tool_name, {\"arg\": \"value\", ...})\n"
    "```\n"
    "or, when you have enough evidence:\n"
    "```action\n"
    "STOP\n"
    "```\n"
    "Available tools:\n"
    "- retrieve: {\"kind\": \"events\"|\"daily_series\", \"user\": id, \"metric\": name, "
    "\"start\": YYYY-MM-DD, \"end\": YYYY-MM-DD} -> rows or a daily series\n"
    "- cohort: {\"kind\": \"summary\"|\"rank\"|\"group_compare\", \"metric\": name, "
    "\"start\": ..., \"end\": ..., \"stat\": mean|median|min|max|p<k>, \"order\": "
    "asc|desc, \"k\": n, \"split_metric\": name, \"split_threshold\": x} -> cohort "
    "statistics over all users\n"
    "- compute: {\"expression\": text, \"name\": result_name} -> arithmetic over named "
    "results (+, -, *, /, parentheses, min, max, abs, round)\n"
    "Observations are appended to your evidence. Retrieval results store under names "
    "you can reference in compute expressions.\n";

const std::string kIntentSystem =
    "Extract the intent of a question about lifestyle records. Reply with exactly these "
    "lines and nothing else:\n"
    "task: FQ|AS|NC|CQ|TA\n"
    "domains: comma-separated from diet, sleep, activity, emotion (or 'all')\n"
    "window: <start YYYY-MM-DD> <end YYYY-MM-DD> (or 'default')\n"
    "answer: yesno|number|text|pair|list\n";

const std::string kDecomposeSystem =
    "Break the question into a short retrieval agenda. Reply with one line per "
    "sub-question, formatted:\n"
    "<n>. <sub-question> | domains: <...> | window: <start> <end> | granularity: "
    "daily|event\n";

const std::string kJudgeSystem = "You are a strict, consistent grader.";

std::string answer_format_hint(qlang::AnswerValue::Kind kind) {
    using K = qlang::AnswerValue::Kind;
    switch (kind) {
        case K::YesNo: return "Answer yes or no.";
        case K::Number: return "Answer with a single number.";
        case K::Text: return "Answer with a single value (a category, date, or user id).";
        case K::Pair: return "Answer with exactly two values separated by '; '.";
        case K::List: return "Answer with the values separated by '; '.";
    }
    return "";
}

const std::map<std::string, const std::string*>& registry() {
    static const std::map<std::string, const std::string*> kRegistry = {
        {"cp_system.txt", &kCpSystem},
        {"dp_sql_system.txt", &kDpSqlSystem},
        {"dp_answer_request.txt", &kDpAnswerRequest},
        {"agent_system.txt", &kAgentSystem},
        {"intent_system.txt", &kIntentSystem},
        {"decompose_system.txt", &kDecomposeSystem},
        {"judge_system.txt", &kJudgeSystem},
    };
    return kRegistry;
}

}  // namespace lifebench::prompts
