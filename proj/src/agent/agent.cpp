#include <regex>
#include <sstream>

#include "lifebench/agent/agent.hpp"
#include "lifebench/core/num.hpp"
#include "lifebench/prompts.hpp"

namespace lifebench::agent {

using llm::ChatMessage;

namespace {

const char* obs_kind_name(ObsKind k) {
    switch (k) {
        case ObsKind::Rows: return "rows";
        case ObsKind::Series: return "series";
        case ObsKind::Scalar: return "scalar";
        case ObsKind::Delta: return "delta";
        case ObsKind::Check: return "check";
        case ObsKind::TrendInfo: return "trend";
        case ObsKind::Error: return "error";
    }
    return "?";
}

std::string render_domains(const std::set<DomainTag>& ds) {
    if (ds.empty()) return "all";
    std::string out;
    for (auto d : ds) {
        if (!out.empty()) out += ", ";
        out += to_string(d);
    }
    return out;
}

std::string render_state(const AgentState& state) {
    std::string txt = "Question: " + state.query + "\n";
    txt += "Intent: task=" + std::string(benchgen::to_string(state.intent.task)) +
           " domains=" + render_domains(state.intent.domains) + " window=" +
           format_date(state.intent.window.start) + ".." +
           format_date(state.intent.window.end) + " answer=" +
           qlang::to_string(state.intent.answer) + "\n";
    txt += "Agenda:\n";
    for (size_t i = 0; i < state.agenda.items.size(); ++i) {
        const auto& q = state.agenda.items[i];
        txt += "  " + std::to_string(i + 1) + ". " + q.text + " [" +
               render_domains(q.domains) + ", " + format_date(q.window.start) + ".." +
               format_date(q.window.end) + "]\n";
    }
    if (state.evidence.empty()) {
        txt += "Evidence: (none yet)\n";
    } else {
        txt += "Evidence:\n";
        for (const auto& obs : state.evidence)
            txt += "  [" + std::to_string(obs.step) + "] " + obs.tool + " (" +
                   obs_kind_name(obs.kind) + "): " + obs.summary + "\n";
    }
    if (!state.named.empty()) {
        txt += "Named results:";
        for (const auto& [k, v] : state.named) {
            txt += " " + k + "=";
            if (const double* d = std::get_if<double>(&v)) txt += format_number(*d);
            else txt += std::get<std::string>(v);
        }
        txt += "\n";
    }
    txt += "Steps used: " + std::to_string(state.t) + " of " + std::to_string(state.budget) +
           ". Reply with one action block.";
    return txt;
}

struct ParsedAction {
    bool valid = false;
    bool stop = false;
    std::string tool;
    nlohmann::json args;
    std::string error;
};

ParsedAction parse_action(const std::string& reply) {
    ParsedAction act;
    // last fenced block; the info string ("action") is optional
    std::string block;
    size_t pos = 0;
    while (true) {
        size_t open = reply.find("```", pos);
        if (open == std::string::npos) break;
        size_t body = reply.find('\n', open);
        if (body == std::string::npos) break;
        size_t close = reply.find("```", body);
        if (close == std::string::npos) break;
        block = reply.substr(body + 1, close - body - 1);
        pos = close + 3;
    }
    if (block.empty()) {
        act.error = "no fenced action block found";
        return act;
    }
    static const std::regex stop_re(R"(^\s*STOP\s*$)");
    if (std::regex_match(block, stop_re)) {
        act.valid = true;
        act.stop = true;
        return act;
    }
    static const std::regex tool_re(R"(^\s*TOOL\(\s*(\w+)\s*,\s*(\{[\s\S]*\})\s*\)\s*$)");
    std::smatch m;
    if (!std::regex_match(block, m, tool_re)) {
        act.error = "action block must contain TOOL(name, {json args}) or STOP";
        return act;
    }
    act.tool = m[1];
    try {
        act.args = nlohmann::json::parse(m[2].str());
    } catch (const nlohmann::json::exception& e) {
        act.error = std::string("tool arguments are not valid JSON: ") + e.what();
        return act;
    }
    act.valid = true;
    return act;
}

Observation dispatch(const ParsedAction& act, AgentState& state, const AlignedDataset& ds,
                     const RelationalStore& store) {
    try {
        if (act.tool == "retrieve") return tool_retrieve(act.args, ds, store, state);
        if (act.tool == "cohort") return tool_cohort(act.args, ds, state);
        if (act.tool == "compute") return tool_compute(act.args, state);
        throw ToolArgError("unknown tool: " + act.tool);
    } catch (const std::exception& e) {
        // errors are evidence: the model sees them and can adapt
        Observation obs;
        obs.step = state.t;
        obs.tool = act.tool;
        obs.kind = ObsKind::Error;
        obs.summary = e.what();
        obs.payload["error"] = e.what();
        return obs;
    }
}

}  // namespace

StepOutcome step(AgentState& state, llm::Backend& backend, const AlignedDataset& ds,
                 const RelationalStore& store, bool allow_reprompt) {
    StepOutcome out;
    std::vector<ChatMessage> messages{{"system", prompts::kAgentSystem},
                                      {"user", render_state(state)}};
    std::string reply = backend.complete(messages);
    out.backend_calls = 1;
    ParsedAction act = parse_action(reply);
    if (!act.valid && allow_reprompt) {
        // one reprompt with the format error, then a forced no-op
        messages.push_back({"assistant", reply});
        messages.push_back({"user", "Format error: " + act.error +
                                        ". Reply with exactly one fenced action block."});
        reply = backend.complete(messages);
        out.backend_calls = 2;
        act = parse_action(reply);
    }
    out.action_text = reply;
    if (!act.valid) {
        Observation noop;
        noop.step = state.t;
        noop.tool = "none";
        noop.kind = ObsKind::Error;
        noop.summary = "no-op: malformed action (" + act.error + ")";
        state.evidence.push_back(noop);
        out.observation = noop;
        ++state.t;
        return out;
    }
    if (act.stop) {
        out.stopped = true;
        ++state.t;
        return out;
    }
    Observation obs = dispatch(act, state, ds, store);
    state.evidence.push_back(obs);
    out.observation = obs;
    ++state.t;
    return out;
}

std::string AgentResult::trace_jsonl() const {
    std::string out;
    for (const auto& e : trace) {
        nlohmann::ordered_json j;
        j["step"] = e.step;
        j["action"] = e.action;
        j["observation"] = e.observation;
        j["sql_trace"] = e.sql_trace;
        out += j.dump();
        out += "\n";
    }
    return out;
}

AgentResult run_agent(const std::string& query, const AlignedDataset& ds,
                      const RelationalStore& store, llm::Backend& backend,
                      const AgentOptions& options) {
    if (options.budget < 1) throw std::invalid_argument("budget must be >= 1");
    AgentResult result;
    result.prediction.instance_id = options.instance_id;
    const int calls_before = backend.call_count();

    AgentState state;
    state.query = query;
    state.budget = options.budget;
    state.intent = parse_intent(query, backend, ds);  // backend failure -> defaults
    if (options.answer_kind) state.intent.answer = *options.answer_kind;
    state.agenda = decompose(query, state.intent, backend);

    int loop_calls = 0;
    bool stopped = false;
    while (loop_calls < state.budget) {
        StepOutcome out;
        try {
            // a reprompt costs a second call; skip it when only one remains
            out = step(state, backend, ds, store, state.budget - loop_calls >= 2);
        } catch (const llm::BackendError&) {
            result.backend_failed = true;  // synthesize from partial evidence
            break;
        }
        loop_calls += out.backend_calls;
        TraceEntry entry;
        entry.step = state.t - 1;
        entry.action = out.action_text;
        if (out.observation) {
            entry.observation = out.observation->summary;
            entry.sql_trace = out.observation->sql_trace;
        } else {
            entry.observation = "STOP";
        }
        result.trace.push_back(std::move(entry));
        if (out.stopped) {
            stopped = true;
            break;
        }
    }
    if (!stopped && !result.backend_failed) result.budget_exhausted = true;

    // synthesis: answer from the accumulated evidence only
    std::string evidence_text;
    for (const auto& obs : state.evidence)
        evidence_text += "- " + obs.summary + "\n";
    if (evidence_text.empty()) evidence_text = "(no evidence was gathered)\n";
    std::string user = "Question: " + query + "\nEvidence collected:\n" + evidence_text +
                       "\nAnswer using only this evidence. End with a line 'ANSWER: <value>'. " +
                       prompts::answer_format_hint(state.intent.answer);
    try {
        result.prediction.raw_text =
            backend.complete({{"system", prompts::kCpSystem}, {"user", user}});
        result.prediction.parsed = evalkit::parse_answer(
            result.prediction.raw_text, state.intent.answer, &result.prediction.parse_error);
    } catch (const llm::BackendError& e) {
        result.backend_failed = true;
        result.prediction.parse_error = std::string("backend error: ") + e.what();
    }
    result.backend_calls = backend.call_count() - calls_before;
    return result;
}

AgentResult run_agent_on(const benchgen::QAInstance& inst, const AlignedDataset& ds,
                         const RelationalStore& store, llm::Backend& backend, int budget) {
    AgentOptions opts;
    opts.budget = budget;
    opts.answer_kind = inst.answer_type;
    opts.instance_id = inst.instance_id;
    return run_agent(inst.question, ds, store, backend, opts);
}

}  // namespace lifebench::agent
