#include <sstream>

#include "lifebench/agent/agent.hpp"
#include "lifebench/prompts.hpp"

namespace lifebench::agent {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// "key: value" lines into a map; unknown keys ignored
std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        kv[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
    }
    return kv;
}

std::set<DomainTag> parse_domains(const std::string& s, bool* ok) {
    std::set<DomainTag> out;
    *ok = true;
    if (s == "all" || s.empty()) return out;  // empty set = all domains
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto d = domain_from_string(trim(part));
        if (!d) {
            *ok = false;
            return {};
        }
        out.insert(*d);
    }
    return out;
}

std::optional<TimeWindow> parse_window(const std::string& s) {
    std::stringstream ss(s);
    std::string a, b;
    if (!(ss >> a >> b)) return std::nullopt;
    auto d1 = parse_date(a);
    auto d2 = parse_date(b);
    if (!d1 || !d2 || *d2 < *d1) return std::nullopt;
    return TimeWindow{*d1, *d2};
}

TimeWindow default_window(const AlignedDataset& ds) {
    // past 7 days ending at the reference date, clamped to the span
    Date end = ds.reference_date;
    if (end < ds.date_span.start || ds.date_span.end < end) end = ds.date_span.end;
    Date start = end - 6;
    if (start < ds.date_span.start) start = ds.date_span.start;
    return {start, end};
}

}  // namespace

Intent parse_intent(const std::string& query, llm::Backend& backend, const AlignedDataset& ds) {
    if (trim(query).empty()) throw std::invalid_argument("empty query");

    Intent intent;
    intent.window = default_window(ds);

    std::string reply;
    try {
        reply = backend.complete({{"system", prompts::kIntentSystem},
                                  {"user", "Question: " + query + "\nToday is " +
                                               format_date(ds.reference_date) +
                                               "; records cover " +
                                               format_date(ds.date_span.start) + " to " +
                                               format_date(ds.date_span.end) + "."}});
    } catch (const llm::BackendError&) {
        intent.defaulted = true;
        return intent;
    }

    auto kv = parse_kv(reply);
    if (auto t = benchgen::task_from_string(kv["task"])) intent.task = *t;
    else intent.defaulted = true;

    bool ok = true;
    intent.domains = parse_domains(kv["domains"], &ok);
    if (!ok) intent.defaulted = true;

    if (kv["window"] != "default") {
        if (auto w = parse_window(kv["window"])) intent.window = *w;
        else intent.defaulted = true;
    }

    if (auto a = qlang::answer_kind_from_string(kv["answer"])) intent.answer = *a;
    else intent.defaulted = true;
    return intent;
}

Agenda decompose(const std::string& query, const Intent& intent, llm::Backend& backend) {
    auto fallback = [&] {
        // one sub-question covering the whole intent
        Agenda a;
        SubQuestion q;
        q.text = query;
        q.domains = intent.domains;
        q.window = intent.window;
        a.items.push_back(std::move(q));
        return a;
    };

    std::string reply;
    try {
        reply = backend.complete(
            {{"system", prompts::kDecomposeSystem},
             {"user", "Question: " + query + "\nDefault window: " +
                          format_date(intent.window.start) + " " +
                          format_date(intent.window.end) + "."}});
    } catch (const llm::BackendError&) {
        return fallback();
    }

    Agenda agenda;
    std::stringstream ss(reply);
    std::string line;
    while (std::getline(ss, line)) {
        line = trim(line);
        if (line.empty()) continue;
        // "<n>. text | domains: ... | window: a b | granularity: daily"
        std::vector<std::string> parts;
        std::stringstream ps(line);
        std::string part;
        while (std::getline(ps, part, '|')) parts.push_back(trim(part));
        if (parts.empty()) continue;

        SubQuestion q;
        q.text = parts[0];
        size_t dot = q.text.find(". ");
        if (dot != std::string::npos && dot <= 3) q.text = trim(q.text.substr(dot + 2));
        if (q.text.empty()) continue;
        q.domains = intent.domains;
        q.window = intent.window;
        for (size_t i = 1; i < parts.size(); ++i) {
            size_t colon = parts[i].find(':');
            if (colon == std::string::npos) continue;
            std::string key = trim(parts[i].substr(0, colon));
            std::string val = trim(parts[i].substr(colon + 1));
            if (key == "domains") {
                bool ok = true;
                auto d = parse_domains(val, &ok);
                if (ok) q.domains = d;
            } else if (key == "window") {
                if (auto w = parse_window(val)) q.window = *w;
            } else if (key == "granularity") {
                if (val == "event") q.granularity = Granularity::Event;
            }
        }
        agenda.items.push_back(std::move(q));
    }
    if (agenda.items.empty()) return fallback();
    return agenda;
}

}  // namespace lifebench::agent
