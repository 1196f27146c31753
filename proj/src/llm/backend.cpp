#include "lifebench/llm/backend.hpp"

#include <fstream>
#include <sstream>

#include "lifebench/core/rng.hpp"
#include "lifebench/vendor_json.hpp"

namespace lifebench::llm {

std::uint64_t transcript_hash(const std::vector<ChatMessage>& messages) {
    std::uint64_t h = fnv1a("transcript");
    for (const auto& m : messages) {
        h = fnv1a(m.role, h);
        h = fnv1a("\x1f", h);  // separators keep (role, content) boundaries unambiguous
        h = fnv1a(m.content, h);
        h = fnv1a("\x1e", h);
    }
    return h;
}

std::string Backend::complete(const std::vector<ChatMessage>& messages) {
    std::string response = do_complete(messages);
    ChatExchange ex;
    ex.messages = messages;
    ex.response = response;
    log_.push_back(ex);
    if (!audit_path_.empty()) {
        nlohmann::ordered_json j;
        j["messages"] = nlohmann::ordered_json::array();
        for (const auto& m : messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
        j["response"] = response;
        j["transcript_hash"] = std::to_string(transcript_hash(messages));
        std::ofstream out(audit_path_, std::ios::app);
        out << j.dump() << "\n";
    }
    return response;
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BackendError("cannot open replay file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_jsonl_text(buf.str());
}

ScriptedBackend ScriptedBackend::from_jsonl_text(const std::string& text) {
    ScriptedBackend b;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        b.add_hash(std::stoull(j.at("transcript_hash").get<std::string>()),
                   j.at("response").get<std::string>());
    }
    return b;
}

void ScriptedBackend::add(const std::vector<ChatMessage>& transcript, std::string response) {
    entries_[transcript_hash(transcript)] = std::move(response);
}

void ScriptedBackend::add_hash(std::uint64_t hash, std::string response) {
    entries_[hash] = std::move(response);
}

std::string ScriptedBackend::to_jsonl() const {
    std::string out;
    for (const auto& [h, r] : entries_) {
        nlohmann::ordered_json j;
        j["transcript_hash"] = std::to_string(h);
        j["response"] = r;
        out += j.dump();
        out += "\n";
    }
    return out;
}

std::string ScriptedBackend::do_complete(const std::vector<ChatMessage>& messages) {
    auto it = entries_.find(transcript_hash(messages));
    if (it == entries_.end()) {
        std::string head = messages.empty() ? "" : messages.back().content.substr(0, 80);
        throw ScriptMiss("no replay entry for transcript (last message: \"" + head + "\")");
    }
    return it->second;
}

}  // namespace lifebench::llm
