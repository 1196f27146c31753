// Pluggable chat-completion backends: a deterministic scripted backend for
// tests and replays, and a remote HTTP client. Every exchange is recorded in
// a session log sufficient to re-score without re-querying.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lifebench::llm {

struct ChatMessage {
    std::string role;  // system | user | assistant | tool
    std::string content;
};

struct ChatExchange {
    std::vector<ChatMessage> messages;
    std::string response;
    int prompt_tokens = -1;  // -1 when the backend does not report usage
    int completion_tokens = -1;
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AuthError : BackendError {
    using BackendError::BackendError;
};
struct Timeout : BackendError {
    using BackendError::BackendError;
};
struct RateLimited : BackendError {
    using BackendError::BackendError;
};
// A scripted backend had no entry for the requested transcript.
struct ScriptMiss : BackendError {
    using BackendError::BackendError;
};

// Stable hash of a whole transcript (roles and contents, order-sensitive).
// Keys replay files, so multi-turn flows replay exactly.
std::uint64_t transcript_hash(const std::vector<ChatMessage>& messages);

class Backend {
public:
    virtual ~Backend() = default;

    // Completes the transcript and appends the exchange to the session log.
    std::string complete(const std::vector<ChatMessage>& messages);

    const std::vector<ChatExchange>& session_log() const { return log_; }
    int call_count() const { return static_cast<int>(log_.size()); }

    // When set, every exchange is also appended to this JSONL file.
    void set_audit_path(std::string path) { audit_path_ = std::move(path); }

protected:
    virtual std::string do_complete(const std::vector<ChatMessage>& messages) = 0;

private:
    std::vector<ChatExchange> log_;
    std::string audit_path_;
};

// Deterministic lookup keyed by transcript hash, loaded from a replay file
// of JSON Lines {"transcript_hash": "...", "response": "..."}.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend() = default;

    static ScriptedBackend from_file(const std::string& path);
    static ScriptedBackend from_jsonl_text(const std::string& text);

    void add(const std::vector<ChatMessage>& transcript, std::string response);
    void add_hash(std::uint64_t hash, std::string response);
    std::string to_jsonl() const;
    size_t size() const { return entries_.size(); }

protected:
    std::string do_complete(const std::vector<ChatMessage>& messages) override;

private:
    std::map<std::uint64_t, std::string> entries_;
};

struct RemoteConfig {
    std::string base_url;  // scheme + host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "LLM_API_KEY";
    double temperature = 0.0;  // deterministic decoding for evaluation fairness
    int max_tokens = 2048;
    int timeout_ms = 60000;
    int max_retries = 3;
};

// Chat-completion HTTP client with bearer-token auth taken from the
// environment and exponential backoff on transient failures.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(RemoteConfig config);

protected:
    std::string do_complete(const std::vector<ChatMessage>& messages) override;

private:
    RemoteConfig config_;
};

}  // namespace lifebench::llm
