#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "lifebench/llm/backend.hpp"
#include "lifebench/vendor_json.hpp"

namespace lifebench::llm {

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw BackendError("remote backend requires base_url");
    if (config_.model.empty()) throw BackendError("remote backend requires a model name");
}

std::string RemoteBackend::do_complete(const std::vector<ChatMessage>& messages) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw AuthError("API key environment variable not set: " + config_.api_key_env);

    nlohmann::ordered_json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_tokens;
    body["messages"] = nlohmann::ordered_json::array();
    for (const auto& m : messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    client.set_bearer_token_auth(key);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(250 << (attempt - 1)));
        auto res = client.Post(config_.path, payload, "application/json");
        if (!res) {
            if (res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read) {
                last_error = "timeout";
                continue;
            }
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw AuthError("request rejected with HTTP " + std::to_string(res->status));
        if (res->status == 429) {
            last_error = "rate limited";
            continue;
        }
        if (res->status >= 500) {  // transient server trouble: retry
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body);
        try {
            auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("malformed completion response: ") + e.what());
        }
    }
    if (last_error == "timeout") throw Timeout("request timed out after retries");
    if (last_error == "rate limited") throw RateLimited("rate limited after retries");
    throw BackendError("request failed after retries: " + last_error);
}

}  // namespace lifebench::llm
