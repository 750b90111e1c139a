#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace memloop {

// Which instruction template produced the request's system prompt.
enum class RoleTag {
    challenger,
    evaluator_answer,
    evaluator_judge,
    adapter_strategy,
    adapter_content,
    memory_summarizer,
    llm_judge,
};

const char* to_string(RoleTag tag);
RoleTag role_tag_from_string(const std::string& name);

struct ChatRequest {
    RoleTag role_tag{RoleTag::challenger};
    std::string system_prompt;
    std::string user_prompt;
    double temperature{0.3}; // in [0,1]
    int max_tokens{1024};
};

struct ChatResponse {
    std::string text;
    std::string backend_id;
    std::string request_digest;
};

struct ReplayEntry {
    std::string request_digest;
    std::string role_tag;
    std::string response_text;
};

// Stable across processes and platforms; changes iff any digested field does.
std::string request_digest(const ChatRequest& request);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct RemoteBackendConfig {
    std::string base_url; // e.g. https://host/v1
    std::string api_key;
    std::string model;
    int attempts{3};
    int initial_backoff_ms{1000};
    double backoff_factor{2.0};
    int timeout_seconds{60};
};

// OpenAI-compatible chat completions endpoint with retry + backoff.
class RemoteChatBackend : public ChatBackend {
public:
    explicit RemoteChatBackend(RemoteBackendConfig config);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "remote:" + config_.model; }

private:
    RemoteBackendConfig config_;
};

std::vector<ReplayEntry> load_replay_file(const std::filesystem::path& path);
void append_replay_entry(const std::filesystem::path& path, const ReplayEntry& entry);

// Deterministic scripted backend: answers from a replay file keyed by request
// digest. A miss raises ReplayMissError naming the role tag and the
// nearest-digest entry to aid fixture repair.
class ReplayBackend : public ChatBackend {
public:
    explicit ReplayBackend(const std::filesystem::path& path);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "replay"; }

    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, ReplayEntry> entries_; // digest -> entry
    std::filesystem::path path_;
};

// Record mode: forwards to the inner backend and appends a ReplayEntry per
// previously unseen digest. Appends are serialized.
class RecordingBackend : public ChatBackend {
public:
    RecordingBackend(ChatBackend& inner, std::filesystem::path out_path);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "record(" + inner_.id() + ")"; }

private:
    ChatBackend& inner_;
    std::filesystem::path out_path_;
    std::mutex mutex_;
    std::map<std::string, std::string> seen_; // digest -> response
};

// Front door for all generative calls. Bounds in-flight requests and stamps
// responses with the request digest. Callers must not assume completion
// order; sequencing belongs to the loop.
class LlmGateway {
public:
    explicit LlmGateway(ChatBackend& backend, int max_in_flight = 4);

    ChatResponse chat(const ChatRequest& request);

    ChatBackend& backend() { return backend_; }

private:
    ChatBackend& backend_;
    int max_in_flight_;
    int in_flight_{0};
    std::mutex mutex_;
    std::condition_variable slot_free_;
};

} // namespace memloop
