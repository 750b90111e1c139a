#include "memloop/llm_gateway.hpp"

#include <cstdio>
#include <fstream>

#include "memloop/errors.hpp"
#include "memloop/hashing.hpp"
#include "memloop/log.hpp"

#include "http_util.hpp"

namespace memloop {

using nlohmann::json;

const char* to_string(RoleTag tag) {
    switch (tag) {
    case RoleTag::challenger: return "challenger";
    case RoleTag::evaluator_answer: return "evaluator_answer";
    case RoleTag::evaluator_judge: return "evaluator_judge";
    case RoleTag::adapter_strategy: return "adapter_strategy";
    case RoleTag::adapter_content: return "adapter_content";
    case RoleTag::memory_summarizer: return "memory_summarizer";
    case RoleTag::llm_judge: return "llm_judge";
    }
    return "?";
}

RoleTag role_tag_from_string(const std::string& name) {
    if (name == "challenger") return RoleTag::challenger;
    if (name == "evaluator_answer") return RoleTag::evaluator_answer;
    if (name == "evaluator_judge") return RoleTag::evaluator_judge;
    if (name == "adapter_strategy") return RoleTag::adapter_strategy;
    if (name == "adapter_content") return RoleTag::adapter_content;
    if (name == "memory_summarizer") return RoleTag::memory_summarizer;
    if (name == "llm_judge") return RoleTag::llm_judge;
    throw Error("unknown role tag: " + name);
}

std::string request_digest(const ChatRequest& request) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.4f", request.temperature);

    std::uint64_t hash = kFnvOffset;
    auto mix = [&hash](std::string_view part) {
        hash = fnv1a64(part, hash);
        hash = fnv1a64(std::string_view("\x1f", 1), hash);
    };
    mix(to_string(request.role_tag));
    mix(request.system_prompt);
    mix(request.user_prompt);
    mix(temp);
    mix(std::to_string(request.max_tokens));
    return hex64(hash);
}

RemoteChatBackend::RemoteChatBackend(RemoteBackendConfig config) : config_(std::move(config)) {}

std::string RemoteChatBackend::complete(const ChatRequest& request) {
    json body = {{"model", config_.model},
                 {"messages",
                  json::array({{{"role", "system"}, {"content", request.system_prompt}},
                               {{"role", "user"}, {"content", request.user_prompt}}})},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens}};

    detail::RetrySpec retry;
    retry.attempts = config_.attempts;
    retry.initial_backoff = std::chrono::milliseconds(config_.initial_backoff_ms);
    retry.backoff_factor = config_.backoff_factor;
    retry.timeout = std::chrono::seconds(config_.timeout_seconds);

    auto response = detail::post_json_with_retry(config_.base_url, "/chat/completions",
                                                 config_.api_key, body, retry,
                                                 std::string("chat(") + to_string(request.role_tag) +
                                                     ")");
    try {
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw GatewayError(std::string("chat: response missing choices[0].message.content: ") +
                           e.what());
    }
}

std::vector<ReplayEntry> load_replay_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open replay file: " + path.string());
    }
    std::vector<ReplayEntry> entries;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        json parsed;
        try {
            parsed = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("replay file " + path.string() + " line " +
                             std::to_string(line_number) + ": " + e.what());
        }
        ReplayEntry entry;
        entry.request_digest = parsed.at("request_digest").get<std::string>();
        entry.role_tag = parsed.at("role_tag").get<std::string>();
        entry.response_text = parsed.at("response_text").get<std::string>();
        entries.push_back(std::move(entry));
    }
    return entries;
}

void append_replay_entry(const std::filesystem::path& path, const ReplayEntry& entry) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw IoError("cannot append to replay file: " + path.string());
    }
    json line = {{"request_digest", entry.request_digest},
                 {"role_tag", entry.role_tag},
                 {"response_text", entry.response_text}};
    out << line.dump() << '\n';
}

ReplayBackend::ReplayBackend(const std::filesystem::path& path) : path_(path) {
    for (auto& entry : load_replay_file(path)) {
        auto digest = entry.request_digest;
        if (!entries_.emplace(digest, std::move(entry)).second) {
            throw ParseError("replay file " + path.string() + " has duplicate digest " + digest);
        }
    }
}

std::string ReplayBackend::complete(const ChatRequest& request) {
    auto digest = request_digest(request);
    auto it = entries_.find(digest);
    if (it != entries_.end()) {
        return it->second.response_text;
    }

    // Nearest digest (lexicographic neighbor) to aid fixture repair.
    std::string nearest = "<none>";
    auto after = entries_.lower_bound(digest);
    if (after != entries_.end()) {
        nearest = after->second.request_digest + " (" + after->second.role_tag + ")";
    } else if (!entries_.empty()) {
        nearest = entries_.rbegin()->second.request_digest + " (" +
                  entries_.rbegin()->second.role_tag + ")";
    }
    throw ReplayMissError("replay miss for role_tag=" + std::string(to_string(request.role_tag)) +
                              " digest=" + digest + " in " + path_.string() +
                              "; nearest entry: " + nearest,
                          to_string(request.role_tag), nearest);
}

RecordingBackend::RecordingBackend(ChatBackend& inner, std::filesystem::path out_path)
    : inner_(inner), out_path_(std::move(out_path)) {
    if (std::filesystem::exists(out_path_)) {
        for (auto& entry : load_replay_file(out_path_)) {
            seen_.emplace(entry.request_digest, entry.response_text);
        }
    }
}

std::string RecordingBackend::complete(const ChatRequest& request) {
    auto digest = request_digest(request);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = seen_.find(digest);
        if (it != seen_.end()) {
            return it->second;
        }
    }
    auto text = inner_.complete(request);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (seen_.emplace(digest, text).second) {
            append_replay_entry(out_path_, {digest, to_string(request.role_tag), text});
        }
    }
    return text;
}

LlmGateway::LlmGateway(ChatBackend& backend, int max_in_flight)
    : backend_(backend), max_in_flight_(max_in_flight > 0 ? max_in_flight : 1) {}

ChatResponse LlmGateway::chat(const ChatRequest& request) {
    if (request.system_prompt.empty() || request.user_prompt.empty()) {
        throw GatewayError(std::string("chat(") + to_string(request.role_tag) +
                           "): prompts must be non-empty");
    }

    {
        std::unique_lock<std::mutex> lock(mutex_);
        slot_free_.wait(lock, [this] { return in_flight_ < max_in_flight_; });
        ++in_flight_;
    }

    ChatResponse response;
    try {
        response.text = backend_.complete(request);
    } catch (...) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --in_flight_;
        }
        slot_free_.notify_one();
        throw;
    }
    {
        std::lock_guard<std::mutex> lock(mutex_);
        --in_flight_;
    }
    slot_free_.notify_one();

    response.backend_id = backend_.id();
    response.request_digest = request_digest(request);
    return response;
}

} // namespace memloop
