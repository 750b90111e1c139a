#pragma once

// Shared HTTP plumbing for the remote chat and embedding backends.

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include "memloop/errors.hpp"
#include "memloop/log.hpp"

#include "httplib.h"
#include "json.hpp"

namespace memloop::detail {

struct SplitUrl {
    std::string host_port; // scheme://host[:port]
    std::string path_prefix;
};

inline SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw GatewayError("base URL must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {base_url, ""};
    }
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {base_url.substr(0, path_start), prefix};
}

struct RetrySpec {
    int attempts{3};
    std::chrono::milliseconds initial_backoff{1000};
    double backoff_factor{2.0};
    std::chrono::seconds timeout{60};
};

// POSTs JSON, retrying with exponential backoff on transport errors and
// non-2xx statuses. Returns the parsed response body.
inline nlohmann::json post_json_with_retry(const std::string& base_url,
                                           const std::string& endpoint,
                                           const std::string& api_key,
                                           const nlohmann::json& body,
                                           const RetrySpec& retry,
                                           const std::string& what) {
    auto url = split_base_url(base_url);
    std::string payload = body.dump();
    std::string last_error;

    auto backoff = retry.initial_backoff;
    for (int attempt = 1; attempt <= retry.attempts; ++attempt) {
        httplib::Client client(url.host_port);
        client.set_connection_timeout(retry.timeout.count(), 0);
        client.set_read_timeout(retry.timeout.count(), 0);
        client.set_write_timeout(retry.timeout.count(), 0);
        httplib::Headers headers;
        if (!api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key);
        }

        auto result = client.Post(url.path_prefix + endpoint, headers, payload,
                                  "application/json");
        if (result && result->status >= 200 && result->status < 300) {
            try {
                return nlohmann::json::parse(result->body);
            } catch (const nlohmann::json::parse_error& e) {
                last_error = what + ": invalid JSON in response: " + e.what();
            }
        } else if (result) {
            last_error = what + ": HTTP " + std::to_string(result->status);
        } else {
            last_error = what + ": transport error (" + httplib::to_string(result.error()) + ")";
        }

        if (attempt < retry.attempts) {
            log_warn(last_error + "; retrying in " + std::to_string(backoff.count()) + "ms");
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * retry.backoff_factor));
        }
    }
    throw GatewayError(last_error + " after " + std::to_string(retry.attempts) + " attempts");
}

} // namespace memloop::detail
