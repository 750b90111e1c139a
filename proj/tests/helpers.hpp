#pragma once

// Shared test utilities: scratch directories, instrumented backends, and a
// tiny subprocess runner for CLI-level tests.

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "memloop/errors.hpp"
#include "memloop/llm_gateway.hpp"
#include "memloop/scenario.hpp"

namespace testutil {

class TempDir {
public:
    TempDir() {
        auto pattern = (std::filesystem::temp_directory_path() / "memloop-test-XXXXXX").string();
        std::string buffer = pattern;
        if (mkdtemp(buffer.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = buffer;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Scenario backend instrumented with per-role call counts and an in-flight
// high-water mark.
class CountingScenarioBackend : public memloop::ChatBackend {
public:
    std::string complete(const memloop::ChatRequest& request) override {
        int now = ++in_flight_;
        int peak = peak_in_flight_.load();
        while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++calls_[request.role_tag];
        }
        auto text = inner_.complete(request);
        --in_flight_;
        return text;
    }
    std::string id() const override { return "counting-scenario"; }

    int calls(memloop::RoleTag tag) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = calls_.find(tag);
        return it == calls_.end() ? 0 : it->second;
    }
    int total_calls() const {
        std::lock_guard<std::mutex> lock(mutex_);
        int total = 0;
        for (const auto& [tag, count] : calls_) {
            (void)tag;
            total += count;
        }
        return total;
    }
    int peak_in_flight() const { return peak_in_flight_.load(); }

private:
    memloop::ScenarioBackend inner_;
    mutable std::mutex mutex_;
    std::map<memloop::RoleTag, int> calls_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_in_flight_{0};
};

// Returns canned text per role; empty string means "throw a GatewayError".
class StaticBackend : public memloop::ChatBackend {
public:
    std::map<memloop::RoleTag, std::string> responses;
    std::string fallback{"unscripted"};

    std::string complete(const memloop::ChatRequest& request) override {
        auto it = responses.find(request.role_tag);
        if (it == responses.end()) {
            return fallback;
        }
        if (it->second.empty()) {
            throw memloop::GatewayError("static backend: simulated failure");
        }
        return it->second;
    }
    std::string id() const override { return "static"; }
};

struct CommandResult {
    int exit_code{-1};
    std::string output; // stdout only
};

inline std::string cli_path() {
    const char* path = std::getenv("MEMLOOP_CLI");
    return path != nullptr ? path : "build/tools/memloop";
}

inline CommandResult run_command(const std::string& command) {
    CommandResult result;
    std::string wrapped = command + " 2>/dev/null";
    FILE* pipe = popen(wrapped.c_str(), "r");
    if (pipe == nullptr) {
        return result;
    }
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        result.output.append(buffer.data(), n);
    }
    int status = pclose(pipe);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    }
    return result;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Recursive byte-level directory comparison; returns a description of the
// first difference, or empty when identical.
inline std::string dir_diff(const std::filesystem::path& a, const std::filesystem::path& b) {
    std::map<std::string, std::filesystem::path> files_a;
    std::map<std::string, std::filesystem::path> files_b;
    auto collect = [](const std::filesystem::path& root,
                      std::map<std::string, std::filesystem::path>& out) {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
            if (entry.is_regular_file()) {
                out[std::filesystem::relative(entry.path(), root).string()] = entry.path();
            }
        }
    };
    collect(a, files_a);
    collect(b, files_b);
    if (files_a.size() != files_b.size()) {
        return "file count differs: " + std::to_string(files_a.size()) + " vs " +
               std::to_string(files_b.size());
    }
    for (const auto& [rel, path_a] : files_a) {
        auto it = files_b.find(rel);
        if (it == files_b.end()) {
            return "missing in second dir: " + rel;
        }
        if (read_file(path_a) != read_file(it->second)) {
            return "content differs: " + rel;
        }
    }
    return "";
}

} // namespace testutil
