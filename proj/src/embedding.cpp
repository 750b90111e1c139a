#include "memloop/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "memloop/errors.hpp"
#include "memloop/hashing.hpp"
#include "memloop/numeric.hpp"

#include "http_util.hpp"

namespace memloop {

namespace {

// Fixed seed; changing it would invalidate every committed fixture embedding.
constexpr std::uint64_t kTokenSeed = 0x9e3779b97f4a7c15ULL;

} // namespace

bool EmbeddingVector::is_zero() const {
    for (double v : values) {
        if (v != 0.0) {
            return false;
        }
    }
    return true;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size()) {
        throw Error("cosine: dimension mismatch (" + std::to_string(a.values.size()) + " vs " +
                    std::to_string(b.values.size()) + ")");
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        norm_a += a.values[i] * a.values[i];
        norm_b += b.values[i] * b.values[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

LocalEmbedder::LocalEmbedder(int dim) : dim_(dim) {}

EmbeddingVector LocalEmbedder::embed(const std::string& text) const {
    EmbeddingVector vec;
    vec.values.assign(static_cast<std::size_t>(dim_), 0.0);
    embed_into(text, vec.values);
    return vec;
}

void LocalEmbedder::embed_into(const std::string& text, std::vector<double>& values) const {
    std::fill(values.begin(), values.end(), 0.0);

    // Streaming equivalent of hashing each normalize_text token: punctuation
    // skipped, lowercased, articles dropped. Avoids per-token allocations so
    // the batch kernel scales.
    std::uint64_t hash = kTokenSeed;
    std::size_t token_len = 0;
    char head[3] = {0, 0, 0};
    auto flush = [&] {
        if (token_len == 0) {
            return;
        }
        bool article = (token_len == 1 && head[0] == 'a') ||
                       (token_len == 2 && head[0] == 'a' && head[1] == 'n') ||
                       (token_len == 3 && head[0] == 't' && head[1] == 'h' && head[2] == 'e');
        if (!article) {
            values[static_cast<std::size_t>(hash % static_cast<std::uint64_t>(dim_))] += 1.0;
        }
        hash = kTokenSeed;
        token_len = 0;
    };
    for (unsigned char raw : text) {
        if (std::ispunct(raw)) {
            continue;
        }
        if (std::isspace(raw)) {
            flush();
            continue;
        }
        auto lowered = static_cast<unsigned char>(std::tolower(raw));
        hash ^= lowered;
        hash *= kFnvPrime;
        if (token_len < 3) {
            head[token_len] = static_cast<char>(lowered);
        }
        ++token_len;
    }
    flush();

    double norm = 0.0;
    for (double v : values) {
        norm += v * v;
    }
    if (norm == 0.0) {
        return; // zero-vector convention for empty / article-only text
    }
    norm = std::sqrt(norm);
    for (double& v : values) {
        v = round_sig(v / norm);
    }
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config, int dim)
    : config_(std::move(config)), dim_(dim) {}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) const {
    nlohmann::json body = {{"model", config_.model}, {"input", text}};
    detail::RetrySpec retry;
    retry.attempts = config_.attempts;
    retry.initial_backoff = std::chrono::milliseconds(config_.initial_backoff_ms);
    retry.backoff_factor = config_.backoff_factor;
    retry.timeout = std::chrono::seconds(config_.timeout_seconds);

    auto response = detail::post_json_with_retry(config_.base_url, "/embeddings",
                                                 config_.api_key, body, retry, "embeddings");
    if (!response.contains("data") || !response["data"].is_array() || response["data"].empty() ||
        !response["data"][0].contains("embedding")) {
        throw GatewayError("embeddings: response missing data[0].embedding");
    }

    EmbeddingVector vec;
    for (const auto& v : response["data"][0]["embedding"]) {
        vec.values.push_back(v.get<double>());
    }

    double norm = 0.0;
    for (double v : vec.values) {
        norm += v * v;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : vec.values) {
            v = round_sig(v / norm);
        }
    }
    return vec;
}

std::vector<EmbeddingVector> embed_batch_serial(const Embedder& embedder,
                                                const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out[i] = embedder.embed(texts[i]);
    }
    return out;
}

std::vector<EmbeddingVector> embed_batch(const Embedder& embedder,
                                         const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out(texts.size());
    const auto n = static_cast<std::int64_t>(texts.size());

    // The local embedder splits allocation from compute so the parallel fill
    // does not contend on the allocator; other embedders fall back to the
    // per-text path.
    if (const auto* local = dynamic_cast<const LocalEmbedder*>(&embedder)) {
        const auto dim = static_cast<std::size_t>(local->dimension());
        for (auto& vec : out) {
            vec.values.resize(dim);
        }
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            local->embed_into(texts[idx], out[idx].values);
        }
        return out;
    }

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out[idx] = embedder.embed(texts[idx]);
    }
    return out;
}

} // namespace memloop
