#pragma once

#include <string>
#include <vector>

namespace memloop {

// Unit-norm dense vector. Text with no usable tokens maps to the zero vector,
// which is flagged non-normalizable and ranks last in retrieval.
struct EmbeddingVector {
    std::vector<double> values;

    bool is_zero() const;
    std::size_t dimension() const { return values.size(); }

    bool operator==(const EmbeddingVector&) const = default;
};

// Standard cosine; zero vectors score 0.0 by convention.
// Throws on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(const std::string& text) const = 0;
    virtual int dimension() const = 0;
};

// Deterministic offline embedder: hashed bag of words over the normalized
// tokens, fixed seed, L2-normalized, components rounded to 9 significant
// digits so in-memory vectors match persisted ones exactly.
class LocalEmbedder : public Embedder {
public:
    explicit LocalEmbedder(int dim = 256);

    EmbeddingVector embed(const std::string& text) const override;
    int dimension() const override { return dim_; }

    // Allocation-free core: fills a caller-provided, dim-sized buffer. The
    // batch kernel preallocates all rows and runs this in parallel.
    void embed_into(const std::string& text, std::vector<double>& values) const;

private:
    int dim_;
};

class LlmGateway; // not used here; remote embeddings share the HTTP plumbing

struct RemoteEmbedderConfig {
    std::string base_url;
    std::string api_key;
    std::string model;
    int attempts{3};
    int initial_backoff_ms{1000};
    double backoff_factor{2.0};
    int timeout_seconds{60};
};

// Provider-backed embedder (POST <base_url>/embeddings). Responses are
// L2-normalized before use.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(RemoteEmbedderConfig config, int dim);

    EmbeddingVector embed(const std::string& text) const override;
    int dimension() const override { return dim_; }

private:
    RemoteEmbedderConfig config_;
    int dim_;
};

// Batch encoding: `embed_batch` is the OpenMP kernel, `embed_batch_serial`
// the serial reference kept for tests and the benchmark.
std::vector<EmbeddingVector> embed_batch(const Embedder& embedder,
                                         const std::vector<std::string>& texts);
std::vector<EmbeddingVector> embed_batch_serial(const Embedder& embedder,
                                                const std::vector<std::string>& texts);

} // namespace memloop
