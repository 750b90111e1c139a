#include "doctest.h"

#include <cmath>
#include <random>

#include <thread>

#include "memloop/embedding.hpp"
#include "memloop/errors.hpp"

#include "httplib.h"
#include "json.hpp"

#include "oracles.hpp"

using namespace memloop;

TEST_CASE("embed of empty or article-only text is the flagged zero vector") {
    LocalEmbedder embedder;
    auto zero = embedder.embed("");
    CHECK(zero.is_zero());
    CHECK(zero.dimension() == 256);
    CHECK(embedder.embed("the a an").is_zero());
}

TEST_CASE("embed is deterministic") {
    LocalEmbedder embedder;
    auto a = embedder.embed("dance studio plans for the summer");
    auto b = embedder.embed("dance studio plans for the summer");
    CHECK(a == b);
}

TEST_CASE("embedding is unit norm within 1e-6") {
    LocalEmbedder embedder;
    for (const std::string text : {"dance studio", "quarterly tax filing", "a b c d e f g"}) {
        auto vec = embedder.embed(text);
        double norm = 0.0;
        for (double v : vec.values) {
            norm += v * v;
        }
        CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
    }
}

TEST_CASE("bag-of-words: word order does not matter") {
    LocalEmbedder embedder;
    CHECK(embedder.embed("a b") == embedder.embed("b a"));
    CHECK(embedder.embed("dance studio plans") == embedder.embed("plans dance studio"));
}

TEST_CASE("related texts score higher than unrelated ones") {
    LocalEmbedder embedder;
    auto query = embedder.embed("dance studio plans");
    double related = cosine(query, embedder.embed("dance studio"));
    double unrelated = cosine(query, embedder.embed("quarterly tax filing"));
    CHECK(related > unrelated);

    // Cross-check against the sparse bag-of-words oracle: with no hash
    // collisions among these tokens the dense cosine matches exactly.
    CHECK(related ==
          doctest::Approx(oracle::sparse_cosine("dance studio plans", "dance studio"))
              .epsilon(1e-9));
    CHECK(unrelated ==
          doctest::Approx(oracle::sparse_cosine("dance studio plans", "quarterly tax filing"))
              .epsilon(1e-9));
}

TEST_CASE("cosine base cases") {
    LocalEmbedder embedder;
    auto v = embedder.embed("dance studio");
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-9));

    EmbeddingVector zero;
    zero.values.assign(256, 0.0);
    CHECK(cosine(v, zero) == 0.0);

    EmbeddingVector x;
    x.values = {1.0, 0.0};
    EmbeddingVector y;
    y.values = {0.0, 1.0};
    CHECK(cosine(x, y) == 0.0);
}

TEST_CASE("cosine rejects dimension mismatches") {
    EmbeddingVector x;
    x.values = {1.0, 0.0};
    EmbeddingVector y;
    y.values = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(cosine(x, y), Error);
}

TEST_CASE("cosine is exactly symmetric and bounded") {
    LocalEmbedder embedder;
    std::mt19937 rng(5);
    static const char* kVocab[] = {"river", "dance", "studio", "plan", "tax", "filing", "summer"};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
    std::uniform_int_distribution<int> length(1, 8);
    for (int i = 0; i < 100; ++i) {
        std::string a;
        std::string b;
        for (int w = 0; w < length(rng); ++w) {
            a += std::string(kVocab[pick(rng)]) + " ";
        }
        for (int w = 0; w < length(rng); ++w) {
            b += std::string(kVocab[pick(rng)]) + " ";
        }
        auto va = embedder.embed(a);
        auto vb = embedder.embed(b);
        CHECK(cosine(va, vb) == cosine(vb, va));
        CHECK(std::abs(cosine(va, vb)) <= 1.0 + 1e-9);
    }
}

TEST_CASE("embed_batch parallel kernel equals serial reference") {
    LocalEmbedder embedder;
    std::vector<std::string> texts;
    for (int i = 0; i < 300; ++i) {
        texts.push_back("text number " + std::to_string(i) + " about dance studio plans");
    }
    CHECK(embed_batch(embedder, texts) == embed_batch_serial(embedder, texts));
}

TEST_CASE("remote embedder normalizes provider vectors") {
    httplib::Server server;
    server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("model") == "stub-embed");
        CHECK(body.at("input").is_string());
        nlohmann::json reply = {{"data", {{{"embedding", {3.0, 4.0}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteEmbedderConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.model = "stub-embed";
    config.initial_backoff_ms = 1;
    RemoteEmbedder embedder(config, 2);
    auto vec = embedder.embed("anything");
    REQUIRE(vec.values.size() == 2);
    CHECK(vec.values[0] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(vec.values[1] == doctest::Approx(0.8).epsilon(1e-9));

    server.stop();
    server_thread.join();
}
