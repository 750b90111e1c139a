// Benchmarks the OpenMP kernels against their serial references: cosine scan,
// batch embedding, and batch metric scoring.

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "memloop/embedding.hpp"
#include "memloop/eval_metrics.hpp"
#include "memloop/memory_store.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace memloop;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string random_sentence(std::mt19937& rng, int words) {
    static const char* kVocab[] = {"river",  "studio", "plan",   "dance",  "market", "friend",
                                   "garden", "travel", "summer", "letter", "music",  "story",
                                   "bridge", "coffee", "puzzle", "photo"};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
    std::ostringstream out;
    for (int i = 0; i < words; ++i) {
        if (i > 0) {
            out << ' ';
        }
        out << kVocab[pick(rng)];
    }
    return out.str();
}

} // namespace

int main() {
    std::mt19937 rng(42);
    LocalEmbedder embedder(256);

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; parallel kernels run serially\n");
#endif

    // Batch embedding.
    std::vector<std::string> texts;
    for (int i = 0; i < 20000; ++i) {
        texts.push_back(random_sentence(rng, 12));
    }
    auto start = Clock::now();
    auto serial_vecs = embed_batch_serial(embedder, texts);
    double serial_ms = ms_since(start);
    start = Clock::now();
    auto parallel_vecs = embed_batch(embedder, texts);
    double parallel_ms = ms_since(start);
    std::printf("embed_batch       %zu texts: serial %.1f ms, parallel %.1f ms, equal=%s\n",
                texts.size(), serial_ms, parallel_ms,
                serial_vecs == parallel_vecs ? "yes" : "NO");

    // Cosine scan.
    std::vector<MemoryEntry> entries(serial_vecs.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].embedding = serial_vecs[i];
    }
    auto query = embedder.embed("summer travel plan");
    start = Clock::now();
    auto serial_scores = cosine_scan_serial(query, entries);
    serial_ms = ms_since(start);
    start = Clock::now();
    auto parallel_scores = cosine_scan(query, entries);
    parallel_ms = ms_since(start);
    std::printf("cosine_scan       %zu entries: serial %.1f ms, parallel %.1f ms, equal=%s\n",
                entries.size(), serial_ms, parallel_ms,
                serial_scores == parallel_scores ? "yes" : "NO");

    // Metric row scoring.
    std::vector<MetricRow> rows(20000);
    for (auto& row : rows) {
        row.gold = random_sentence(rng, 10);
        row.predicted = random_sentence(rng, 10);
    }
    start = Clock::now();
    auto serial_metric = score_rows_serial(rows);
    serial_ms = ms_since(start);
    start = Clock::now();
    auto parallel_metric = score_rows(rows);
    parallel_ms = ms_since(start);
    std::printf("score_rows        %zu rows: serial %.1f ms, parallel %.1f ms, equal=%s\n",
                rows.size(), serial_ms, parallel_ms,
                serial_metric == parallel_metric ? "yes" : "NO");

    bool all_equal = serial_vecs == parallel_vecs && serial_scores == parallel_scores &&
                     serial_metric == parallel_metric;
    return all_equal ? 0 : 1;
}
