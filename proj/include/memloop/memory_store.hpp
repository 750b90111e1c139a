#pragma once

#include <string>
#include <vector>

#include "memloop/dialogue.hpp"
#include "memloop/embedding.hpp"
#include "memloop/llm_gateway.hpp"
#include "memloop/prompts.hpp"
#include "memloop/strategy.hpp"

namespace memloop {

enum class Provenance { constructed, adapter_supplement };

const char* to_string(Provenance provenance);
Provenance provenance_from_string(const std::string& name);

// Where an entry came from: a session turn span, or the adapter.
struct EntrySource {
    std::string dialogue_id;
    int session_index{0};
    std::string turn_span; // "first..last" turn ids; empty for supplements
    bool adapter_supplement{false};

    bool operator==(const EntrySource&) const = default;
};

struct MemoryEntry {
    std::string entry_id; // monotone per store, assigned at insertion
    std::string summary;
    std::vector<std::string> keywords;
    std::string timestamp_label; // session date_label
    EntrySource source;
    EmbeddingVector embedding; // embed(summary) at insertion time
    std::vector<std::string> links;
    Provenance provenance{Provenance::constructed};
    long created_seq{0};

    bool operator==(const MemoryEntry&) const = default;
};

struct StoreConfig {
    double dup_threshold{0.95};
    double link_threshold{0.60};
    int max_links{3};
    int max_entries_per_session{16};

    bool operator==(const StoreConfig&) const = default;
};

// Update decisions surfaced for tests and logs; not persisted.
struct StoreStats {
    int dedup_events{0};
    int links_created{0};
};

struct MemoryStore {
    std::string dialogue_id;
    std::vector<MemoryEntry> entries;
    long next_seq{1};
    StoreConfig config;
    StoreStats stats;

    const MemoryEntry* find(const std::string& entry_id) const;

    // Stats are observational and excluded from equality.
    bool operator==(const MemoryStore& other) const {
        return dialogue_id == other.dialogue_id && entries == other.entries &&
               next_seq == other.next_seq && config == other.config;
    }
};

// Frequency keywords used by the degraded-parse fallback and for adapter
// supplements: top-k normalized tokens by count, ties by first occurrence.
std::vector<std::string> frequency_keywords(const std::string& text, int k = 5);

// Summarizes one session through the gateway (role memory_summarizer, system
// prompt = render(strategy)) and parses "SUMMARY | kw, kw" lines into entries.
// An unparseable response degrades to a single raw-text entry with frequency
// keywords. Entries carry the session timestamp, source span and embedding,
// but no id yet — ids are assigned by update_store.
std::vector<MemoryEntry> construct_session_memory(const std::string& dialogue_id,
                                                  const Session& session,
                                                  const ExtractionStrategy& strategy,
                                                  LlmGateway& gateway, const Embedder& embedder,
                                                  const PromptSet& prompts,
                                                  const StoreConfig& config);

// Inserts new entries with duplicate suppression (cosine >= dup_threshold)
// and bidirectional linking to the top-m existing entries at or above
// link_threshold. Existing entries' content is never modified; only their
// links lists may grow.
MemoryStore update_store(MemoryStore store, std::vector<MemoryEntry> new_entries);

// Cosine of the query against every entry. `cosine_scan` is the OpenMP
// kernel, `cosine_scan_serial` the serial reference kept for tests and the
// benchmark.
std::vector<double> cosine_scan(const EmbeddingVector& query,
                                const std::vector<MemoryEntry>& entries);
std::vector<double> cosine_scan_serial(const EmbeddingVector& query,
                                       const std::vector<MemoryEntry>& entries);

// Top-k entries by cosine similarity, non-increasing, ties broken by
// ascending entry_id. Returns fewer than k when the store is smaller.
std::vector<MemoryEntry> retrieve(const MemoryStore& store, const std::string& query, int k,
                                  const Embedder& embedder);

// Deterministic context rendering, one block per entry in input order.
std::string render_context(const std::vector<MemoryEntry>& entries);

} // namespace memloop
