#include "memloop/memory_store.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "memloop/errors.hpp"
#include "memloop/eval_metrics.hpp"
#include "memloop/log.hpp"

namespace memloop {

const char* to_string(Provenance provenance) {
    return provenance == Provenance::adapter_supplement ? "adapter_supplement" : "constructed";
}

Provenance provenance_from_string(const std::string& name) {
    if (name == "adapter_supplement") {
        return Provenance::adapter_supplement;
    }
    if (name == "constructed") {
        return Provenance::constructed;
    }
    throw Error("unknown provenance: " + name);
}

const MemoryEntry* MemoryStore::find(const std::string& entry_id) const {
    for (const auto& entry : entries) {
        if (entry.entry_id == entry_id) {
            return &entry;
        }
    }
    return nullptr;
}

namespace {

std::string trim(const std::string& text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::string entry_id_for(long seq) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "m%06ld", seq);
    return buffer;
}

} // namespace

std::vector<std::string> frequency_keywords(const std::string& text, int k) {
    auto tokens = normalize_text(text);
    std::map<std::string, std::pair<int, std::size_t>> counts; // token -> (count, first index)
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = counts.find(tokens[i]);
        if (it == counts.end()) {
            counts.emplace(tokens[i], std::make_pair(1, i));
        } else {
            ++it->second.first;
        }
    }
    std::vector<std::pair<std::string, std::pair<int, std::size_t>>> ranked(counts.begin(),
                                                                            counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.first != b.second.first) {
            return a.second.first > b.second.first;
        }
        return a.second.second < b.second.second;
    });
    std::vector<std::string> keywords;
    for (const auto& [token, meta] : ranked) {
        (void)meta;
        if (static_cast<int>(keywords.size()) >= k) {
            break;
        }
        keywords.push_back(token);
    }
    return keywords;
}

std::vector<MemoryEntry> construct_session_memory(const std::string& dialogue_id,
                                                  const Session& session,
                                                  const ExtractionStrategy& strategy,
                                                  LlmGateway& gateway, const Embedder& embedder,
                                                  const PromptSet& prompts,
                                                  const StoreConfig& config) {
    if (session.turns.empty()) {
        throw Error("construct_session_memory: session " + std::to_string(session.session_index) +
                    " of " + dialogue_id + " has no turns");
    }

    auto response = gateway.chat(make_summarizer_request(prompts, strategy, session_text(session)));

    EntrySource source;
    source.dialogue_id = dialogue_id;
    source.session_index = session.session_index;
    source.turn_span = session.turns.front().turn_id + ".." + session.turns.back().turn_id;

    auto finish = [&](MemoryEntry entry) {
        entry.timestamp_label = session.date_label;
        entry.source = source;
        entry.provenance = Provenance::constructed;
        entry.embedding = embedder.embed(entry.summary);
        return entry;
    };

    std::vector<MemoryEntry> entries;
    std::istringstream lines(response.text);
    std::string line;
    bool truncated = false;
    while (std::getline(lines, line)) {
        auto bar = line.find('|');
        if (bar == std::string::npos) {
            continue;
        }
        MemoryEntry entry;
        entry.summary = trim(line.substr(0, bar));
        if (entry.summary.empty()) {
            continue;
        }
        std::istringstream keyword_stream(line.substr(bar + 1));
        std::string keyword;
        while (std::getline(keyword_stream, keyword, ',')) {
            keyword = trim(keyword);
            if (!keyword.empty()) {
                entry.keywords.push_back(keyword);
            }
        }
        if (static_cast<int>(entries.size()) >= config.max_entries_per_session) {
            truncated = true;
            break;
        }
        entries.push_back(finish(std::move(entry)));
    }
    if (truncated) {
        log_warn("summarizer emitted more than " +
                 std::to_string(config.max_entries_per_session) + " entries for session " +
                 std::to_string(session.session_index) + " of " + dialogue_id + "; truncated");
    }

    if (entries.empty()) {
        log_warn("summarizer response for session " + std::to_string(session.session_index) +
                 " of " + dialogue_id + " was unparseable; degraded to one raw entry");
        MemoryEntry entry;
        entry.summary = trim(response.text);
        entry.keywords = frequency_keywords(entry.summary);
        entries.push_back(finish(std::move(entry)));
    }
    return entries;
}

MemoryStore update_store(MemoryStore store, std::vector<MemoryEntry> new_entries) {
    for (auto& entry : new_entries) {
        // (a) duplicate suppression
        bool duplicate = false;
        for (const auto& existing : store.entries) {
            double similarity = cosine(entry.embedding, existing.embedding);
            if (similarity >= store.config.dup_threshold) {
                ++store.stats.dedup_events;
                log_debug("dedup: new entry '" + entry.summary + "' suppressed by " +
                          existing.entry_id + " (cosine " + std::to_string(similarity) + ")");
                duplicate = true;
                break;
            }
        }
        if (duplicate) {
            continue;
        }

        // (b) insert and link to the top-m neighbors above link_threshold
        auto scores = cosine_scan(entry.embedding, store.entries);
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= store.config.link_threshold) {
                candidates.push_back(i);
            }
        }
        std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) {
                return scores[a] > scores[b];
            }
            return store.entries[a].entry_id < store.entries[b].entry_id;
        });
        if (static_cast<int>(candidates.size()) > store.config.max_links) {
            candidates.resize(static_cast<std::size_t>(store.config.max_links));
        }

        entry.entry_id = entry_id_for(store.next_seq);
        entry.created_seq = store.next_seq;
        ++store.next_seq;
        entry.links.clear();
        for (auto idx : candidates) {
            entry.links.push_back(store.entries[idx].entry_id);
            store.entries[idx].links.push_back(entry.entry_id);
            ++store.stats.links_created;
        }
        log_debug("insert " + entry.entry_id + " with " + std::to_string(entry.links.size()) +
                  " links");
        store.entries.push_back(std::move(entry));
    }
    return store;
}

std::vector<double> cosine_scan_serial(const EmbeddingVector& query,
                                       const std::vector<MemoryEntry>& entries) {
    std::vector<double> scores(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        scores[i] = cosine(query, entries[i].embedding);
    }
    return scores;
}

std::vector<double> cosine_scan(const EmbeddingVector& query,
                                const std::vector<MemoryEntry>& entries) {
    std::vector<double> scores(entries.size());
    const auto n = static_cast<std::int64_t>(entries.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        scores[idx] = cosine(query, entries[idx].embedding);
    }
    return scores;
}

std::vector<MemoryEntry> retrieve(const MemoryStore& store, const std::string& query, int k,
                                  const Embedder& embedder) {
    if (k <= 0 || store.entries.empty()) {
        return {};
    }
    auto query_vec = embedder.embed(query);
    auto scores = cosine_scan(query_vec, store.entries);

    std::vector<std::size_t> order(store.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return store.entries[a].entry_id < store.entries[b].entry_id;
    });
    if (static_cast<int>(order.size()) > k) {
        order.resize(static_cast<std::size_t>(k));
    }

    std::vector<MemoryEntry> result;
    result.reserve(order.size());
    for (auto idx : order) {
        result.push_back(store.entries[idx]);
    }
    return result;
}

std::string render_context(const std::vector<MemoryEntry>& entries) {
    std::ostringstream out;
    bool first = true;
    for (const auto& entry : entries) {
        if (!first) {
            out << "\n\n";
        }
        out << '[' << entry.timestamp_label << "] " << entry.summary;
        out << "\nkeywords: ";
        for (std::size_t i = 0; i < entry.keywords.size(); ++i) {
            if (i > 0) {
                out << ", ";
            }
            out << entry.keywords[i];
        }
        first = false;
    }
    return out.str();
}

} // namespace memloop
