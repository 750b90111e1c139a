#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "memloop/dialogue.hpp"
#include "memloop/memory_store.hpp"
#include "memloop/qa_types.hpp"

namespace memloop {

// Dual-level update produced by the adapter: factual supplements for the
// memory content plus an optional strategy amendment.
struct AdaptationResult {
    std::vector<std::string> memory_supplements; // non-empty strings
    std::string strategy_amendment;              // empty == no strategy change
};

struct AmaConfig {
    int qa_per_session{3};  // k
    int retrieval_k{10};
    bool guided_questions{true};
    bool enable_content_update{true};
    bool enable_strategy_update{true};
    int max_rounds{1};
    double reconstruction_pass_threshold{0.0}; // 0.0 disables reconstruction
    bool audit_gold{false};

    bool operator==(const AmaConfig&) const = default;
};

struct QaRecord {
    QAPair qa;
    Verdict verdict;

    bool operator==(const QaRecord&) const = default;
};

struct RoundReport {
    int round_index{1};
    std::vector<QaRecord> records;
    std::optional<double> pass_rate_value; // absent when the round had no QA
    std::vector<std::string> supplements_applied;
    std::string amendment_applied;

    bool operator==(const RoundReport&) const = default;
};

struct SessionReport {
    int session_index{0};
    std::vector<RoundReport> rounds;
    bool reconstructed{false};

    bool operator==(const SessionReport&) const = default;
};

struct DialogueArtifacts {
    std::string dialogue_id;
    MemoryStore store;
    ExtractionStrategy strategy;
    std::vector<SessionReport> sessions;
    std::optional<std::string> error; // set when this dialogue failed

    bool operator==(const DialogueArtifacts&) const = default;
};

struct RunArtifacts {
    std::vector<DialogueArtifacts> dialogues;
    std::string corpus_digest;

    bool operator==(const RunArtifacts&) const = default;
};

// Challenger: k probe QA pairs for one session. k == 0 short-circuits without
// a gateway call; a response with more parseable pairs than k is truncated in
// response order. Zero parseable pairs raises an error (the session loop
// catches it and continues with an empty QA set).
std::vector<QAPair> generate_qa(const std::string& dialogue_id, const Session& session, int k,
                                bool guided, LlmGateway& gateway, const PromptSet& prompts);

// Evaluator answering: renders the retrieval context and asks the model.
std::string answer_with_memory(const MemoryStore& store, const std::string& question,
                               int retrieval_k, LlmGateway& gateway, const Embedder& embedder,
                               const PromptSet& prompts);

// Evaluator judging: parses a leading CORRECT/INCORRECT token. An
// unparseable verdict falls back to token-F1(predicted, gold) >= 0.6, with a
// logged "auto-fallback" defect.
Verdict judge_answer(const std::string& question, const std::string& predicted,
                     const std::string& gold, LlmGateway& gateway, const PromptSet& prompts);

// Adapter: one content call (when enabled) for the factual supplements, one
// strategy call (when enabled) for the amendment. Requires failures.
AdaptationResult adapt(const ErrorRecord& errors, const ExtractionStrategy& strategy,
                       const AmaConfig& config, LlmGateway& gateway, const PromptSet& prompts);

// Appends supplements as adapter_supplement entries (timestamped from the
// session, frequency keywords) through update_store, so dedup and linking
// apply.
MemoryStore apply_memory_update(MemoryStore store, const std::vector<std::string>& supplements,
                                const Session& session, const Embedder& embedder);

// One session of the adversarial loop: per round, generate probes, answer
// from memory, judge, and on failures run the adapter and apply both update
// levels. Exits early when a round passes fully. After the final round a
// pass rate below reconstruction_pass_threshold rebuilds this session's
// constructed entries with the updated strategy, keeping supplements.
std::tuple<MemoryStore, ExtractionStrategy, SessionReport> run_session(
    const std::string& dialogue_id, const Session& session, MemoryStore store,
    ExtractionStrategy strategy, const AmaConfig& config, LlmGateway& gateway,
    const Embedder& embedder, const PromptSet& prompts);

// Outer driver: fresh store and strategy per dialogue, sessions processed in
// order (construct -> update_store -> run_session). Dialogues are independent
// and processed in parallel when parallelism > 1; results are identical
// regardless of scheduling.
RunArtifacts run_corpus(const Corpus& corpus, const AmaConfig& config,
                        const StoreConfig& store_config, const std::string& base_instruction,
                        LlmGateway& gateway, const Embedder& embedder, const PromptSet& prompts,
                        int parallelism = 1);

// Pre/post pass rates for the evolution view: mean first-round and mean
// final-round pass rate over the dialogue's sessions that had probes.
struct EvolutionPoint {
    std::string dialogue_id;
    std::optional<double> pre;
    std::optional<double> post;
};
EvolutionPoint evolution_point(const DialogueArtifacts& artifacts);

} // namespace memloop
