#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memloop/ama_loop.hpp"
#include "memloop/eval_metrics.hpp"

namespace memloop {

struct EvalOptions {
    int retrieval_k{10};
    bool judge{false};
};

struct EvalOutcome {
    MetricReport report;
    std::vector<MetricRow> rows;
    int judge_misses{0}; // rows whose judge call failed (score left absent)
};

// Answers every benchmark question from the persisted per-dialogue stores and
// scores the answers. Dialogues without questions are skipped; per-row judge
// failures leave that row's judge score absent.
EvalOutcome evaluate_corpus(const RunArtifacts& artifacts, const Corpus& corpus,
                            const EvalOptions& options, LlmGateway& gateway,
                            const Embedder& embedder, const PromptSet& prompts);

// Writes report.json and report.txt with canonical formatting.
void write_report_files(const std::filesystem::path& dir, const EvalOutcome& outcome);

std::string report_to_json_text(const MetricReport& report);

} // namespace memloop
