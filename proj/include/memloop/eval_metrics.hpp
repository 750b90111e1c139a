#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memloop/qa_types.hpp"

namespace memloop {

class LlmGateway;
struct PromptSet;

// QA-style normalization: lowercase, strip punctuation, drop the articles
// {a, an, the}, collapse whitespace, split on spaces. Scores computed here are
// comparable only within this artifact.
std::vector<std::string> normalize_text(const std::string& text);

// Token-level F1 over normalized token multisets.
// Both sides empty -> 1.0; exactly one side empty -> 0.0.
double f1_score(const std::string& predicted, const std::string& gold);

// Sentence BLEU-1: clipped unigram precision times brevity penalty,
// no smoothing (zero overlap scores 0). Empty prediction scores 0.
double bleu1(const std::string& predicted, const std::string& gold);

// Fraction of verdicts with correct == true. Throws on an empty list.
double pass_rate(const std::vector<Verdict>& verdicts);

struct MetricRow {
    Category category{Category::other};
    std::string gold;
    std::string predicted;
    std::optional<int> judge; // 0/1 when the LLM judge scored this row
};

struct MetricStats {
    double f1_mean{0.0};
    double bleu1_mean{0.0};
    std::optional<double> judge_mean;
    int judge_count{0};
    int count{0};
};

struct MetricReport {
    std::map<Category, MetricStats> per_category;
    MetricStats overall;        // micro average (per question) — the headline
    MetricStats overall_macro;  // macro average over non-empty categories
    std::optional<double> pass_rate_value;
};

// Per-row (f1, bleu1) scoring. `score_rows` is the OpenMP kernel used by
// build_report; `score_rows_serial` is the serial reference kept for tests
// and the benchmark.
std::vector<std::array<double, 2>> score_rows(const std::vector<MetricRow>& rows);
std::vector<std::array<double, 2>> score_rows_serial(const std::vector<MetricRow>& rows);

MetricReport build_report(const std::vector<MetricRow>& rows,
                          const std::vector<Verdict>* verdicts = nullptr);

// Fixed-width text table mirroring the benchmark's column order:
// Multi-Hop, Temporal, Open-Domain, Single-Hop, Average.
std::string render_report_table(const MetricReport& report);

// Binary semantic-consistency score from the generative judge. Parse or
// gateway failures propagate — this metric is reported, never silently faked.
int llm_judge(const std::string& question, const std::string& gold,
              const std::string& predicted, LlmGateway& gateway, const PromptSet& prompts);

} // namespace memloop
