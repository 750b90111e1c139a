#include "memloop/eval_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "memloop/errors.hpp"
#include "memloop/llm_gateway.hpp"
#include "memloop/log.hpp"
#include "memloop/prompts.hpp"

namespace memloop {

const char* to_string(Category category) {
    switch (category) {
    case Category::multi_hop: return "multi_hop";
    case Category::temporal: return "temporal";
    case Category::open_domain: return "open_domain";
    case Category::single_hop: return "single_hop";
    default: return "other";
    }
}

Category category_from_string(const std::string& name, bool* known) {
    if (known != nullptr) {
        *known = true;
    }
    if (name == "multi_hop") return Category::multi_hop;
    if (name == "temporal") return Category::temporal;
    if (name == "open_domain") return Category::open_domain;
    if (name == "single_hop") return Category::single_hop;
    if (name == "other") return Category::other;
    if (known != nullptr) {
        *known = false;
    }
    return Category::other;
}

std::vector<std::string> normalize_text(const std::string& text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char ch : text) {
        if (std::ispunct(ch)) {
            continue;
        }
        cleaned.push_back(static_cast<char>(std::tolower(ch)));
    }

    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && current != "a" && current != "an" && current != "the") {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (unsigned char ch : cleaned) {
        if (std::isspace(ch)) {
            flush();
        } else {
            current.push_back(static_cast<char>(ch));
        }
    }
    flush();
    return tokens;
}

namespace {

std::unordered_map<std::string, int> token_counts(const std::vector<std::string>& tokens) {
    std::unordered_map<std::string, int> counts;
    for (const auto& token : tokens) {
        ++counts[token];
    }
    return counts;
}

int multiset_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    auto counts = token_counts(b);
    int overlap = 0;
    for (const auto& token : a) {
        auto it = counts.find(token);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    return overlap;
}

// Exact permutation invariance: sum in sorted order.
double stable_mean(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    double sum = std::accumulate(values.begin(), values.end(), 0.0);
    return sum / static_cast<double>(values.size());
}

} // namespace

double f1_score(const std::string& predicted, const std::string& gold) {
    auto pred_tokens = normalize_text(predicted);
    auto gold_tokens = normalize_text(gold);
    if (pred_tokens.empty() && gold_tokens.empty()) {
        return 1.0;
    }
    if (pred_tokens.empty() || gold_tokens.empty()) {
        return 0.0;
    }
    int overlap = multiset_overlap(pred_tokens, gold_tokens);
    if (overlap == 0) {
        return 0.0;
    }
    // 2PR/(P+R) reduces to 2*overlap/(|pred|+|gold|), symmetric by construction.
    return 2.0 * overlap / static_cast<double>(pred_tokens.size() + gold_tokens.size());
}

double bleu1(const std::string& predicted, const std::string& gold) {
    auto pred_tokens = normalize_text(predicted);
    auto gold_tokens = normalize_text(gold);
    if (pred_tokens.empty()) {
        return 0.0;
    }
    int clipped = multiset_overlap(pred_tokens, gold_tokens);
    if (clipped == 0) {
        return 0.0;
    }
    double precision = static_cast<double>(clipped) / static_cast<double>(pred_tokens.size());
    double brevity = 1.0;
    if (pred_tokens.size() < gold_tokens.size()) {
        brevity = std::exp(1.0 - static_cast<double>(gold_tokens.size()) /
                                     static_cast<double>(pred_tokens.size()));
    }
    return precision * brevity;
}

double pass_rate(const std::vector<Verdict>& verdicts) {
    if (verdicts.empty()) {
        throw Error("pass_rate: empty verdict list");
    }
    int correct = 0;
    for (const auto& verdict : verdicts) {
        if (verdict.correct) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

std::vector<std::array<double, 2>> score_rows_serial(const std::vector<MetricRow>& rows) {
    std::vector<std::array<double, 2>> scores(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        scores[i] = {f1_score(rows[i].predicted, rows[i].gold),
                     bleu1(rows[i].predicted, rows[i].gold)};
    }
    return scores;
}

std::vector<std::array<double, 2>> score_rows(const std::vector<MetricRow>& rows) {
    std::vector<std::array<double, 2>> scores(rows.size());
    const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        scores[idx] = {f1_score(rows[idx].predicted, rows[idx].gold),
                       bleu1(rows[idx].predicted, rows[idx].gold)};
    }
    return scores;
}

MetricReport build_report(const std::vector<MetricRow>& rows,
                          const std::vector<Verdict>* verdicts) {
    MetricReport report;
    auto scores = score_rows(rows);

    struct Bucket {
        std::vector<double> f1;
        std::vector<double> bleu;
        std::vector<double> judge;
    };
    std::map<Category, Bucket> buckets;
    Bucket all;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& bucket = buckets[rows[i].category];
        bucket.f1.push_back(scores[i][0]);
        bucket.bleu.push_back(scores[i][1]);
        all.f1.push_back(scores[i][0]);
        all.bleu.push_back(scores[i][1]);
        if (rows[i].judge.has_value()) {
            bucket.judge.push_back(static_cast<double>(*rows[i].judge));
            all.judge.push_back(static_cast<double>(*rows[i].judge));
        }
    }

    auto stats_of = [](const Bucket& bucket) {
        MetricStats stats;
        stats.count = static_cast<int>(bucket.f1.size());
        stats.f1_mean = stable_mean(bucket.f1);
        stats.bleu1_mean = stable_mean(bucket.bleu);
        stats.judge_count = static_cast<int>(bucket.judge.size());
        if (!bucket.judge.empty()) {
            stats.judge_mean = stable_mean(bucket.judge);
        }
        return stats;
    };

    for (const auto& [category, bucket] : buckets) {
        if (!bucket.f1.empty()) {
            report.per_category[category] = stats_of(bucket);
        }
    }
    report.overall = stats_of(all);

    // Macro: mean of per-category means.
    Bucket macro;
    std::vector<double> macro_judge;
    for (const auto& [category, stats] : report.per_category) {
        (void)category;
        macro.f1.push_back(stats.f1_mean);
        macro.bleu.push_back(stats.bleu1_mean);
        if (stats.judge_mean.has_value()) {
            macro_judge.push_back(*stats.judge_mean);
        }
    }
    report.overall_macro.count = static_cast<int>(report.per_category.size());
    report.overall_macro.f1_mean = stable_mean(macro.f1);
    report.overall_macro.bleu1_mean = stable_mean(macro.bleu);
    report.overall_macro.judge_count = static_cast<int>(macro_judge.size());
    if (!macro_judge.empty()) {
        report.overall_macro.judge_mean = stable_mean(macro_judge);
    }

    if (verdicts != nullptr && !verdicts->empty()) {
        report.pass_rate_value = pass_rate(*verdicts);
    }
    return report;
}

std::string render_report_table(const MetricReport& report) {
    static const Category kOrder[] = {Category::multi_hop, Category::temporal,
                                      Category::open_domain, Category::single_hop,
                                      Category::other};
    static const char* kLabels[] = {"Multi-Hop", "Temporal", "Open-Domain", "Single-Hop",
                                    "Other"};

    std::vector<std::pair<std::string, const MetricStats*>> columns;
    for (std::size_t i = 0; i < 5; ++i) {
        auto it = report.per_category.find(kOrder[i]);
        if (it != report.per_category.end()) {
            columns.emplace_back(kLabels[i], &it->second);
        }
    }
    columns.emplace_back("Average", &report.overall);

    bool any_judge = report.overall.judge_mean.has_value();

    std::ostringstream out;
    char buffer[64];
    auto cell = [&](const std::string& text) {
        std::snprintf(buffer, sizeof(buffer), "%12s", text.c_str());
        out << buffer;
    };
    auto num_cell = [&](double value) {
        std::snprintf(buffer, sizeof(buffer), "%12.4f", value);
        out << buffer;
    };

    cell("Metric");
    for (const auto& [label, stats] : columns) {
        (void)stats;
        cell(label);
    }
    out << '\n';

    cell("F1");
    for (const auto& [label, stats] : columns) {
        (void)label;
        num_cell(stats->f1_mean);
    }
    out << '\n';

    cell("BLEU-1");
    for (const auto& [label, stats] : columns) {
        (void)label;
        num_cell(stats->bleu1_mean);
    }
    out << '\n';

    if (any_judge) {
        cell("Judge");
        for (const auto& [label, stats] : columns) {
            (void)label;
            if (stats->judge_mean.has_value()) {
                num_cell(*stats->judge_mean);
            } else {
                cell("-");
            }
        }
        out << '\n';
    }

    cell("Count");
    for (const auto& [label, stats] : columns) {
        (void)label;
        std::snprintf(buffer, sizeof(buffer), "%12d", stats->count);
        out << buffer;
    }
    out << '\n';

    std::snprintf(buffer, sizeof(buffer), "%.4f", report.overall_macro.f1_mean);
    out << "Average (macro): F1=" << buffer;
    std::snprintf(buffer, sizeof(buffer), "%.4f", report.overall_macro.bleu1_mean);
    out << " BLEU-1=" << buffer << '\n';
    if (report.pass_rate_value.has_value()) {
        std::snprintf(buffer, sizeof(buffer), "%.4f", *report.pass_rate_value);
        out << "Pass rate: " << buffer << '\n';
    }
    return out.str();
}

int llm_judge(const std::string& question, const std::string& gold,
              const std::string& predicted, LlmGateway& gateway, const PromptSet& prompts) {
    auto response = gateway.chat(make_llm_judge_request(prompts, question, gold, predicted));
    std::string trimmed = response.text;
    auto first = trimmed.find_first_not_of(" \t\r\n");
    auto last = trimmed.find_last_not_of(" \t\r\n");
    if (first == std::string::npos) {
        throw Error("llm_judge: empty response");
    }
    trimmed = trimmed.substr(first, last - first + 1);
    if (trimmed == "0") {
        return 0;
    }
    if (trimmed == "1") {
        return 1;
    }
    throw Error("llm_judge: unparseable verdict '" + trimmed + "'");
}

} // namespace memloop
