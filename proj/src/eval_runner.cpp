#include "memloop/eval_runner.hpp"

#include <fstream>

#include "memloop/errors.hpp"
#include "memloop/log.hpp"
#include "memloop/numeric.hpp"

#include "json.hpp"

namespace memloop {

using nlohmann::json;

EvalOutcome evaluate_corpus(const RunArtifacts& artifacts, const Corpus& corpus,
                            const EvalOptions& options, LlmGateway& gateway,
                            const Embedder& embedder, const PromptSet& prompts) {
    EvalOutcome outcome;

    for (const auto& dialogue : artifacts.dialogues) {
        auto it = corpus.questions.find(dialogue.dialogue_id);
        if (it == corpus.questions.end()) {
            continue;
        }
        if (dialogue.error.has_value()) {
            log_warn("skipping questions for failed dialogue " + dialogue.dialogue_id);
            continue;
        }
        for (const auto& question : it->second) {
            MetricRow row;
            row.category = question.category;
            row.gold = question.gold_answer;
            row.predicted = answer_with_memory(dialogue.store, question.question,
                                               options.retrieval_k, gateway, embedder, prompts);
            if (options.judge) {
                try {
                    row.judge = llm_judge(question.question, question.gold_answer, row.predicted,
                                          gateway, prompts);
                } catch (const Error& e) {
                    ++outcome.judge_misses;
                    log_warn("judge score absent for question '" + question.question +
                             "': " + e.what());
                }
            }
            outcome.rows.push_back(std::move(row));
        }
    }

    if (options.judge && outcome.judge_misses > 0 &&
        outcome.judge_misses == static_cast<int>(outcome.rows.size())) {
        log_warn("no judge scores available; judge column omitted from the report");
    }

    outcome.report = build_report(outcome.rows);
    return outcome;
}

namespace {

json stats_to_json(const MetricStats& stats) {
    json object = {{"f1_mean", round_sig(stats.f1_mean)},
                   {"bleu1_mean", round_sig(stats.bleu1_mean)},
                   {"count", stats.count}};
    if (stats.judge_mean.has_value()) {
        object["judge_mean"] = round_sig(*stats.judge_mean);
        object["judge_count"] = stats.judge_count;
    }
    return object;
}

} // namespace

std::string report_to_json_text(const MetricReport& report) {
    json per_category = json::object();
    for (const auto& [category, stats] : report.per_category) {
        per_category[to_string(category)] = stats_to_json(stats);
    }
    json document = {{"version", "1.0"},
                     {"per_category", per_category},
                     {"overall", stats_to_json(report.overall)},
                     {"overall_macro", stats_to_json(report.overall_macro)}};
    if (report.pass_rate_value.has_value()) {
        document["pass_rate"] = round_sig(*report.pass_rate_value);
    }
    return document.dump(2) + "\n";
}

void write_report_files(const std::filesystem::path& dir, const EvalOutcome& outcome) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::filesystem::path& path, const std::string& contents) {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw IoError("cannot write report file: " + path.string());
        }
        out << contents;
    };
    write(dir / "report.json", report_to_json_text(outcome.report));
    write(dir / "report.txt", render_report_table(outcome.report));
}

} // namespace memloop
