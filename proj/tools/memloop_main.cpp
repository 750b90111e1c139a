// memloop: build, adapt, and evaluate conversational memory offline or
// against a remote model. Subcommands: ingest, adapt, eval, demo.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <memory>

#include "memloop/ama_loop.hpp"
#include "memloop/embedding.hpp"
#include "memloop/errors.hpp"
#include "memloop/eval_runner.hpp"
#include "memloop/fixtures.hpp"
#include "memloop/log.hpp"
#include "memloop/persistence.hpp"
#include "memloop/scenario.hpp"

#include "CLI11.hpp"

namespace {

using namespace memloop;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

std::string env_or_empty(const char* name) {
    const char* value = std::getenv(name);
    return value != nullptr ? value : "";
}

std::string now_iso8601() {
    std::time_t now = std::time(nullptr);
    char buffer[32];
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

CorpusFormat parse_format(const std::string& name) {
    if (name == "locomo") {
        return CorpusFormat::locomo;
    }
    if (name == "native") {
        return CorpusFormat::native;
    }
    throw Error("unknown corpus format: " + name);
}

// Owns whichever backend chain the --backend flag selected.
struct BackendBundle {
    std::unique_ptr<ChatBackend> inner;
    std::unique_ptr<ChatBackend> wrapper;

    ChatBackend& active() { return wrapper ? *wrapper : *inner; }
};

BackendBundle make_backend(const std::string& mode, const std::string& replay_path,
                           const std::string& model) {
    BackendBundle bundle;
    if (mode == "scripted-replay") {
        if (replay_path.empty()) {
            throw Error("--replay <file> is required with --backend scripted-replay");
        }
        bundle.inner = std::make_unique<ReplayBackend>(replay_path);
        return bundle;
    }

    RemoteBackendConfig config;
    config.base_url = env_or_empty("MEMLOOP_BASE_URL");
    config.api_key = env_or_empty("MEMLOOP_API_KEY");
    config.model = model;
    if (config.base_url.empty()) {
        throw Error("MEMLOOP_BASE_URL must be set for backend mode " + mode);
    }
    if (config.model.empty()) {
        throw Error("--model is required for backend mode " + mode);
    }

    if (mode == "remote") {
        bundle.inner = std::make_unique<RemoteChatBackend>(config);
        return bundle;
    }
    if (mode == "scripted-record") {
        if (replay_path.empty()) {
            throw Error("--replay <file> is required with --backend scripted-record");
        }
        bundle.inner = std::make_unique<RemoteChatBackend>(config);
        bundle.wrapper = std::make_unique<RecordingBackend>(*bundle.inner, replay_path);
        return bundle;
    }
    throw Error("unknown backend mode: " + mode);
}

struct CommonRunFlags {
    std::string corpus_path;
    std::string format{"native"};
    std::string backend{"scripted-replay"};
    std::string replay_path;
    std::string model;
    std::string config_path;
    int max_in_flight{4};
    int parallel{1};
    unsigned long seed{0};
};

void add_common_flags(CLI::App* cmd, CommonRunFlags& flags) {
    cmd->add_option("--corpus", flags.corpus_path, "Corpus file")->required();
    cmd->add_option("--format", flags.format, "Corpus format (native|locomo)")
        ->check(CLI::IsMember({"native", "locomo"}));
    cmd->add_option("--backend", flags.backend,
                    "Backend mode (scripted-replay|scripted-record|remote)")
        ->check(CLI::IsMember({"scripted-replay", "scripted-record", "remote"}));
    cmd->add_option("--replay", flags.replay_path,
                    "Replay file (read in scripted-replay, written in scripted-record)");
    cmd->add_option("--model", flags.model, "Model name for remote backends");
    cmd->add_option("--config", flags.config_path,
                    "Optional JSON config file (run.json config shape); flags override it");
    cmd->add_option("--max-in-flight", flags.max_in_flight, "Bound on concurrent model calls");
    cmd->add_option("--parallel", flags.parallel, "Concurrent dialogue processing bound");
    cmd->add_option("--seed", flags.seed, "Seed recorded in the run manifest");
}

int cmd_ingest(const std::string& input, const std::string& format, const std::string& output) {
    auto corpus = load_corpus(input, parse_format(format));
    if (!output.empty()) {
        write_native(corpus, output);
    }
    auto counts = corpus.category_counts();
    auto count_of = [&](Category category) {
        auto it = counts.find(category);
        return it == counts.end() ? 0 : it->second;
    };
    std::printf("multi_hop=%d temporal=%d open_domain=%d single_hop=%d\n",
                count_of(Category::multi_hop), count_of(Category::temporal),
                count_of(Category::open_domain), count_of(Category::single_hop));
    if (count_of(Category::other) > 0) {
        std::printf("other=%d\n", count_of(Category::other));
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-adapting conversational memory engine"};
    app.require_subcommand(1);

    // ---- ingest ----
    std::string ingest_input;
    std::string ingest_format{"locomo"};
    std::string ingest_output;
    auto* ingest = app.add_subcommand("ingest", "Convert a corpus file to the native format");
    ingest->add_option("--input", ingest_input, "Source corpus file")->required();
    ingest->add_option("--format", ingest_format, "Source format (locomo|native)")
        ->check(CLI::IsMember({"locomo", "native"}));
    ingest->add_option("--output", ingest_output, "Native corpus output path");

    // ---- adapt ----
    CommonRunFlags adapt_flags;
    std::string adapt_run_dir;
    AmaConfig ama_config;
    StoreConfig store_config;
    bool no_content_update = false;
    bool no_strategy_update = false;
    bool unguided_questions = false;
    auto* adapt_cmd = app.add_subcommand(
        "adapt", "Construct memory and run the adversarial adaptation loop");
    add_common_flags(adapt_cmd, adapt_flags);
    adapt_cmd->add_option("--run-dir", adapt_run_dir, "Output run directory")->required();
    adapt_cmd->add_option("--qa-per-session", ama_config.qa_per_session,
                          "Probe questions per session (k)");
    adapt_cmd->add_option("--retrieval-k", ama_config.retrieval_k, "Memory retrieval depth");
    adapt_cmd->add_option("--max-rounds", ama_config.max_rounds, "Probe/update rounds per session");
    adapt_cmd->add_option("--reconstruction-threshold", ama_config.reconstruction_pass_threshold,
                          "Rebuild session memory when the final pass rate is below this");
    adapt_cmd->add_flag("--no-content-update", no_content_update, "Disable memory content updates");
    adapt_cmd->add_flag("--no-strategy-update", no_strategy_update, "Disable strategy updates");
    adapt_cmd->add_flag("--unguided-questions", unguided_questions,
                        "Use the minimal challenger prompt");
    adapt_cmd->add_flag("--audit-gold", ama_config.audit_gold,
                        "Log challenger gold answers with low session overlap");
    adapt_cmd->add_option("--dup-threshold", store_config.dup_threshold,
                          "Duplicate suppression cosine threshold");
    adapt_cmd->add_option("--link-threshold", store_config.link_threshold,
                          "Link creation cosine threshold");

    // ---- eval ----
    CommonRunFlags eval_flags;
    std::string eval_run_dir;
    std::string eval_out_dir;
    bool eval_judge = false;
    int eval_retrieval_k = 10;
    auto* eval_cmd =
        app.add_subcommand("eval", "Answer benchmark questions from a run's stores and score them");
    add_common_flags(eval_cmd, eval_flags);
    eval_cmd->add_option("--run-dir", eval_run_dir, "Run directory to evaluate")->required();
    eval_cmd->add_option("--out", eval_out_dir, "Report output directory (default: run dir)");
    eval_cmd->add_option("--retrieval-k", eval_retrieval_k, "Memory retrieval depth");
    eval_cmd->add_flag("--judge", eval_judge, "Also score rows with the LLM judge");

    // ---- demo ----
    std::string demo_corpus_path{"fixtures/demo.corpus.json"};
    std::string demo_replay_path{"fixtures/demo.replay.jsonl"};
    auto* demo_cmd =
        app.add_subcommand("demo", "Run the bundled case-study scenario on its replay file");
    demo_cmd->add_option("--corpus", demo_corpus_path, "Demo corpus file");
    demo_cmd->add_option("--replay", demo_replay_path, "Demo replay file");

    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Verbose logging");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (verbose) {
        set_log_level(LogLevel::info);
    }

    try {
        if (*ingest) {
            return cmd_ingest(ingest_input, ingest_format, ingest_output);
        }

        auto prompts = PromptSet::defaults();

        if (*adapt_cmd) {
            ConfigSnapshot snapshot;
            if (!adapt_flags.config_path.empty()) {
                snapshot = config_from_json_file(adapt_flags.config_path);
                // Flags set explicitly override the file.
                if (adapt_cmd->count("--qa-per-session") == 0)
                    ama_config.qa_per_session = snapshot.ama.qa_per_session;
                if (adapt_cmd->count("--retrieval-k") == 0)
                    ama_config.retrieval_k = snapshot.ama.retrieval_k;
                if (adapt_cmd->count("--max-rounds") == 0)
                    ama_config.max_rounds = snapshot.ama.max_rounds;
                if (adapt_cmd->count("--reconstruction-threshold") == 0)
                    ama_config.reconstruction_pass_threshold =
                        snapshot.ama.reconstruction_pass_threshold;
                if (adapt_cmd->count("--dup-threshold") == 0)
                    store_config.dup_threshold = snapshot.store.dup_threshold;
                if (adapt_cmd->count("--link-threshold") == 0)
                    store_config.link_threshold = snapshot.store.link_threshold;
                if (!snapshot.ama.guided_questions) unguided_questions = true;
                if (!snapshot.ama.enable_content_update) no_content_update = true;
                if (!snapshot.ama.enable_strategy_update) no_strategy_update = true;
            }
            ama_config.enable_content_update = !no_content_update;
            ama_config.enable_strategy_update = !no_strategy_update;
            ama_config.guided_questions = !unguided_questions;

            auto corpus = load_corpus(adapt_flags.corpus_path, parse_format(adapt_flags.format));
            auto bundle = make_backend(adapt_flags.backend, adapt_flags.replay_path,
                                       adapt_flags.model);
            LlmGateway gateway(bundle.active(), adapt_flags.max_in_flight);
            LocalEmbedder embedder;

            auto artifacts =
                run_corpus(corpus, ama_config, store_config, prompts.summarizer_base, gateway,
                           embedder, prompts, adapt_flags.parallel);
            artifacts.corpus_digest = file_digest(adapt_flags.corpus_path);

            snapshot.ama = ama_config;
            snapshot.store = store_config;
            snapshot.backend_mode = adapt_flags.backend;
            snapshot.model = adapt_flags.model;
            snapshot.prompts_version = prompts.version;
            snapshot.base_instruction = prompts.summarizer_base;
            snapshot.seed = adapt_flags.seed;

            bool scripted = adapt_flags.backend != "remote";
            std::string started = scripted ? "" : now_iso8601();
            save_state(adapt_run_dir, artifacts, snapshot, started,
                       scripted ? "" : now_iso8601());

            int failed = 0;
            std::printf("dialogue              pre      post\n");
            for (const auto& dialogue : artifacts.dialogues) {
                if (dialogue.error.has_value()) {
                    ++failed;
                    std::printf("%-20s FAILED: %s\n", dialogue.dialogue_id.c_str(),
                                dialogue.error->c_str());
                    continue;
                }
                auto point = evolution_point(dialogue);
                auto fmt = [](const std::optional<double>& value) {
                    char buffer[16];
                    if (value.has_value()) {
                        std::snprintf(buffer, sizeof(buffer), "%.4f", *value);
                    } else {
                        std::snprintf(buffer, sizeof(buffer), "%s", "n/a");
                    }
                    return std::string(buffer);
                };
                std::printf("%-20s %-8s %-8s\n", dialogue.dialogue_id.c_str(),
                            fmt(point.pre).c_str(), fmt(point.post).c_str());
            }
            if (!artifacts.dialogues.empty() &&
                failed == static_cast<int>(artifacts.dialogues.size())) {
                return kExitPartial;
            }
            return kExitOk;
        }

        if (*eval_cmd) {
            if (!std::filesystem::exists(std::filesystem::path(eval_run_dir) / "run.json")) {
                std::fprintf(stderr, "not a run directory (missing run.json): %s\n",
                             eval_run_dir.c_str());
                return kExitUsage;
            }
            auto corpus = load_corpus(eval_flags.corpus_path, parse_format(eval_flags.format));
            auto [artifacts, manifest] = load_state(eval_run_dir);
            (void)manifest;
            auto bundle = make_backend(eval_flags.backend, eval_flags.replay_path,
                                       eval_flags.model);
            LlmGateway gateway(bundle.active(), eval_flags.max_in_flight);
            LocalEmbedder embedder;

            EvalOptions options;
            options.retrieval_k = eval_retrieval_k;
            options.judge = eval_judge;
            auto outcome = evaluate_corpus(artifacts, corpus, options, gateway, embedder, prompts);
            write_report_files(eval_out_dir.empty() ? eval_run_dir : eval_out_dir, outcome);
            std::fputs(render_report_table(outcome.report).c_str(), stdout);
            return kExitOk;
        }

        if (*demo_cmd) {
            auto corpus = load_corpus(demo_corpus_path, CorpusFormat::native);
            ReplayBackend backend(demo_replay_path);
            LlmGateway gateway(backend);
            LocalEmbedder embedder;

            auto artifacts = run_corpus(corpus, fixtures::demo_config(), StoreConfig{},
                                        prompts.summarizer_base, gateway, embedder, prompts, 1);
            std::printf("== Jon/Gina case study ==\n");
            for (const auto& dialogue : artifacts.dialogues) {
                if (dialogue.error.has_value()) {
                    std::fprintf(stderr, "demo failed: %s\n", dialogue.error->c_str());
                    return kExitPartial;
                }
                for (const auto& session : dialogue.sessions) {
                    for (const auto& round : session.rounds) {
                        std::printf("Round %d:\n", round.round_index);
                        int qa_index = 1;
                        int correct = 0;
                        for (const auto& record : round.records) {
                            std::printf("  QA%d [%s] Q: %s\n", qa_index,
                                        record.verdict.correct ? "ok" : "x",
                                        record.qa.question.c_str());
                            std::printf("        gold: %s\n", record.qa.gold_answer.c_str());
                            std::printf("        predicted: %s\n",
                                        record.verdict.predicted_answer.c_str());
                            if (record.verdict.correct) {
                                ++correct;
                            }
                            ++qa_index;
                        }
                        std::printf("  pass rate: %d/%d\n", correct,
                                    static_cast<int>(round.records.size()));
                        for (const auto& supplement : round.supplements_applied) {
                            std::printf("Memory supplement: %s\n", supplement.c_str());
                        }
                        if (!round.amendment_applied.empty()) {
                            std::printf("Strategy amendment: %s\n",
                                        round.amendment_applied.c_str());
                        }
                    }
                }
            }
            return kExitOk;
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitPartial;
    }
    return kExitUsage;
}
