#include "memloop/ama_loop.hpp"

#include <algorithm>
#include <sstream>

#include "memloop/errors.hpp"
#include "memloop/eval_metrics.hpp"
#include "memloop/log.hpp"
#include "memloop/numeric.hpp"

namespace memloop {

namespace {

std::string trim(const std::string& text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::string lower(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

// Max token-F1 of the gold answer against sliding windows of the session
// text, used by the optional gold-answer audit.
double best_window_f1(const std::string& gold, const Session& session) {
    auto session_tokens = normalize_text(session_text(session));
    auto gold_tokens = normalize_text(gold);
    if (gold_tokens.empty() || session_tokens.empty()) {
        return 0.0;
    }
    std::size_t window = gold_tokens.size();
    double best = 0.0;
    for (std::size_t start = 0; start + window <= session_tokens.size(); ++start) {
        std::ostringstream candidate;
        for (std::size_t i = 0; i < window; ++i) {
            if (i > 0) {
                candidate << ' ';
            }
            candidate << session_tokens[start + i];
        }
        std::ostringstream gold_joined;
        for (std::size_t i = 0; i < gold_tokens.size(); ++i) {
            if (i > 0) {
                gold_joined << ' ';
            }
            gold_joined << gold_tokens[i];
        }
        best = std::max(best, f1_score(candidate.str(), gold_joined.str()));
    }
    return best;
}

} // namespace

std::vector<QAPair> generate_qa(const std::string& dialogue_id, const Session& session, int k,
                                bool guided, LlmGateway& gateway, const PromptSet& prompts) {
    if (k <= 0) {
        return {};
    }

    auto response = gateway.chat(make_challenger_request(prompts, guided, session_text(session)));

    std::vector<QAPair> pairs;
    std::istringstream lines(response.text);
    std::string line;
    std::string pending_question;
    while (std::getline(lines, line)) {
        std::string trimmed = trim(line);
        if (trimmed.rfind("Q:", 0) == 0) {
            pending_question = trim(trimmed.substr(2));
        } else if (trimmed.rfind("A:", 0) == 0 && !pending_question.empty()) {
            std::string answer = trim(trimmed.substr(2));
            if (!answer.empty()) {
                QAPair pair;
                pair.question = pending_question;
                pair.gold_answer = answer;
                pair.dialogue_id = dialogue_id;
                pair.session_index = session.session_index;
                pairs.push_back(std::move(pair));
            }
            pending_question.clear();
        }
    }

    if (pairs.empty()) {
        throw Error("challenger produced no parseable QA pairs for session " +
                    std::to_string(session.session_index) + " of " + dialogue_id);
    }
    if (static_cast<int>(pairs.size()) > k) {
        pairs.resize(static_cast<std::size_t>(k));
    } else if (static_cast<int>(pairs.size()) < k) {
        log_warn("challenger returned " + std::to_string(pairs.size()) + " of " +
                 std::to_string(k) + " requested QA pairs for session " +
                 std::to_string(session.session_index) + " of " + dialogue_id);
    }
    return pairs;
}

std::string answer_with_memory(const MemoryStore& store, const std::string& question,
                               int retrieval_k, LlmGateway& gateway, const Embedder& embedder,
                               const PromptSet& prompts) {
    auto context = render_context(retrieve(store, question, retrieval_k, embedder));
    auto response = gateway.chat(make_answer_request(prompts, context, question));
    return trim(response.text);
}

Verdict judge_answer(const std::string& question, const std::string& predicted,
                     const std::string& gold, LlmGateway& gateway, const PromptSet& prompts) {
    Verdict verdict;
    verdict.predicted_answer = predicted;

    std::string text;
    try {
        text = trim(gateway.chat(make_judge_request(prompts, question, gold, predicted)).text);
    } catch (const GatewayError&) {
        throw; // caller decides; run_session converts to a gateway-error verdict
    }

    std::string head = lower(text.substr(0, text.find_first_of(" \t\r\n")));
    if (head == "correct") {
        verdict.correct = true;
        verdict.defect.clear();
        return verdict;
    }
    if (head == "incorrect") {
        verdict.correct = false;
        auto rest = trim(text.substr(9));
        while (!rest.empty() && (rest.front() == ':' || rest.front() == '-' ||
                                 rest.front() == '|' || std::isspace(static_cast<unsigned char>(rest.front())))) {
            rest.erase(rest.begin());
        }
        verdict.defect = rest.empty() ? "unspecified defect" : rest;
        return verdict;
    }

    // Deterministic fallback for unparseable verdicts.
    log_warn("judge verdict unparseable ('" + text.substr(0, 40) + "...'), using token-F1 fallback");
    verdict.correct = f1_score(predicted, gold) >= 0.6;
    verdict.defect = verdict.correct ? "" : "auto-fallback: low lexical overlap";
    return verdict;
}

AdaptationResult adapt(const ErrorRecord& errors, const ExtractionStrategy& strategy,
                       const AmaConfig& config, LlmGateway& gateway, const PromptSet& prompts) {
    if (errors.failures.empty()) {
        throw Error("adapt: error record has no failures");
    }

    AdaptationResult result;

    if (config.enable_content_update) {
        auto response = gateway.chat(make_adapter_content_request(prompts, errors));
        std::istringstream lines(response.text);
        std::string line;
        while (std::getline(lines, line)) {
            std::string fact = trim(line);
            while (!fact.empty() && (fact.front() == '-' || fact.front() == '*')) {
                fact = trim(fact.substr(1));
            }
            if (!fact.empty()) {
                result.memory_supplements.push_back(fact);
            }
        }
        if (result.memory_supplements.empty()) {
            log_warn("adapter content response was unparseable; no supplements applied");
        } else if (result.memory_supplements.size() > errors.failures.size()) {
            log_warn("adapter produced more supplements than failures; truncating");
            result.memory_supplements.resize(errors.failures.size());
        }
    }

    if (config.enable_strategy_update) {
        auto response = gateway.chat(make_adapter_strategy_request(prompts, strategy, errors));
        std::string amendment = trim(response.text);
        // Multi-line responses collapse to the first non-empty line.
        auto newline = amendment.find('\n');
        if (newline != std::string::npos) {
            amendment = trim(amendment.substr(0, newline));
        }
        if (lower(amendment) == "none") {
            amendment.clear();
        }
        result.strategy_amendment = amendment;
    }

    return result;
}

MemoryStore apply_memory_update(MemoryStore store, const std::vector<std::string>& supplements,
                                const Session& session, const Embedder& embedder) {
    if (supplements.empty()) {
        return store;
    }
    std::vector<MemoryEntry> entries;
    for (const auto& supplement : supplements) {
        if (supplement.empty()) {
            continue;
        }
        MemoryEntry entry;
        entry.summary = supplement;
        entry.keywords = frequency_keywords(supplement);
        entry.timestamp_label = session.date_label;
        entry.source.dialogue_id = store.dialogue_id;
        entry.source.session_index = session.session_index;
        entry.source.adapter_supplement = true;
        entry.provenance = Provenance::adapter_supplement;
        entry.embedding = embedder.embed(entry.summary);
        entries.push_back(std::move(entry));
    }
    return update_store(std::move(store), std::move(entries));
}

namespace {

// Removes this session's constructed entries (keeping supplements) and prunes
// links that would dangle. Used by the reconstruction branch only.
MemoryStore drop_session_constructed(MemoryStore store, int session_index) {
    std::vector<MemoryEntry> kept;
    kept.reserve(store.entries.size());
    for (auto& entry : store.entries) {
        if (entry.provenance == Provenance::constructed &&
            entry.source.session_index == session_index) {
            continue;
        }
        kept.push_back(std::move(entry));
    }
    store.entries = std::move(kept);

    std::vector<std::string> live_ids;
    for (const auto& entry : store.entries) {
        live_ids.push_back(entry.entry_id);
    }
    for (auto& entry : store.entries) {
        std::vector<std::string> links;
        for (const auto& link : entry.links) {
            if (std::find(live_ids.begin(), live_ids.end(), link) != live_ids.end()) {
                links.push_back(link);
            }
        }
        entry.links = std::move(links);
    }
    return store;
}

} // namespace

std::tuple<MemoryStore, ExtractionStrategy, SessionReport> run_session(
    const std::string& dialogue_id, const Session& session, MemoryStore store,
    ExtractionStrategy strategy, const AmaConfig& config, LlmGateway& gateway,
    const Embedder& embedder, const PromptSet& prompts) {
    SessionReport report;
    report.session_index = session.session_index;

    for (int round = 1; round <= std::max(1, config.max_rounds); ++round) {
        RoundReport round_report;
        round_report.round_index = round;

        // (1) challenger probes — Algorithm step 1
        std::vector<QAPair> probes;
        if (config.qa_per_session > 0) {
            try {
                probes = generate_qa(dialogue_id, session, config.qa_per_session,
                                     config.guided_questions, gateway, prompts);
            } catch (const Error& e) {
                log_warn(std::string("challenger failed: ") + e.what());
            }
        }
        if (probes.empty()) {
            report.rounds.push_back(std::move(round_report));
            break;
        }

        if (config.audit_gold) {
            for (const auto& probe : probes) {
                double overlap = best_window_f1(probe.gold_answer, session);
                if (overlap < 0.2) {
                    log_warn("gold-answer audit: low session overlap (" +
                             std::to_string(overlap) + ") for gold '" + probe.gold_answer + "'");
                }
            }
        }

        // (2)+(3) answer from memory and judge — Algorithm steps 2 and 3
        ErrorRecord errors;
        errors.dialogue_id = dialogue_id;
        errors.session_index = session.session_index;
        std::vector<Verdict> verdicts;
        for (const auto& probe : probes) {
            QaRecord record;
            record.qa = probe;
            try {
                auto predicted = answer_with_memory(store, probe.question, config.retrieval_k,
                                                    gateway, embedder, prompts);
                record.verdict =
                    judge_answer(probe.question, predicted, probe.gold_answer, gateway, prompts);
            } catch (const GatewayError& e) {
                log_warn(std::string("gateway failure while probing: ") + e.what());
                record.verdict.predicted_answer.clear();
                record.verdict.correct = false;
                record.verdict.defect = "gateway-error";
            }
            verdicts.push_back(record.verdict);
            if (!record.verdict.correct) {
                errors.failures.push_back({record.qa, record.verdict});
            }
            round_report.records.push_back(std::move(record));
        }
        // Rounded at creation so in-memory reports equal persisted ones.
        round_report.pass_rate_value = round_sig(pass_rate(verdicts));

        // (4) adapt and apply the dual-level update — Algorithm steps 4 and 5
        bool all_correct = errors.failures.empty();
        if (!all_correct) {
            auto adaptation = adapt(errors, strategy, config, gateway, prompts);
            strategy = apply_strategy_update(strategy, adaptation.strategy_amendment);
            store = apply_memory_update(std::move(store), adaptation.memory_supplements, session,
                                        embedder);
            round_report.supplements_applied = adaptation.memory_supplements;
            round_report.amendment_applied = adaptation.strategy_amendment;
        }

        report.rounds.push_back(std::move(round_report));
        if (all_correct) {
            break;
        }
    }

    // Reconstruction trigger: pass rate below threshold after the final round.
    if (config.reconstruction_pass_threshold > 0.0 && !report.rounds.empty() &&
        report.rounds.back().pass_rate_value.has_value() &&
        *report.rounds.back().pass_rate_value < config.reconstruction_pass_threshold) {
        log_info("reconstructing session " + std::to_string(session.session_index) + " of " +
                 dialogue_id + " with strategy v" + std::to_string(strategy.version));
        store = drop_session_constructed(std::move(store), session.session_index);
        auto entries = construct_session_memory(dialogue_id, session, strategy, gateway, embedder,
                                                prompts, store.config);
        store = update_store(std::move(store), std::move(entries));
        report.reconstructed = true;
    }

    return {std::move(store), std::move(strategy), std::move(report)};
}

RunArtifacts run_corpus(const Corpus& corpus, const AmaConfig& config,
                        const StoreConfig& store_config, const std::string& base_instruction,
                        LlmGateway& gateway, const Embedder& embedder, const PromptSet& prompts,
                        int parallelism) {
    RunArtifacts artifacts;
    artifacts.dialogues.resize(corpus.dialogues.size());

    const auto n = static_cast<std::int64_t>(corpus.dialogues.size());
    const int threads = std::max(1, parallelism);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& dialogue = corpus.dialogues[static_cast<std::size_t>(i)];
        DialogueArtifacts result;
        result.dialogue_id = dialogue.dialogue_id;
        result.store.dialogue_id = dialogue.dialogue_id;
        result.store.config = store_config;
        result.strategy = ExtractionStrategy::base(base_instruction);
        try {
            for (const auto& session : dialogue.sessions) {
                if (session.turns.empty()) {
                    log_warn("skipping empty session " + std::to_string(session.session_index) +
                             " of " + dialogue.dialogue_id);
                    continue;
                }
                auto entries = construct_session_memory(dialogue.dialogue_id, session,
                                                        result.strategy, gateway, embedder,
                                                        prompts, store_config);
                result.store = update_store(std::move(result.store), std::move(entries));
                SessionReport session_report;
                std::tie(result.store, result.strategy, session_report) =
                    run_session(dialogue.dialogue_id, session, std::move(result.store),
                                std::move(result.strategy), config, gateway, embedder, prompts);
                result.sessions.push_back(std::move(session_report));
            }
        } catch (const std::exception& e) {
            log_error("dialogue " + dialogue.dialogue_id + " failed: " + e.what());
            result.error = e.what();
        }
        artifacts.dialogues[static_cast<std::size_t>(i)] = std::move(result);
    }
    return artifacts;
}

EvolutionPoint evolution_point(const DialogueArtifacts& artifacts) {
    EvolutionPoint point;
    point.dialogue_id = artifacts.dialogue_id;
    std::vector<double> pre;
    std::vector<double> post;
    for (const auto& session : artifacts.sessions) {
        if (session.rounds.empty()) {
            continue;
        }
        const auto& first = session.rounds.front();
        const auto& last = session.rounds.back();
        if (first.pass_rate_value.has_value()) {
            pre.push_back(*first.pass_rate_value);
        }
        if (last.pass_rate_value.has_value()) {
            post.push_back(*last.pass_rate_value);
        }
    }
    auto mean = [](const std::vector<double>& values) -> std::optional<double> {
        if (values.empty()) {
            return std::nullopt;
        }
        double sum = 0.0;
        for (double v : values) {
            sum += v;
        }
        return sum / static_cast<double>(values.size());
    };
    point.pre = mean(pre);
    point.post = mean(post);
    return point;
}

} // namespace memloop
