#include "memloop/fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "memloop/embedding.hpp"
#include "memloop/eval_runner.hpp"
#include "memloop/persistence.hpp"
#include "memloop/prompts.hpp"
#include "memloop/scenario.hpp"

#include "json.hpp"

namespace memloop::fixtures {

namespace {

constexpr int kDialogueCount = 10;
constexpr int kSessionsPerDialogue = 2;
constexpr int kFactsPerSession = 4;

const char* kSpeakerPairs[kDialogueCount][2] = {
    {"Maya", "Riley"}, {"Jonas", "Priya"}, {"Theo", "Nadia"}, {"Omar", "Lena"},
    {"Felix", "Aria"}, {"Ivy", "Marcus"},  {"Noor", "Dylan"}, {"Sana", "Victor"},
    {"Elif", "Hugo"},  {"Tessa", "Ravi"},
};

const char* kSyllables[12] = {"vel", "mor", "tan", "qui", "bran", "dor",
                              "fen", "lus", "car", "nim", "sol", "tra"};

const char* kAnimals[6] = {"beagle", "parrot", "kitten", "tortoise", "ferret", "corgi"};
const char* kPlaces[6] = {"bakery", "lighthouse", "museum", "arcade", "orchard", "planetarium"};
const char* kGroups[4] = {"book club", "hiking group", "jazz band", "chess club"};
const char* kProjects[4] = {"podcast", "garden project", "pottery studio", "newsletter"};

std::string unique_name(int counter) {
    std::string name = std::string(kSyllables[counter % 12]) + kSyllables[(counter / 12) % 12];
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    return name;
}

std::string fact_phrase(int counter) {
    switch (counter % 4) {
    case 0: return std::string("adopted the ") + kAnimals[counter % 6] + " called ";
    case 1: return std::string("visited the ") + kPlaces[counter % 6] + " called ";
    case 2: return std::string("joined the ") + kGroups[counter % 4] + " called ";
    default: return std::string("started the ") + kProjects[counter % 4] + " called ";
    }
}

struct SyntheticFact {
    std::string speaker;
    std::string turn_text;  // first-person, optionally opened with the aside marker
    std::string question;
    std::string gold;       // third-person statement, mirrors the scenario summary
    bool aside{false};
};

struct SyntheticSession {
    Session session;
    std::vector<SyntheticFact> facts; // probe order: asides first
};

SyntheticSession build_session(int dialogue_index, int session_index) {
    const char* speaker_a = kSpeakerPairs[dialogue_index][0];
    const char* speaker_b = kSpeakerPairs[dialogue_index][1];
    bool has_gap = dialogue_index % 2 == 0; // dialogues 1,3,5,7,9 (1-based)

    SyntheticSession result;
    result.session.session_index = session_index;
    {
        std::ostringstream date;
        date << (session_index == 1 ? "10:05 am on " : "7:30 pm on ")
             << (2 * dialogue_index + 3 * session_index) << " March, 2024";
        result.session.date_label = date.str();
    }

    int turn_counter = 1;
    auto add_turn = [&](const std::string& speaker, const std::string& text) {
        Turn turn;
        turn.turn_id = "s" + std::to_string(session_index) + ":t" + std::to_string(turn_counter++);
        turn.speaker = speaker;
        turn.text = text;
        result.session.turns.push_back(std::move(turn));
    };

    add_turn(speaker_a, std::string("Hi ") + speaker_b + "! Good to catch up.");

    for (int f = 0; f < kFactsPerSession; ++f) {
        int counter = (dialogue_index * kSessionsPerDialogue + (session_index - 1)) *
                          kFactsPerSession + f;
        SyntheticFact fact;
        fact.speaker = f % 2 == 0 ? speaker_a : speaker_b;
        fact.aside = has_gap && f == 1;
        std::string name = unique_name(counter);
        std::string body = "I " + fact_phrase(counter) + name + ".";
        fact.turn_text = fact.aside ? "By the way, " + body : body;
        fact.gold = fact.speaker + " " + body.substr(2);
        fact.question = "What did " + fact.speaker + " mention about " + name + "?";
        add_turn(fact.speaker, fact.turn_text);
        result.facts.push_back(std::move(fact));
    }

    // Probe order matches the scenario challenger: overlooked asides first.
    std::stable_sort(result.facts.begin(), result.facts.end(),
                     [](const SyntheticFact& a, const SyntheticFact& b) {
                         return a.aside > b.aside;
                     });
    return result;
}

std::string dialogue_id_for(int dialogue_index) {
    std::ostringstream id;
    id << "synth-" << (dialogue_index + 1 < 10 ? "0" : "") << dialogue_index + 1;
    return id.str();
}

} // namespace

Corpus demo_corpus() {
    Corpus corpus;
    Dialogue dialogue;
    dialogue.dialogue_id = "jon-gina-studio";

    Session session;
    session.session_index = 1;
    session.date_label = "1:56 pm on 8 May, 2023";
    session.turns = {
        {"t1", "Jon",
         "Hey Gina! We haven't talked in a few days. Been rehearsing hard and working on business "
         "plans. It's been stressful, but dancing has kept me going."},
        {"t2", "Gina",
         "Hah, yeah! But really having a creative space for dancers is so important. Last Friday "
         "at dance class with a group of friends I felt it. Your studio will be a go-to spot for "
         "self-expression."},
        {"t3", "Gina", "Remember Jon, Just do it!"},
        {"t4", "Jon", "Ah ha ha, yeah, JUST DOING IT!"},
    };
    dialogue.sessions.push_back(std::move(session));
    corpus.dialogues.push_back(std::move(dialogue));

    corpus.questions["jon-gina-studio"] = {
        {demo::kQuestion1, demo::kGold1, Category::single_hop, {"t1"}},
        {demo::kQuestion2, demo::kGold2, Category::single_hop, {"t3"}},
        {demo::kQuestion3, demo::kGold3, Category::open_domain, {"t2"}},
    };
    return corpus;
}

AmaConfig demo_config() {
    AmaConfig config;
    config.qa_per_session = 3;
    config.retrieval_k = 10;
    config.max_rounds = 2;
    return config;
}

Corpus synthetic_corpus() {
    Corpus corpus;
    static const Category kCycle[4] = {Category::multi_hop, Category::temporal,
                                       Category::open_domain, Category::single_hop};

    for (int d = 0; d < kDialogueCount; ++d) {
        Dialogue dialogue;
        dialogue.dialogue_id = dialogue_id_for(d);

        std::vector<BenchmarkQuestion> questions;
        int question_counter = 0;
        for (int s = 1; s <= kSessionsPerDialogue; ++s) {
            auto built = build_session(d, s);
            dialogue.sessions.push_back(std::move(built.session));
            for (const auto& fact : built.facts) {
                BenchmarkQuestion question;
                question.question = fact.question;
                question.gold_answer = fact.gold;
                question.category = kCycle[(question_counter + d) % 4];
                questions.push_back(std::move(question));
                ++question_counter;
            }
        }
        corpus.questions[dialogue.dialogue_id] = std::move(questions);
        corpus.dialogues.push_back(std::move(dialogue));
    }
    return corpus;
}

std::vector<SyntheticDialogueInfo> synthetic_info() {
    std::vector<SyntheticDialogueInfo> info;
    for (int d = 0; d < kDialogueCount; ++d) {
        SyntheticDialogueInfo dialogue;
        dialogue.dialogue_id = dialogue_id_for(d);
        dialogue.has_gap = d % 2 == 0;
        if (dialogue.has_gap) {
            for (int s = 1; s <= kSessionsPerDialogue; ++s) {
                auto built = build_session(d, s);
                for (const auto& fact : built.facts) {
                    if (fact.aside) {
                        dialogue.gap_questions.push_back(fact.question);
                    }
                }
            }
        }
        info.push_back(std::move(dialogue));
    }
    return info;
}

std::string synthetic_manifest_json() {
    nlohmann::json dialogues = nlohmann::json::object();
    for (const auto& dialogue : synthetic_info()) {
        dialogues[dialogue.dialogue_id] = {{"has_gap", dialogue.has_gap},
                                           {"gap_questions", dialogue.gap_questions}};
    }
    auto corpus = synthetic_corpus();
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [category, count] : corpus.category_counts()) {
        counts[to_string(category)] = count;
    }
    nlohmann::json manifest = {{"version", "1.0"},
                               {"dialogues", dialogues},
                               {"question_counts", counts},
                               {"total_questions", corpus.total_questions()}};
    return manifest.dump(2) + "\n";
}

std::vector<NamedRun> acceptance_matrix() {
    AmaConfig base;
    base.max_rounds = 2;

    std::vector<NamedRun> runs;
    auto add = [&](std::string name, std::vector<std::string> extra_flags, AmaConfig config,
                   bool run_eval, bool judge) {
        NamedRun run;
        run.name = std::move(name);
        run.adapt_flags = {"--max-rounds", "2"};
        run.adapt_flags.insert(run.adapt_flags.end(), extra_flags.begin(), extra_flags.end());
        run.config = config;
        run.run_eval = run_eval;
        run.judge = judge;
        runs.push_back(std::move(run));
    };

    add("default-k3", {}, base, true, true);
    {
        AmaConfig config = base;
        config.qa_per_session = 1;
        add("k1", {"--qa-per-session", "1"}, config, true, false);
    }
    {
        AmaConfig config = base;
        config.qa_per_session = 10;
        add("k10", {"--qa-per-session", "10"}, config, true, false);
    }
    {
        AmaConfig config = base;
        config.qa_per_session = 0;
        add("k0", {"--qa-per-session", "0"}, config, true, false);
    }
    {
        AmaConfig config = base;
        config.enable_content_update = false;
        add("no-content", {"--no-content-update"}, config, false, false);
    }
    {
        AmaConfig config = base;
        config.enable_strategy_update = false;
        add("no-strategy", {"--no-strategy-update"}, config, false, false);
    }
    {
        AmaConfig config = base;
        config.guided_questions = false;
        add("unguided", {"--unguided-questions"}, config, false, false);
    }
    return runs;
}

void write_generated_fixtures(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::filesystem::create_directories(dir / "golden");

    auto demo = demo_corpus();
    write_native(demo, dir / kDemoCorpusFile);
    auto synthetic = synthetic_corpus();
    write_native(synthetic, dir / kSyntheticCorpusFile);

    {
        std::ofstream out(dir / kSyntheticManifestFile, std::ios::binary);
        out << synthetic_manifest_json();
    }

    auto prompts = PromptSet::defaults();
    LocalEmbedder embedder;
    StoreConfig store_config;
    std::string base_instruction = prompts.summarizer_base;

    // Demo replay: one recorded pass of the case-study loop.
    {
        auto replay_path = dir / kDemoReplayFile;
        std::filesystem::remove(replay_path);
        ScenarioBackend scenario;
        RecordingBackend recorder(scenario, replay_path);
        LlmGateway gateway(recorder);
        run_corpus(demo, demo_config(), store_config, base_instruction, gateway, embedder,
                   prompts, 1);
    }

    // Synthetic replay: union of every acceptance configuration, plus the
    // eval answering (and judge) passes, recorded over the scenario backend.
    {
        auto replay_path = dir / kSyntheticReplayFile;
        std::filesystem::remove(replay_path);
        ScenarioBackend scenario;
        RecordingBackend recorder(scenario, replay_path);
        LlmGateway gateway(recorder);

        auto tmp_dir = dir / ".fixgen-tmp";
        std::filesystem::remove_all(tmp_dir);

        for (const auto& run : acceptance_matrix()) {
            auto artifacts = run_corpus(synthetic, run.config, store_config, base_instruction,
                                        gateway, embedder, prompts, 1);
            artifacts.corpus_digest = file_digest(dir / kSyntheticCorpusFile);
            if (!run.run_eval) {
                continue;
            }
            // Round-trip through persistence so the recorded eval follows the
            // same path the CLI takes.
            ConfigSnapshot snapshot;
            snapshot.ama = run.config;
            snapshot.store = store_config;
            snapshot.base_instruction = base_instruction;
            auto run_dir = tmp_dir / run.name;
            save_state(run_dir, artifacts, snapshot);
            auto [loaded, manifest] = load_state(run_dir);
            (void)manifest;

            EvalOptions options;
            options.retrieval_k = run.config.retrieval_k;
            options.judge = run.judge;
            auto outcome = evaluate_corpus(loaded, synthetic, options, gateway, embedder, prompts);
            if (run.name == "default-k3" || run.name == "k0") {
                write_report_files(dir / "golden" / run.name, outcome);
            }
        }
        std::filesystem::remove_all(tmp_dir);
    }
}

} // namespace memloop::fixtures
