#include "doctest.h"

#include "memloop/fixtures.hpp"
#include "memloop/llm_gateway.hpp"

#include "json.hpp"

#include "helpers.hpp"

using namespace memloop;

TEST_CASE("committed fixtures match a fresh regeneration byte for byte") {
    testutil::TempDir dir;
    fixtures::write_generated_fixtures(dir.path());

    for (const char* name : {fixtures::kDemoCorpusFile, fixtures::kDemoReplayFile,
                             fixtures::kSyntheticCorpusFile, fixtures::kSyntheticManifestFile,
                             fixtures::kSyntheticReplayFile}) {
        INFO("fixture: " << name);
        CHECK(testutil::read_file(dir.path() / name) ==
              testutil::read_file(std::filesystem::path("fixtures") / name));
    }
    for (const char* name : {"golden/default-k3/report.json", "golden/default-k3/report.txt",
                             "golden/k0/report.json", "golden/k0/report.txt"}) {
        INFO("fixture: " << name);
        CHECK(testutil::read_file(dir.path() / name) ==
              testutil::read_file(std::filesystem::path("fixtures") / name));
    }
}

TEST_CASE("committed replay digests match the digest routine") {
    // Spot check: rebuild one fixture request and find its digest in the
    // committed demo replay file.
    auto prompts = PromptSet::defaults();
    auto corpus = fixtures::demo_corpus();
    auto request = make_challenger_request(
        prompts, true, session_text(corpus.dialogues[0].sessions[0]));
    auto digest = request_digest(request);

    bool found = false;
    for (const auto& entry : load_replay_file("fixtures/demo.replay.jsonl")) {
        if (entry.request_digest == digest) {
            found = true;
            CHECK(entry.role_tag == "challenger");
        }
    }
    CHECK(found);
}

TEST_CASE("synthetic manifest is consistent with the corpus") {
    auto manifest = nlohmann::json::parse(testutil::read_file("fixtures/synthetic.manifest.json"));
    auto corpus = fixtures::synthetic_corpus();

    CHECK(manifest.at("total_questions").get<int>() == corpus.total_questions());
    CHECK(manifest.at("dialogues").size() == corpus.dialogues.size());

    int gap_dialogues = 0;
    for (const auto& info : fixtures::synthetic_info()) {
        const auto& entry = manifest.at("dialogues").at(info.dialogue_id);
        CHECK(entry.at("has_gap").get<bool>() == info.has_gap);
        if (info.has_gap) {
            ++gap_dialogues;
            CHECK(entry.at("gap_questions").size() == info.gap_questions.size());
            // Every gap question is a real benchmark question of that dialogue.
            const auto& questions = corpus.questions.at(info.dialogue_id);
            for (const auto& gap_question : info.gap_questions) {
                bool present = false;
                for (const auto& question : questions) {
                    if (question.question == gap_question) {
                        present = true;
                    }
                }
                CHECK(present);
            }
        }
    }
    CHECK(gap_dialogues == 5);
}
