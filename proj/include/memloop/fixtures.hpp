#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memloop/ama_loop.hpp"
#include "memloop/dialogue.hpp"

namespace memloop::fixtures {

// The bundled Jon/Gina case-study dialogue (one session), with the three
// probe questions doubling as benchmark questions.
Corpus demo_corpus();

// Loop configuration the demo runs with: k=3 probes and a second round so the
// applied supplement is re-tested.
AmaConfig demo_config();

// 10 synthetic dialogues, two sessions each, four first-person facts per
// session. Odd-numbered dialogues plant one overlooked aside per session —
// the scenario summarizer misses it until the strategy is amended, and the
// adapter can supply it as a factual supplement.
Corpus synthetic_corpus();

struct SyntheticDialogueInfo {
    std::string dialogue_id;
    bool has_gap{false};
    std::vector<std::string> gap_questions;
};
std::vector<SyntheticDialogueInfo> synthetic_info();

std::string synthetic_manifest_json();

// One named configuration of the adaptation run exercised by the acceptance
// suite. `adapt_flags` are the CLI flags that produce `config`; fixture
// recording and the CLI must stay in lockstep or replay misses surface loudly.
struct NamedRun {
    std::string name;
    std::vector<std::string> adapt_flags;
    AmaConfig config;
    bool run_eval{false};
    bool judge{false};
};

std::vector<NamedRun> acceptance_matrix();

// File names of the generated fixture set.
inline constexpr const char* kDemoCorpusFile = "demo.corpus.json";
inline constexpr const char* kDemoReplayFile = "demo.replay.jsonl";
inline constexpr const char* kSyntheticCorpusFile = "synthetic.corpus.json";
inline constexpr const char* kSyntheticManifestFile = "synthetic.manifest.json";
inline constexpr const char* kSyntheticReplayFile = "synthetic.replay.jsonl";

// Regenerates every generated fixture into `dir` (corpora, manifest, replay
// files recorded over the scenario backend, and the golden eval report).
// Deterministic: repeated runs produce byte-identical files.
void write_generated_fixtures(const std::filesystem::path& dir);

} // namespace memloop::fixtures
