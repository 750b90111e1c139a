#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memloop/ama_loop.hpp"

namespace memloop {

// Everything needed to re-run: loop switches, store thresholds, backend and
// model selection, prompt version, embedder dimension, seed. Parallelism is
// deliberately absent — results are scheduling-independent, and recording it
// would break byte-identical runs at different --parallel settings.
struct ConfigSnapshot {
    AmaConfig ama;
    StoreConfig store;
    std::string backend_mode{"scripted-replay"};
    std::string model;
    std::string prompts_version{"1.0"};
    std::string base_instruction;
    int embed_dim{256};
    unsigned long seed{0};

    bool operator==(const ConfigSnapshot&) const = default;
};

struct RunManifest {
    std::string run_id; // derived from corpus digest + config, so scripted runs are stable
    ConfigSnapshot config;
    std::string corpus_digest;
    std::string started_at;  // empty under scripted backends (determinism)
    std::string finished_at;
    std::vector<std::string> artifact_paths;
    std::vector<std::string> dialogue_ids; // corpus order
};

// FNV-1a digest of a file's bytes; stable for identical corpus bytes.
std::string file_digest(const std::filesystem::path& path);
std::string bytes_digest(const std::string& bytes);

// Writes run.json plus, per dialogue, <id>.memstore.jsonl, <id>.strategy.json
// and <id>.sessions.json, with canonical key ordering and 9-significant-digit
// decimals: identical runs serialize to byte-identical directories.
RunManifest save_state(const std::filesystem::path& run_dir, const RunArtifacts& artifacts,
                       const ConfigSnapshot& config, const std::string& started_at = "",
                       const std::string& finished_at = "");

// Full reconstruction from a run directory. Unknown major schema versions are
// an error; a newer minor version loads with a warning.
std::pair<RunArtifacts, RunManifest> load_state(const std::filesystem::path& run_dir);

ConfigSnapshot config_from_json_file(const std::filesystem::path& path);
std::string config_to_json(const ConfigSnapshot& config);

} // namespace memloop
