#include "memloop/persistence.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "memloop/errors.hpp"
#include "memloop/hashing.hpp"
#include "memloop/log.hpp"
#include "memloop/numeric.hpp"

#include "json.hpp"

namespace memloop {

using nlohmann::json;

namespace {

constexpr const char* kSchemaVersion = "1.0";

void check_version(const std::string& version, const std::string& where) {
    auto dot = version.find('.');
    std::string major = dot == std::string::npos ? version : version.substr(0, dot);
    std::string minor = dot == std::string::npos ? "0" : version.substr(dot + 1);
    if (major != "1") {
        throw ParseError("unsupported schema major version '" + version + "' in " + where);
    }
    if (minor != "0") {
        log_warn("forward minor schema version '" + version + "' in " + where +
                 "; loading anyway");
    }
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "dialogue" : out;
}

json num(double value) { return json(round_sig(value)); }

json embedding_to_json(const EmbeddingVector& vec) {
    json values = json::array();
    for (double v : vec.values) {
        values.push_back(num(v));
    }
    return values;
}

EmbeddingVector embedding_from_json(const json& values) {
    EmbeddingVector vec;
    for (const auto& v : values) {
        vec.values.push_back(v.get<double>());
    }
    return vec;
}

json entry_to_json(const MemoryEntry& entry) {
    json source = {{"dialogue_id", entry.source.dialogue_id},
                   {"session_index", entry.source.session_index},
                   {"turn_span", entry.source.turn_span},
                   {"adapter_supplement", entry.source.adapter_supplement}};
    return {{"entry_id", entry.entry_id},
            {"summary", entry.summary},
            {"keywords", entry.keywords},
            {"timestamp_label", entry.timestamp_label},
            {"source", source},
            {"embedding", embedding_to_json(entry.embedding)},
            {"links", entry.links},
            {"provenance", to_string(entry.provenance)},
            {"created_seq", entry.created_seq}};
}

MemoryEntry entry_from_json(const json& object) {
    MemoryEntry entry;
    entry.entry_id = object.at("entry_id").get<std::string>();
    entry.summary = object.at("summary").get<std::string>();
    for (const auto& keyword : object.at("keywords")) {
        entry.keywords.push_back(keyword.get<std::string>());
    }
    entry.timestamp_label = object.at("timestamp_label").get<std::string>();
    const auto& source = object.at("source");
    entry.source.dialogue_id = source.at("dialogue_id").get<std::string>();
    entry.source.session_index = source.at("session_index").get<int>();
    entry.source.turn_span = source.at("turn_span").get<std::string>();
    entry.source.adapter_supplement = source.at("adapter_supplement").get<bool>();
    entry.embedding = embedding_from_json(object.at("embedding"));
    for (const auto& link : object.at("links")) {
        entry.links.push_back(link.get<std::string>());
    }
    entry.provenance = provenance_from_string(object.at("provenance").get<std::string>());
    entry.created_seq = object.at("created_seq").get<long>();
    return entry;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path.string());
    }
    out << contents;
    if (!out) {
        throw IoError("write failed for file: " + path.string());
    }
}

std::string store_to_jsonl(const MemoryStore& store) {
    std::ostringstream out;
    json header = {{"version", kSchemaVersion},
                   {"next_seq", store.next_seq},
                   {"dialogue_id", store.dialogue_id}};
    out << header.dump() << '\n';
    for (const auto& entry : store.entries) {
        out << entry_to_json(entry).dump() << '\n';
    }
    return out.str();
}

MemoryStore store_from_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open store file: " + path.string());
    }
    MemoryStore store;
    std::string line;
    int line_number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        json parsed;
        try {
            parsed = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("corrupt store file " + path.string() + " at line " +
                             std::to_string(line_number) + ": " + e.what());
        }
        try {
            if (!have_header) {
                check_version(parsed.at("version").get<std::string>(), path.string());
                store.next_seq = parsed.at("next_seq").get<long>();
                store.dialogue_id = parsed.at("dialogue_id").get<std::string>();
                have_header = true;
            } else {
                store.entries.push_back(entry_from_json(parsed));
            }
        } catch (const json::exception& e) {
            throw ParseError("corrupt store file " + path.string() + " at line " +
                             std::to_string(line_number) + ": " + e.what());
        }
    }
    if (!have_header) {
        throw ParseError("store file " + path.string() + " is missing its header line");
    }
    return store;
}

json strategy_to_json(const ExtractionStrategy& strategy) {
    return {{"version", kSchemaVersion},
            {"base_instruction", strategy.base_instruction},
            {"amendments", strategy.amendments},
            {"strategy_version", strategy.version}};
}

ExtractionStrategy strategy_from_json(const json& object, const std::string& where) {
    check_version(object.at("version").get<std::string>(), where);
    ExtractionStrategy strategy;
    strategy.base_instruction = object.at("base_instruction").get<std::string>();
    for (const auto& amendment : object.at("amendments")) {
        strategy.amendments.push_back(amendment.get<std::string>());
    }
    strategy.version = object.at("strategy_version").get<int>();
    return strategy;
}

json sessions_to_json(const DialogueArtifacts& artifacts) {
    json sessions = json::array();
    for (const auto& session : artifacts.sessions) {
        json rounds = json::array();
        for (const auto& round : session.rounds) {
            json records = json::array();
            for (const auto& record : round.records) {
                records.push_back({{"question", record.qa.question},
                                   {"gold_answer", record.qa.gold_answer},
                                   {"predicted", record.verdict.predicted_answer},
                                   {"correct", record.verdict.correct},
                                   {"defect", record.verdict.defect}});
            }
            json round_json = {{"round_index", round.round_index},
                               {"records", records},
                               {"supplements_applied", round.supplements_applied},
                               {"amendment_applied", round.amendment_applied}};
            if (round.pass_rate_value.has_value()) {
                round_json["pass_rate"] = num(*round.pass_rate_value);
            }
            rounds.push_back(std::move(round_json));
        }
        sessions.push_back({{"session_index", session.session_index},
                            {"reconstructed", session.reconstructed},
                            {"rounds", rounds}});
    }
    json document = {{"version", kSchemaVersion},
                     {"dialogue_id", artifacts.dialogue_id},
                     {"sessions", sessions}};
    if (artifacts.error.has_value()) {
        document["error"] = *artifacts.error;
    }
    return document;
}

void sessions_from_json(const json& document, DialogueArtifacts& artifacts,
                        const std::string& where) {
    check_version(document.at("version").get<std::string>(), where);
    if (document.contains("error")) {
        artifacts.error = document.at("error").get<std::string>();
    }
    for (const auto& session_json : document.at("sessions")) {
        SessionReport session;
        session.session_index = session_json.at("session_index").get<int>();
        session.reconstructed = session_json.at("reconstructed").get<bool>();
        for (const auto& round_json : session_json.at("rounds")) {
            RoundReport round;
            round.round_index = round_json.at("round_index").get<int>();
            if (round_json.contains("pass_rate")) {
                round.pass_rate_value = round_json.at("pass_rate").get<double>();
            }
            for (const auto& record_json : round_json.at("records")) {
                QaRecord record;
                record.qa.question = record_json.at("question").get<std::string>();
                record.qa.gold_answer = record_json.at("gold_answer").get<std::string>();
                record.qa.dialogue_id = artifacts.dialogue_id;
                record.qa.session_index = session.session_index;
                record.verdict.predicted_answer = record_json.at("predicted").get<std::string>();
                record.verdict.correct = record_json.at("correct").get<bool>();
                record.verdict.defect = record_json.at("defect").get<std::string>();
                round.records.push_back(std::move(record));
            }
            for (const auto& supplement : round_json.at("supplements_applied")) {
                round.supplements_applied.push_back(supplement.get<std::string>());
            }
            round.amendment_applied = round_json.at("amendment_applied").get<std::string>();
            session.rounds.push_back(std::move(round));
        }
        artifacts.sessions.push_back(std::move(session));
    }
}

json ama_config_to_json(const AmaConfig& config) {
    return {{"qa_per_session", config.qa_per_session},
            {"retrieval_k", config.retrieval_k},
            {"guided_questions", config.guided_questions},
            {"enable_content_update", config.enable_content_update},
            {"enable_strategy_update", config.enable_strategy_update},
            {"max_rounds", config.max_rounds},
            {"reconstruction_pass_threshold", num(config.reconstruction_pass_threshold)},
            {"audit_gold", config.audit_gold}};
}

AmaConfig ama_config_from_json(const json& object) {
    AmaConfig config;
    config.qa_per_session = object.value("qa_per_session", config.qa_per_session);
    config.retrieval_k = object.value("retrieval_k", config.retrieval_k);
    config.guided_questions = object.value("guided_questions", config.guided_questions);
    config.enable_content_update =
        object.value("enable_content_update", config.enable_content_update);
    config.enable_strategy_update =
        object.value("enable_strategy_update", config.enable_strategy_update);
    config.max_rounds = object.value("max_rounds", config.max_rounds);
    config.reconstruction_pass_threshold =
        object.value("reconstruction_pass_threshold", config.reconstruction_pass_threshold);
    config.audit_gold = object.value("audit_gold", config.audit_gold);
    return config;
}

json config_to_json_object(const ConfigSnapshot& config) {
    return {{"ama", ama_config_to_json(config.ama)},
            {"store",
             {{"dup_threshold", num(config.store.dup_threshold)},
              {"link_threshold", num(config.store.link_threshold)},
              {"max_links", config.store.max_links},
              {"max_entries_per_session", config.store.max_entries_per_session}}},
            {"backend_mode", config.backend_mode},
            {"model", config.model},
            {"prompts_version", config.prompts_version},
            {"base_instruction", config.base_instruction},
            {"embed_dim", config.embed_dim},
            {"seed", config.seed}};
}

ConfigSnapshot config_from_json_object(const json& object) {
    ConfigSnapshot config;
    if (object.contains("ama")) {
        config.ama = ama_config_from_json(object.at("ama"));
    }
    if (object.contains("store")) {
        const auto& store = object.at("store");
        config.store.dup_threshold = store.value("dup_threshold", config.store.dup_threshold);
        config.store.link_threshold = store.value("link_threshold", config.store.link_threshold);
        config.store.max_links = store.value("max_links", config.store.max_links);
        config.store.max_entries_per_session =
            store.value("max_entries_per_session", config.store.max_entries_per_session);
    }
    config.backend_mode = object.value("backend_mode", config.backend_mode);
    config.model = object.value("model", config.model);
    config.prompts_version = object.value("prompts_version", config.prompts_version);
    config.base_instruction = object.value("base_instruction", config.base_instruction);
    config.embed_dim = object.value("embed_dim", config.embed_dim);
    config.seed = object.value("seed", config.seed);
    return config;
}

} // namespace

std::string bytes_digest(const std::string& bytes) { return hex64(fnv1a64(bytes)); }

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file for digest: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return bytes_digest(buffer.str());
}

std::string config_to_json(const ConfigSnapshot& config) {
    return config_to_json_object(config).dump(2) + "\n";
}

ConfigSnapshot config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config file: " + path.string());
    }
    try {
        return config_from_json_object(json::parse(in));
    } catch (const json::exception& e) {
        throw ParseError("config file " + path.string() + ": " + e.what());
    }
}

RunManifest save_state(const std::filesystem::path& run_dir, const RunArtifacts& artifacts,
                       const ConfigSnapshot& config, const std::string& started_at,
                       const std::string& finished_at) {
    std::filesystem::create_directories(run_dir);

    RunManifest manifest;
    manifest.config = config;
    manifest.corpus_digest = artifacts.corpus_digest;
    manifest.started_at = started_at;
    manifest.finished_at = finished_at;
    manifest.run_id =
        bytes_digest(artifacts.corpus_digest + "\x1f" + config_to_json(config));

    std::vector<std::string> used_names;
    for (const auto& dialogue : artifacts.dialogues) {
        manifest.dialogue_ids.push_back(dialogue.dialogue_id);
        std::string base = sanitize_filename(dialogue.dialogue_id);
        while (std::find(used_names.begin(), used_names.end(), base) != used_names.end()) {
            base += "_";
        }
        used_names.push_back(base);

        write_file(run_dir / (base + ".memstore.jsonl"), store_to_jsonl(dialogue.store));
        write_file(run_dir / (base + ".strategy.json"),
                   strategy_to_json(dialogue.strategy).dump(2) + "\n");
        write_file(run_dir / (base + ".sessions.json"),
                   sessions_to_json(dialogue).dump(2) + "\n");
        manifest.artifact_paths.push_back(base + ".memstore.jsonl");
        manifest.artifact_paths.push_back(base + ".strategy.json");
        manifest.artifact_paths.push_back(base + ".sessions.json");
    }
    std::sort(manifest.artifact_paths.begin(), manifest.artifact_paths.end());

    json run_json = {{"version", kSchemaVersion},
                     {"run_id", manifest.run_id},
                     {"config", config_to_json_object(config)},
                     {"corpus_digest", manifest.corpus_digest},
                     {"started_at", manifest.started_at},
                     {"finished_at", manifest.finished_at},
                     {"artifact_paths", manifest.artifact_paths},
                     {"dialogues", manifest.dialogue_ids}};
    write_file(run_dir / "run.json", run_json.dump(2) + "\n");
    return manifest;
}

std::pair<RunArtifacts, RunManifest> load_state(const std::filesystem::path& run_dir) {
    auto run_path = run_dir / "run.json";
    std::ifstream in(run_path, std::ios::binary);
    if (!in) {
        throw IoError("not a run directory (missing run.json): " + run_dir.string());
    }
    json run_json;
    try {
        run_json = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("corrupt run.json in " + run_dir.string() + ": " + e.what());
    }
    check_version(run_json.at("version").get<std::string>(), run_path.string());

    RunManifest manifest;
    manifest.run_id = run_json.at("run_id").get<std::string>();
    manifest.config = config_from_json_object(run_json.at("config"));
    manifest.corpus_digest = run_json.at("corpus_digest").get<std::string>();
    manifest.started_at = run_json.at("started_at").get<std::string>();
    manifest.finished_at = run_json.at("finished_at").get<std::string>();
    for (const auto& path : run_json.at("artifact_paths")) {
        manifest.artifact_paths.push_back(path.get<std::string>());
    }
    for (const auto& id : run_json.at("dialogues")) {
        manifest.dialogue_ids.push_back(id.get<std::string>());
    }

    RunArtifacts artifacts;
    artifacts.corpus_digest = manifest.corpus_digest;

    std::vector<std::string> used_names;
    for (const auto& dialogue_id : manifest.dialogue_ids) {
        std::string base = sanitize_filename(dialogue_id);
        while (std::find(used_names.begin(), used_names.end(), base) != used_names.end()) {
            base += "_";
        }
        used_names.push_back(base);

        DialogueArtifacts dialogue;
        dialogue.dialogue_id = dialogue_id;
        dialogue.store = store_from_jsonl(run_dir / (base + ".memstore.jsonl"));
        dialogue.store.config = manifest.config.store;

        auto strategy_path = run_dir / (base + ".strategy.json");
        std::ifstream strategy_in(strategy_path, std::ios::binary);
        if (!strategy_in) {
            throw IoError("missing strategy file: " + strategy_path.string());
        }
        try {
            dialogue.strategy =
                strategy_from_json(json::parse(strategy_in), strategy_path.string());
        } catch (const json::exception& e) {
            throw ParseError("corrupt strategy file " + strategy_path.string() + ": " + e.what());
        }

        auto sessions_path = run_dir / (base + ".sessions.json");
        std::ifstream sessions_in(sessions_path, std::ios::binary);
        if (!sessions_in) {
            throw IoError("missing sessions file: " + sessions_path.string());
        }
        try {
            sessions_from_json(json::parse(sessions_in), dialogue, sessions_path.string());
        } catch (const json::exception& e) {
            throw ParseError("corrupt sessions file " + sessions_path.string() + ": " + e.what());
        }

        artifacts.dialogues.push_back(std::move(dialogue));
    }
    return {std::move(artifacts), std::move(manifest)};
}

} // namespace memloop
