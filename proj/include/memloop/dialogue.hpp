#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "memloop/qa_types.hpp"

namespace memloop {

struct Turn {
    std::string turn_id; // unique within its session
    std::string speaker; // non-empty
    std::string text;    // preserved verbatim, may be empty if the source was

    bool operator==(const Turn&) const = default;
};

struct Session {
    int session_index{1};   // strictly increasing within a dialogue
    std::string date_label; // free-form, e.g. "1:56 pm on 8 May, 2023"
    std::vector<Turn> turns;

    bool operator==(const Session&) const = default;
};

struct Dialogue {
    std::string dialogue_id;
    std::vector<Session> sessions;

    bool operator==(const Dialogue&) const = default;
};

struct BenchmarkQuestion {
    std::string question;
    std::string gold_answer;
    Category category{Category::other};
    std::vector<std::string> evidence_ids;

    bool operator==(const BenchmarkQuestion&) const = default;
};

struct Corpus {
    std::vector<Dialogue> dialogues;
    std::map<std::string, std::vector<BenchmarkQuestion>> questions;

    bool operator==(const Corpus&) const = default;

    const Dialogue* find_dialogue(const std::string& dialogue_id) const;
    std::map<Category, int> category_counts() const;
    int total_questions() const;
};

enum class CorpusFormat { locomo, native };

// Loads a corpus file. LoCoMo numeric category codes map 1->multi_hop,
// 2->temporal, 3->open_domain, 4->single_hop, anything else->other; per-code
// counts are logged so a mismatch against the distributed file is obvious.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

// Canonical single-document native serialization; load(write(c)) == c.
void write_native(const Corpus& corpus, const std::filesystem::path& path);
std::string native_corpus_json(const Corpus& corpus);

// Deterministic "SPEAKER: text" rendering with a leading DATE line when the
// session carries a date label. This is the constructor/challenger input.
std::string session_text(const Session& session);

} // namespace memloop
