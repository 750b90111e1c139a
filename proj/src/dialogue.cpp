#include "memloop/dialogue.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "memloop/errors.hpp"
#include "memloop/log.hpp"

#include "json.hpp"

namespace memloop {

using nlohmann::json;

const Dialogue* Corpus::find_dialogue(const std::string& dialogue_id) const {
    for (const auto& dialogue : dialogues) {
        if (dialogue.dialogue_id == dialogue_id) {
            return &dialogue;
        }
    }
    return nullptr;
}

std::map<Category, int> Corpus::category_counts() const {
    std::map<Category, int> counts;
    for (const auto& [id, list] : questions) {
        (void)id;
        for (const auto& question : list) {
            ++counts[question.category];
        }
    }
    return counts;
}

int Corpus::total_questions() const {
    int total = 0;
    for (const auto& [id, list] : questions) {
        (void)id;
        total += static_cast<int>(list.size());
    }
    return total;
}

namespace {

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("parse failure in " + path.string() + " at byte " +
                         std::to_string(e.byte) + ": " + e.what());
    }
}

std::string require_string(const json& object, const char* key, const std::string& where) {
    if (!object.contains(key)) {
        throw ParseError("missing required key '" + std::string(key) + "' in " + where);
    }
    const auto& value = object.at(key);
    if (value.is_string()) {
        return value.get<std::string>();
    }
    // Gold answers in benchmark files are occasionally numbers; stringify.
    if (value.is_number_integer()) {
        return std::to_string(value.get<long long>());
    }
    if (value.is_number_float()) {
        return std::to_string(value.get<double>());
    }
    throw ParseError("key '" + std::string(key) + "' in " + where + " is not a string");
}

Category category_from_code(long long code) {
    switch (code) {
    case 1: return Category::multi_hop;
    case 2: return Category::temporal;
    case 3: return Category::open_domain;
    case 4: return Category::single_hop;
    default: return Category::other;
    }
}

Corpus load_locomo(const json& document, const std::filesystem::path& path) {
    if (!document.is_array()) {
        throw ParseError("LoCoMo file " + path.string() + " must be a top-level array of samples");
    }

    Corpus corpus;
    std::map<long long, int> code_counts;
    int unknown_codes = 0;

    int sample_index = 0;
    for (const auto& sample : document) {
        std::string where = "dialogue " + std::to_string(sample_index) + " of " + path.string();
        Dialogue dialogue;
        dialogue.dialogue_id = sample.contains("sample_id")
                                   ? sample.at("sample_id").get<std::string>()
                                   : "sample_" + std::to_string(sample_index);

        if (!sample.contains("conversation")) {
            throw ParseError("missing required key 'conversation' in " + where);
        }
        const auto& conversation = sample.at("conversation");

        // Collect session_<n> keys, sorted numerically.
        std::vector<int> session_numbers;
        for (auto it = conversation.begin(); it != conversation.end(); ++it) {
            const std::string& key = it.key();
            if (key.rfind("session_", 0) == 0 && it.value().is_array()) {
                std::string suffix = key.substr(8);
                if (!suffix.empty() &&
                    std::all_of(suffix.begin(), suffix.end(),
                                [](unsigned char c) { return std::isdigit(c); })) {
                    session_numbers.push_back(std::stoi(suffix));
                }
            }
        }
        std::sort(session_numbers.begin(), session_numbers.end());

        for (int number : session_numbers) {
            Session session;
            session.session_index = number;
            std::string date_key = "session_" + std::to_string(number) + "_date_time";
            if (conversation.contains(date_key) && conversation.at(date_key).is_string()) {
                session.date_label = conversation.at(date_key).get<std::string>();
            }
            int turn_index = 0;
            for (const auto& turn_json : conversation.at("session_" + std::to_string(number))) {
                Turn turn;
                turn.speaker = require_string(turn_json, "speaker",
                                              "session " + std::to_string(number) + " of " + where);
                if (turn.speaker.empty()) {
                    throw ParseError("empty speaker in session " + std::to_string(number) +
                                     " of " + where);
                }
                turn.turn_id = turn_json.contains("dia_id") && turn_json.at("dia_id").is_string()
                                   ? turn_json.at("dia_id").get<std::string>()
                                   : "s" + std::to_string(number) + ":t" + std::to_string(turn_index);
                // Image captions and similar annotations stay verbatim in text.
                if (turn_json.contains("text") && turn_json.at("text").is_string()) {
                    turn.text = turn_json.at("text").get<std::string>();
                }
                session.turns.push_back(std::move(turn));
                ++turn_index;
            }
            dialogue.sessions.push_back(std::move(session));
        }

        std::vector<BenchmarkQuestion> questions;
        if (sample.contains("qa")) {
            for (const auto& qa : sample.at("qa")) {
                BenchmarkQuestion question;
                question.question = require_string(qa, "question", "qa list of " + where);
                if (qa.contains("answer")) {
                    question.gold_answer = require_string(qa, "answer", "qa list of " + where);
                } else if (qa.contains("adversarial_answer")) {
                    question.gold_answer =
                        require_string(qa, "adversarial_answer", "qa list of " + where);
                } else {
                    throw ParseError("missing required key 'answer' in qa list of " + where);
                }
                long long code = qa.contains("category") && qa.at("category").is_number()
                                     ? qa.at("category").get<long long>()
                                     : -1;
                ++code_counts[code];
                question.category = category_from_code(code);
                if (question.category == Category::other) {
                    ++unknown_codes;
                }
                if (qa.contains("evidence") && qa.at("evidence").is_array()) {
                    for (const auto& ev : qa.at("evidence")) {
                        if (ev.is_string()) {
                            question.evidence_ids.push_back(ev.get<std::string>());
                        } else {
                            question.evidence_ids.push_back(ev.dump());
                        }
                    }
                }
                questions.push_back(std::move(question));
            }
        }
        if (!questions.empty()) {
            corpus.questions[dialogue.dialogue_id] = std::move(questions);
        }
        corpus.dialogues.push_back(std::move(dialogue));
        ++sample_index;
    }

    std::ostringstream codes;
    for (const auto& [code, count] : code_counts) {
        codes << " code_" << code << "=" << count;
    }
    log_info("locomo loader: per-category source codes:" + codes.str());
    if (unknown_codes > 0) {
        log_warn("locomo loader: " + std::to_string(unknown_codes) +
                 " questions had category codes outside 1..4 and were mapped to 'other'");
    }
    return corpus;
}

Corpus load_native(const json& document, const std::filesystem::path& path) {
    if (!document.is_object() || !document.contains("dialogues")) {
        throw ParseError("missing required key 'dialogues' in " + path.string());
    }

    Corpus corpus;
    int dialogue_index = 0;
    for (const auto& dialogue_json : document.at("dialogues")) {
        std::string where = "dialogue " + std::to_string(dialogue_index) + " of " + path.string();
        Dialogue dialogue;
        dialogue.dialogue_id = require_string(dialogue_json, "dialogue_id", where);
        if (!dialogue_json.contains("sessions")) {
            throw ParseError("missing required key 'sessions' in " + where);
        }
        int previous_index = 0;
        for (const auto& session_json : dialogue_json.at("sessions")) {
            Session session;
            if (!session_json.contains("session_index")) {
                throw ParseError("missing required key 'session_index' in " + where);
            }
            session.session_index = session_json.at("session_index").get<int>();
            if (session.session_index <= previous_index) {
                throw ParseError("session_index not strictly increasing in " + where);
            }
            previous_index = session.session_index;
            if (session_json.contains("date_label")) {
                session.date_label = session_json.at("date_label").get<std::string>();
            }
            if (session_json.contains("turns")) {
                for (const auto& turn_json : session_json.at("turns")) {
                    Turn turn;
                    turn.turn_id = require_string(turn_json, "turn_id", where);
                    turn.speaker = require_string(turn_json, "speaker", where);
                    if (turn.speaker.empty()) {
                        throw ParseError("empty speaker in " + where);
                    }
                    if (turn_json.contains("text")) {
                        turn.text = turn_json.at("text").get<std::string>();
                    }
                    for (const auto& existing : session.turns) {
                        if (existing.turn_id == turn.turn_id) {
                            throw ParseError("duplicate turn_id '" + turn.turn_id + "' in " +
                                             where);
                        }
                    }
                    session.turns.push_back(std::move(turn));
                }
            }
            dialogue.sessions.push_back(std::move(session));
        }
        corpus.dialogues.push_back(std::move(dialogue));
        ++dialogue_index;
    }

    if (document.contains("questions")) {
        for (auto it = document.at("questions").begin(); it != document.at("questions").end();
             ++it) {
            const std::string& dialogue_id = it.key();
            if (corpus.find_dialogue(dialogue_id) == nullptr) {
                throw ParseError("questions key '" + dialogue_id +
                                 "' does not reference a dialogue in " + path.string());
            }
            std::vector<BenchmarkQuestion> list;
            for (const auto& qa : it.value()) {
                BenchmarkQuestion question;
                std::string where = "questions['" + dialogue_id + "'] of " + path.string();
                question.question = require_string(qa, "question", where);
                question.gold_answer = require_string(qa, "gold_answer", where);
                bool known = true;
                std::string name = qa.contains("category")
                                       ? qa.at("category").get<std::string>()
                                       : "other";
                question.category = category_from_string(name, &known);
                if (!known) {
                    log_warn("native loader: unrecognized category '" + name +
                             "' mapped to 'other' in " + where);
                }
                if (qa.contains("evidence_ids")) {
                    for (const auto& ev : qa.at("evidence_ids")) {
                        question.evidence_ids.push_back(ev.get<std::string>());
                    }
                }
                list.push_back(std::move(question));
            }
            corpus.questions[dialogue_id] = std::move(list);
        }
    }
    return corpus;
}

} // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    auto document = parse_file(path);
    Corpus corpus = format == CorpusFormat::locomo ? load_locomo(document, path)
                                                   : load_native(document, path);
    std::ostringstream counts;
    for (const auto& [category, count] : corpus.category_counts()) {
        counts << " " << to_string(category) << "=" << count;
    }
    log_info("loaded " + std::to_string(corpus.dialogues.size()) + " dialogues," +
             std::to_string(corpus.total_questions()) + " questions:" + counts.str());
    return corpus;
}

std::string native_corpus_json(const Corpus& corpus) {
    json document;
    document["version"] = "1.0";
    document["dialogues"] = json::array();
    for (const auto& dialogue : corpus.dialogues) {
        json dialogue_json;
        dialogue_json["dialogue_id"] = dialogue.dialogue_id;
        dialogue_json["sessions"] = json::array();
        for (const auto& session : dialogue.sessions) {
            json session_json;
            session_json["session_index"] = session.session_index;
            session_json["date_label"] = session.date_label;
            session_json["turns"] = json::array();
            for (const auto& turn : session.turns) {
                session_json["turns"].push_back(
                    {{"turn_id", turn.turn_id}, {"speaker", turn.speaker}, {"text", turn.text}});
            }
            dialogue_json["sessions"].push_back(std::move(session_json));
        }
        document["dialogues"].push_back(std::move(dialogue_json));
    }
    document["questions"] = json::object();
    for (const auto& [dialogue_id, list] : corpus.questions) {
        json questions_json = json::array();
        for (const auto& question : list) {
            questions_json.push_back({{"question", question.question},
                                      {"gold_answer", question.gold_answer},
                                      {"category", to_string(question.category)},
                                      {"evidence_ids", question.evidence_ids}});
        }
        document["questions"][dialogue_id] = std::move(questions_json);
    }
    return document.dump(2) + "\n";
}

void write_native(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path.string());
    }
    out << native_corpus_json(corpus);
}

std::string session_text(const Session& session) {
    std::ostringstream out;
    bool first = true;
    if (!session.date_label.empty()) {
        out << "DATE: " << session.date_label;
        first = false;
    }
    for (const auto& turn : session.turns) {
        if (!first) {
            out << '\n';
        }
        out << turn.speaker << ": " << turn.text;
        first = false;
    }
    return out.str();
}

} // namespace memloop
