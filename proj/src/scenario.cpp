#include "memloop/scenario.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "memloop/errors.hpp"
#include "memloop/eval_metrics.hpp"

namespace memloop {

namespace {

constexpr const char* kAsideMarker = "By the way, ";
constexpr const char* kGenericAmendment =
    "Also capture asides and incidental remarks, including facts introduced with phrases like "
    "'by the way'.";

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

bool contains_ci(const std::string& haystack, const std::string& needle) {
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

// Fraction of gold tokens (with multiplicity) present in the prediction.
double gold_recall(const std::string& gold, const std::string& predicted) {
    auto gold_tokens = normalize_text(gold);
    if (gold_tokens.empty()) {
        return normalize_text(predicted).empty() ? 1.0 : 0.0;
    }
    std::unordered_map<std::string, int> available;
    for (const auto& token : normalize_text(predicted)) {
        ++available[token];
    }
    int hit = 0;
    for (const auto& token : gold_tokens) {
        auto it = available.find(token);
        if (it != available.end() && it->second > 0) {
            --it->second;
            ++hit;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(gold_tokens.size());
}

std::string first_line_with_prefix(const std::string& text, const std::string& prefix) {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind(prefix, 0) == 0) {
            return trim(line.substr(prefix.size()));
        }
    }
    return "";
}

std::vector<std::string> lines_with_prefix(const std::string& text, const std::string& prefix) {
    std::vector<std::string> result;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind(prefix, 0) == 0) {
            result.push_back(trim(line.substr(prefix.size())));
        }
    }
    return result;
}

struct FactTurn {
    std::string speaker;
    std::string statement; // third-person restatement, e.g. "Riley adopted ..."
    std::string topic;     // the proper noun after "called"
    bool aside{false};
};

// Parses the session-text rendering ("DATE: ..." then "Speaker: text" lines)
// into fact turns. A fact turn is a first-person sentence, optionally opened
// with the aside marker; its topic is the name following "called".
std::vector<FactTurn> parse_fact_turns(const std::string& session_rendering) {
    std::vector<FactTurn> facts;
    std::istringstream lines(session_rendering);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("DATE: ", 0) == 0) {
            continue;
        }
        auto colon = line.find(": ");
        if (colon == std::string::npos) {
            continue;
        }
        FactTurn fact;
        fact.speaker = line.substr(0, colon);
        std::string text = line.substr(colon + 2);
        if (text.rfind(kAsideMarker, 0) == 0) {
            fact.aside = true;
            text = text.substr(std::string(kAsideMarker).size());
        }
        if (text.rfind("I ", 0) != 0) {
            continue;
        }
        fact.statement = fact.speaker + " " + text.substr(2);

        auto called = fact.statement.find(" called ");
        if (called == std::string::npos) {
            continue;
        }
        std::string rest = fact.statement.substr(called + 8);
        auto end = rest.find_first_of(" .,!?;");
        fact.topic = end == std::string::npos ? rest : rest.substr(0, end);
        if (fact.topic.empty()) {
            continue;
        }
        facts.push_back(std::move(fact));
    }
    // Overlooked asides probe first, so small k still exercises the gap.
    std::stable_sort(facts.begin(), facts.end(),
                     [](const FactTurn& a, const FactTurn& b) { return a.aside > b.aside; });
    return facts;
}

std::string keywords_for(const std::string& statement) {
    auto tokens = normalize_text(statement);
    std::vector<std::string> unique;
    for (const auto& token : tokens) {
        if (std::find(unique.begin(), unique.end(), token) == unique.end()) {
            unique.push_back(token);
        }
    }
    std::stable_sort(unique.begin(), unique.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    if (unique.size() > 3) {
        unique.resize(3);
    }
    std::string out;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += unique[i];
    }
    return out;
}

bool is_demo_session(const std::string& session_rendering) {
    return session_rendering.find("Hey Gina!") != std::string::npos;
}

std::string demo_summary_block(bool amended) {
    std::string out;
    if (amended) {
        out += "Jon has been rehearsing hard and working on business plans, though it has been "
               "stressful. | rehearsing, business plans, stress\n";
    }
    out += "Gina believes that a creative space for dancers is important and will make the studio "
           "a go-to spot for self-expression. | creative space, dancers, self-expression\n";
    out += "Jon committed to not quitting and to keep going, regardless of whatever comes his "
           "way. | commitment, keep going\n";
    out += "Gina reminded Jon to just do it. | encouragement, just do it\n";
    return out;
}

std::string complete_summarizer(const ChatRequest& request) {
    bool amended = request.system_prompt.find("Additional guidance:") != std::string::npos;
    if (is_demo_session(request.user_prompt)) {
        return demo_summary_block(amended);
    }
    std::ostringstream out;
    for (const auto& fact : parse_fact_turns(request.user_prompt)) {
        if (fact.aside && !amended) {
            continue;
        }
        out << fact.statement << " | " << keywords_for(fact.statement) << '\n';
    }
    return out.str();
}

std::string complete_challenger(const ChatRequest& request) {
    if (is_demo_session(request.user_prompt)) {
        std::ostringstream out;
        out << "Q: " << demo::kQuestion1 << '\n' << "A: " << demo::kGold1 << '\n';
        out << "Q: " << demo::kQuestion2 << '\n' << "A: " << demo::kGold2 << '\n';
        out << "Q: " << demo::kQuestion3 << '\n' << "A: " << demo::kGold3 << '\n';
        return out.str();
    }
    std::ostringstream out;
    for (const auto& fact : parse_fact_turns(request.user_prompt)) {
        out << "Q: What did " << fact.speaker << " mention about " << fact.topic << "?\n";
        out << "A: " << fact.statement << '\n';
    }
    return out.str();
}

std::string complete_answer(const ChatRequest& request) {
    std::string question = first_line_with_prefix(request.user_prompt, "QUESTION: ");

    if (contains_ci(question, "currently working on") && contains_ci(question, "stressful")) {
        return contains_ci(request.user_prompt, "rehearsing hard and working on business plans")
                   ? demo::kMissingSummary
                   : demo::kRefusal;
    }
    if (contains_ci(question, "phrase does Gina encourage")) {
        return contains_ci(request.user_prompt, "just do it") ? demo::kAnswer2 : demo::kRefusal;
    }
    if (contains_ci(question, "important for dancers")) {
        return contains_ci(request.user_prompt, "creative space for dancers") ? demo::kAnswer3
                                                                              : demo::kRefusal;
    }

    // Generic: entry lines are rendered as "[timestamp] summary"; answer with
    // the first entry covering every topic token mentioned after "about".
    auto about = lower(question).find("about ");
    std::vector<std::string> topic_tokens;
    if (about != std::string::npos) {
        topic_tokens = normalize_text(question.substr(about + 6));
    }
    if (!topic_tokens.empty()) {
        std::istringstream lines(request.user_prompt);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty() || line.front() != '[') {
                continue;
            }
            auto close = line.find("] ");
            if (close == std::string::npos) {
                continue;
            }
            std::string summary = line.substr(close + 2);
            auto summary_tokens = normalize_text(summary);
            bool all_present = true;
            for (const auto& token : topic_tokens) {
                if (std::find(summary_tokens.begin(), summary_tokens.end(), token) ==
                    summary_tokens.end()) {
                    all_present = false;
                    break;
                }
            }
            if (all_present) {
                return summary;
            }
        }
    }
    return demo::kRefusal;
}

std::string complete_judge(const ChatRequest& request) {
    std::string gold = first_line_with_prefix(request.user_prompt, "GOLD: ");
    std::string predicted = first_line_with_prefix(request.user_prompt, "PREDICTED: ");
    if (gold_recall(gold, predicted) >= 0.6) {
        return "CORRECT";
    }
    return "INCORRECT\nThe memory did not support the expected answer. Expected: " + gold;
}

std::string complete_adapter_content(const ChatRequest& request) {
    std::ostringstream out;
    std::vector<std::string> seen;
    for (const auto& gold : lines_with_prefix(request.user_prompt, "GOLD: ")) {
        std::string fact = contains_ci(gold, "rehearsing hard and working on business plans")
                               ? demo::kMissingSummary
                               : gold;
        if (std::find(seen.begin(), seen.end(), fact) == seen.end()) {
            seen.push_back(fact);
            out << fact << '\n';
        }
    }
    return out.str();
}

std::string complete_adapter_strategy(const ChatRequest& request) {
    for (const auto& gold : lines_with_prefix(request.user_prompt, "GOLD: ")) {
        if (contains_ci(gold, "rehearsing hard and working on business plans")) {
            return demo::kImproveInstruction;
        }
    }
    return kGenericAmendment;
}

std::string complete_llm_judge(const ChatRequest& request) {
    std::string gold = first_line_with_prefix(request.user_prompt, "GOLD: ");
    std::string predicted = first_line_with_prefix(request.user_prompt, "PREDICTED: ");
    return gold_recall(gold, predicted) >= 0.6 ? "1" : "0";
}

} // namespace

std::string ScenarioBackend::complete(const ChatRequest& request) {
    switch (request.role_tag) {
    case RoleTag::memory_summarizer: return complete_summarizer(request);
    case RoleTag::challenger: return complete_challenger(request);
    case RoleTag::evaluator_answer: return complete_answer(request);
    case RoleTag::evaluator_judge: return complete_judge(request);
    case RoleTag::adapter_content: return complete_adapter_content(request);
    case RoleTag::adapter_strategy: return complete_adapter_strategy(request);
    case RoleTag::llm_judge: return complete_llm_judge(request);
    }
    throw Error("scenario backend: unhandled role tag");
}

} // namespace memloop
