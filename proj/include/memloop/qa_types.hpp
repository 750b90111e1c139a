#pragma once

#include <string>
#include <vector>

namespace memloop {

// Question categories, mirroring the LoCoMo benchmark taxonomy.
enum class Category { multi_hop, temporal, open_domain, single_hop, other };

const char* to_string(Category category);

// Parses a category name; unknown names map to `other` and set *known=false.
Category category_from_string(const std::string& name, bool* known = nullptr);

// A probe question with its trusted gold answer and the session it targets.
struct QAPair {
    std::string question;
    std::string gold_answer;
    std::string dialogue_id;
    int session_index{0};

    bool operator==(const QAPair&) const = default;
};

// Outcome of judging one predicted answer.
// Invariant: correct == false implies defect is non-empty.
struct Verdict {
    std::string predicted_answer;
    bool correct{false};
    std::string defect;

    bool operator==(const Verdict&) const = default;
};

// The failed probes of one session, fed to the adapter.
struct ErrorRecord {
    struct Failure {
        QAPair qa;
        Verdict verdict;
    };

    std::vector<Failure> failures;
    std::string dialogue_id;
    int session_index{0};
};

} // namespace memloop
