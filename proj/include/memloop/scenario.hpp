#pragma once

#include <string>

#include "memloop/llm_gateway.hpp"

namespace memloop {

// Strings shared by the bundled Jon/Gina case-study fixture, the scenario
// backend, and the tests that assert on demo output.
namespace demo {

inline constexpr const char* kRefusal =
    "I cannot answer this question based on the available memory.";

inline constexpr const char* kQuestion1 = "What is Jon currently working on that has been stressful?";
inline constexpr const char* kGold1 = "Jon has been rehearsing hard and working on business plans.";
inline constexpr const char* kQuestion2 = "What phrase does Gina encourage Jon to remember?";
inline constexpr const char* kGold2 = "Just do it!";
inline constexpr const char* kQuestion3 = "What does Gina believe is important for dancers?";
inline constexpr const char* kGold3 = "Having a creative space for dancers is important.";

inline constexpr const char* kAnswer2 = "Gina encourages Jon to remember to 'just do it.'";
inline constexpr const char* kAnswer3 = "Gina believes that a creative space for dancers is important.";

inline constexpr const char* kMissingSummary =
    "Jon is currently rehearsing hard and working on business plans.";
inline constexpr const char* kImproveInstruction =
    "Enhance memory extraction by focusing on detailed and contextual information, ensuring that "
    "all relevant aspects of a person's interests, motivations, and symbolic representations are "
    "captured.";

} // namespace demo

// Deterministic rule-based stand-in for the generative model. It understands
// the default prompt templates (the MEMORY/QUESTION/GOLD/PREDICTED markers
// and the session-text rendering) and produces stable, content-derived
// responses, so recording a run over it yields a frozen replay fixture.
//
// Rules, in brief:
//   - summarizer: one entry per first-person fact turn; asides opened with
//     "By the way," are only captured when the strategy carries amendments
//   - challenger: probes every fact turn, overlooked asides first
//   - answerer: returns the memory entry containing the question's topic
//     tokens, or the fixed refusal sentence
//   - judges: correct iff >= 60% of the gold tokens appear in the prediction
//   - adapters: restate the failed gold answers as facts and propose an
//     aside-capturing amendment
// The Jon/Gina case-study session is recognized explicitly and reproduces the
// published QA pairs, supplement, and improve instruction verbatim.
class ScenarioBackend : public ChatBackend {
public:
    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "scenario/1"; }
};

} // namespace memloop
