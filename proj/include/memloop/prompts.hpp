#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memloop/llm_gateway.hpp"
#include "memloop/qa_types.hpp"
#include "memloop/strategy.hpp"

namespace memloop {

// The instruction templates behind every agent call. Treated as
// configuration: defaults are versioned here and any field can be overridden
// from a JSON file. Contracts the templates must uphold:
//   - summarizer output: one entry per line, "SUMMARY | kw1, kw2, ..."
//   - challenger output: "Q: ..." / "A: ..." line pairs
//   - judge output: leading CORRECT or INCORRECT token, then the defect
//   - adapter content output: one factual supplement per line
//   - adapter strategy output: one amendment line, or NONE
//   - llm judge output: the single digit 0 or 1
struct PromptSet {
    std::string version{"1.0"};
    std::string summarizer_base;
    std::string challenger_guided;
    std::string challenger_unguided;
    std::string evaluator_answer;
    std::string evaluator_judge;
    std::string adapter_content;
    std::string adapter_strategy;
    std::string llm_judge_prompt;

    static PromptSet defaults();
    static PromptSet from_json_file(const std::filesystem::path& path);
};

// Conventional per-role sampling defaults: 0.0 for judging roles (verdict
// stability), 0.7 for the challenger (question diversity), 0.3 elsewhere.
struct RoleDefaults {
    double temperature;
    int max_tokens;
};
RoleDefaults role_defaults(RoleTag tag);

ChatRequest make_summarizer_request(const PromptSet& prompts, const ExtractionStrategy& strategy,
                                    const std::string& session_rendering);
ChatRequest make_challenger_request(const PromptSet& prompts, bool guided,
                                    const std::string& session_rendering);
ChatRequest make_answer_request(const PromptSet& prompts, const std::string& memory_context,
                                const std::string& question);
ChatRequest make_judge_request(const PromptSet& prompts, const std::string& question,
                               const std::string& gold, const std::string& predicted);
ChatRequest make_adapter_content_request(const PromptSet& prompts, const ErrorRecord& errors);
ChatRequest make_adapter_strategy_request(const PromptSet& prompts,
                                          const ExtractionStrategy& strategy,
                                          const ErrorRecord& errors);
ChatRequest make_llm_judge_request(const PromptSet& prompts, const std::string& question,
                                   const std::string& gold, const std::string& predicted);

// Failure rendering shared by both adapter prompts.
std::string render_failures(const ErrorRecord& errors);

} // namespace memloop
