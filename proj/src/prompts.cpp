#include "memloop/prompts.hpp"

#include <fstream>
#include <sstream>

#include "memloop/errors.hpp"

#include "json.hpp"

namespace memloop {

PromptSet PromptSet::defaults() {
    PromptSet prompts;
    prompts.version = "1.0";

    prompts.summarizer_base =
        R"(You distill one conversation session into durable memory entries. Extract the important, lasting facts as standalone third-person statements. Output one entry per line, each in the exact format:
SUMMARY | keyword1, keyword2, keyword3
Write nothing else. Use at most 16 lines.)";

    prompts.challenger_guided =
        R"(You are a quizmaster probing what a memory system should have retained from a conversation session. Generate question-answer pairs grounded in the session below. Each question must target one concrete fact and be answerable from the session alone; each answer must be accurate and complete. Prefer details that are easy to overlook. Format strictly as alternating lines:
Q: <question>
A: <answer>)";

    prompts.challenger_unguided = "Write some question-answer pairs about this conversation, "
                                  "formatted as alternating 'Q:' and 'A:' lines.";

    prompts.evaluator_answer =
        R"(Answer the question using ONLY the memory entries provided. Reply with one concise sentence. If the memory does not contain the needed information, reply exactly: I cannot answer this question based on the available memory.)";

    prompts.evaluator_judge =
        R"(Compare the predicted answer with the gold answer for the question. Reply with CORRECT on the first line if the predicted answer conveys the gold answer, otherwise reply with INCORRECT followed by a short description of what the memory was missing or got wrong.)";

    prompts.adapter_content =
        R"(The following questions could not be answered from the constructed memory. For each case, write one standalone factual statement that, if added to the memory, would make the question answerable. Output one fact per line and nothing else.)";

    prompts.adapter_strategy =
        R"(A memory extraction strategy produced memory that failed the cases below. Propose ONE concise amendment to the strategy that would prevent this class of miss in future sessions, or reply NONE if no strategy change would help.)";

    prompts.llm_judge_prompt =
        R"(Decide whether the predicted answer is semantically consistent with the gold answer for the question. Reply with a single digit: 1 if consistent, 0 if not.)";

    return prompts;
}

PromptSet PromptSet::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open prompt file: " + path.string());
    }
    nlohmann::json document;
    try {
        document = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("prompt file " + path.string() + ": " + e.what());
    }

    PromptSet prompts = defaults();
    auto take = [&](const char* key, std::string& field) {
        if (document.contains(key)) {
            field = document.at(key).get<std::string>();
        }
    };
    take("version", prompts.version);
    take("summarizer_base", prompts.summarizer_base);
    take("challenger_guided", prompts.challenger_guided);
    take("challenger_unguided", prompts.challenger_unguided);
    take("evaluator_answer", prompts.evaluator_answer);
    take("evaluator_judge", prompts.evaluator_judge);
    take("adapter_content", prompts.adapter_content);
    take("adapter_strategy", prompts.adapter_strategy);
    take("llm_judge", prompts.llm_judge_prompt);
    return prompts;
}

RoleDefaults role_defaults(RoleTag tag) {
    switch (tag) {
    case RoleTag::challenger: return {0.7, 1024};
    case RoleTag::evaluator_judge:
    case RoleTag::llm_judge: return {0.0, 256};
    default: return {0.3, 1024};
    }
}

namespace {

ChatRequest base_request(RoleTag tag, std::string system_prompt, std::string user_prompt) {
    ChatRequest request;
    request.role_tag = tag;
    request.system_prompt = std::move(system_prompt);
    request.user_prompt = std::move(user_prompt);
    auto defaults = role_defaults(tag);
    request.temperature = defaults.temperature;
    request.max_tokens = defaults.max_tokens;
    return request;
}

} // namespace

std::string render_failures(const ErrorRecord& errors) {
    std::ostringstream out;
    int index = 1;
    for (const auto& failure : errors.failures) {
        if (index > 1) {
            out << '\n';
        }
        out << "CASE " << index << '\n';
        out << "Q: " << failure.qa.question << '\n';
        out << "GOLD: " << failure.qa.gold_answer << '\n';
        out << "PREDICTED: " << failure.verdict.predicted_answer << '\n';
        out << "DEFECT: " << failure.verdict.defect << '\n';
        ++index;
    }
    return out.str();
}

ChatRequest make_summarizer_request(const PromptSet& prompts, const ExtractionStrategy& strategy,
                                    const std::string& session_rendering) {
    (void)prompts; // the strategy *is* the summarizer instruction
    return base_request(RoleTag::memory_summarizer, render_strategy(strategy), session_rendering);
}

ChatRequest make_challenger_request(const PromptSet& prompts, bool guided,
                                    const std::string& session_rendering) {
    return base_request(RoleTag::challenger,
                        guided ? prompts.challenger_guided : prompts.challenger_unguided,
                        session_rendering);
}

ChatRequest make_answer_request(const PromptSet& prompts, const std::string& memory_context,
                                const std::string& question) {
    std::ostringstream user;
    user << "MEMORY:\n" << memory_context << "\n\nQUESTION: " << question;
    return base_request(RoleTag::evaluator_answer, prompts.evaluator_answer, user.str());
}

ChatRequest make_judge_request(const PromptSet& prompts, const std::string& question,
                               const std::string& gold, const std::string& predicted) {
    std::ostringstream user;
    user << "QUESTION: " << question << "\nGOLD: " << gold << "\nPREDICTED: " << predicted;
    return base_request(RoleTag::evaluator_judge, prompts.evaluator_judge, user.str());
}

ChatRequest make_adapter_content_request(const PromptSet& prompts, const ErrorRecord& errors) {
    return base_request(RoleTag::adapter_content, prompts.adapter_content,
                        render_failures(errors));
}

ChatRequest make_adapter_strategy_request(const PromptSet& prompts,
                                          const ExtractionStrategy& strategy,
                                          const ErrorRecord& errors) {
    std::ostringstream user;
    user << "CURRENT STRATEGY:\n"
         << render_strategy(strategy) << "\n\nFAILED CASES:\n"
         << render_failures(errors);
    return base_request(RoleTag::adapter_strategy, prompts.adapter_strategy, user.str());
}

ChatRequest make_llm_judge_request(const PromptSet& prompts, const std::string& question,
                                   const std::string& gold, const std::string& predicted) {
    std::ostringstream user;
    user << "QUESTION: " << question << "\nGOLD: " << gold << "\nPREDICTED: " << predicted;
    return base_request(RoleTag::llm_judge, prompts.llm_judge_prompt, user.str());
}

} // namespace memloop
