#pragma once

#include <string>
#include <vector>

namespace memloop {

// Extraction strategy: a fixed base instruction plus ordered amendments.
// version == 1 + number of applied amendments; the base never changes.
struct ExtractionStrategy {
    std::string base_instruction;
    std::vector<std::string> amendments;
    int version{1};

    static ExtractionStrategy base(std::string instruction);

    bool operator==(const ExtractionStrategy&) const = default;
};

// Renders the strategy as the summarizer system prompt: base instruction,
// then an "Additional guidance:" block with one bullet per amendment.
std::string render_strategy(const ExtractionStrategy& strategy);

// Appends a non-empty amendment and bumps the version. Empty or
// exact-duplicate (after trimming) amendments leave the strategy unchanged.
ExtractionStrategy apply_strategy_update(const ExtractionStrategy& strategy,
                                         const std::string& amendment);

} // namespace memloop
