#include "memloop/strategy.hpp"

#include <sstream>

namespace memloop {

namespace {

std::string trim(const std::string& text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

} // namespace

ExtractionStrategy ExtractionStrategy::base(std::string instruction) {
    ExtractionStrategy strategy;
    strategy.base_instruction = std::move(instruction);
    strategy.version = 1;
    return strategy;
}

std::string render_strategy(const ExtractionStrategy& strategy) {
    if (strategy.amendments.empty()) {
        return strategy.base_instruction;
    }
    std::ostringstream out;
    out << strategy.base_instruction << "\n\nAdditional guidance:";
    for (const auto& amendment : strategy.amendments) {
        out << "\n- " << amendment;
    }
    return out.str();
}

ExtractionStrategy apply_strategy_update(const ExtractionStrategy& strategy,
                                         const std::string& amendment) {
    std::string trimmed = trim(amendment);
    if (trimmed.empty()) {
        return strategy;
    }
    for (const auto& existing : strategy.amendments) {
        if (existing == trimmed) {
            return strategy;
        }
    }
    ExtractionStrategy updated = strategy;
    updated.amendments.push_back(trimmed);
    updated.version = 1 + static_cast<int>(updated.amendments.size());
    return updated;
}

} // namespace memloop
