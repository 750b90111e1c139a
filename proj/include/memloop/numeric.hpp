#pragma once

#include <charconv>
#include <string>

namespace memloop {

// Canonical decimal form used everywhere a double is persisted: 9 significant
// digits. Rounding is idempotent, so save/load/save cycles are byte-stable.
// to_chars/from_chars are correctly rounded and locale-free, so concurrent
// callers do not serialize on locale state.
inline double round_sig(double value, int digits = 9) {
    if (value == 0.0) {
        return 0.0;
    }
    char buffer[64];
    auto written = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::general, digits);
    double out = 0.0;
    std::from_chars(buffer, written.ptr, out);
    return out;
}

inline std::string format_sig(double value, int digits = 9) {
    char buffer[64];
    auto written = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::general, digits);
    return std::string(buffer, written.ptr);
}

} // namespace memloop
