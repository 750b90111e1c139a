#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace memloop {

// 64-bit FNV-1a. Used for request digests, corpus digests, and the local
// embedder's token buckets; stable across platforms by construction.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t hash = seed;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= kFnvPrime;
    }
    return hash;
}

inline std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

} // namespace memloop
