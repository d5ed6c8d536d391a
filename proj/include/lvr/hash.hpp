#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace lvr {

// FNV-1a, 64-bit. Used for run-manifest digests and parameter tags;
// not a cryptographic hash.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::uint64_t fnv1a64_mix(double v, std::uint64_t h) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return fnv1a64(&bits, sizeof bits, h);
}

inline std::uint64_t fnv1a64_mix(std::uint64_t v, std::uint64_t h) {
    return fnv1a64(&v, sizeof v, h);
}

} // namespace lvr
