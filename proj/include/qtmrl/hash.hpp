#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qtmrl {

// FNV-1a, 64-bit. Used for config hashes and data fingerprints; not
// cryptographic, just a stable identity for reproducibility checks.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v);

/// Fingerprint of a whole file's bytes. Throws Error("missing-file").
std::string file_fingerprint(const std::string& path);

}  // namespace qtmrl
