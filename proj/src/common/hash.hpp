#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cogadapt {

// FNV-1a, 64-bit. Used for freeze-integrity checks and byte-identity tests;
// not cryptographic.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::vector<double>& v,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a(v.data(), v.size() * sizeof(double), h);
}

std::uint64_t hash_file(const std::string& path);

// Hash of a directory tree: sorted relative paths and file contents.
// Two trees hash equal iff they are byte-identical.
std::uint64_t hash_tree(const std::string& root);

}  // namespace cogadapt
