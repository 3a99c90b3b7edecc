#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ovdet {

// FNV-1a, 64 bit. Used for content hashes (cache keys, stage hashes,
// OOV token buckets) -- not for anything security sensitive.
inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
  return a;
}

inline uint64_t hash_strings(const std::vector<std::string>& items) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& s : items) {
    h = fnv1a(s, h);
    h = fnv1a("\x1f", h);  // separator so {"ab","c"} != {"a","bc"}
  }
  return h;
}

inline std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace ovdet
