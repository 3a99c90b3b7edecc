#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ovdet/core/hash.hpp"

namespace ovdet {

// All randomness in the project flows from one master seed through named
// child seeds, so independent pipeline stages can be reseeded without
// perturbing each other.
inline uint64_t child_seed(uint64_t master, std::string_view name) {
  return hash_combine(master, fnv1a(name));
}

inline uint64_t child_seed(uint64_t master, std::string_view name, uint64_t index) {
  uint64_t h = hash_combine(master, fnv1a(name));
  return hash_combine(h, 0x487ed5110b4611a6ull ^ index);
}

using Rng = std::mt19937_64;

// Bounded draw by rejection. std::uniform_int_distribution is not pinned
// by the standard, so golden files would not survive a stdlib change.
inline uint64_t uniform_below(Rng& rng, uint64_t n) {
  if (n <= 1) return 0;
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  // 53-bit mantissa draw
  double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return lo + u * (hi - lo);
}

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive bounds
  return lo + static_cast<int>(uniform_below(rng, static_cast<uint64_t>(hi - lo + 1)));
}

template <typename T>
void shuffle_inplace(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// First k of a Fisher-Yates pass: k distinct indices from [0, n).
inline std::vector<size_t> sample_indices(Rng& rng, size_t n, size_t k) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  for (size_t i = 0; i < k && i + 1 < n; ++i) {
    size_t j = i + static_cast<size_t>(uniform_below(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace ovdet
